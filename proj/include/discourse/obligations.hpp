#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "discourse/acts.hpp"
#include "discourse/term.hpp"

namespace discourse {

enum class ObType : std::uint8_t { Achieve, Address, AnswerIf, CheckIf, InformRef, Repair };
std::string_view to_string(ObType t);
ObType parse_ob_type(std::string_view s);

enum class ObState : std::uint8_t { Pending, IntentionFormed, Discharged, Violated };
std::string_view to_string(ObState s);

enum class AttachPhase : std::uint8_t { OnObservation, OnGrounding };
std::string_view to_string(AttachPhase p);

enum class Role : std::uint8_t { Speaker, Hearer };

using ObligationId = std::uint32_t;

struct Obligation {
  ObligationId id = 0;
  ObType type = ObType::Address;
  Term content;
  Participant obligee = Participant::System;
  std::string source_act;
  ObState state = ObState::Pending;
  std::string rule;
  /// For ADDRESS: the content of the request being addressed.
  Term request_content;

  /// `(TYPE content)`, e.g. `(ADDRESS [REQUEST-49])`.
  std::string render() const;
};

/// Trigger pattern -> obliged action. Binds `?ACT` to the triggering act
/// (or, for defect triggers on REQUEST-REPAIR, the act being repaired).
struct ObligationRule {
  std::string name;
  std::vector<ActType> triggers;
  bool on_defect = false;
  Term content_pattern;
  Role obligee = Role::Hearer;
  ObType ob_type = ObType::Address;
  Term obliged_template;
  AttachPhase attach = AttachPhase::OnObservation;
  /// Act types that can discharge the obliged action.
  std::vector<ActType> outcomes;

  bool triggered_by(const ConversationAct& act) const;
};

using RuleSet = std::vector<ObligationRule>;

/// The five standard obligation rules.
const RuleSet& builtin_rules();

/// Parses `(RULE name (ON types...) (CONTENT pat) (OBLIGE SPEAKER|HEARER type templ)
/// (ATTACH ON-OBSERVATION|ON-GROUNDING))` forms. Rejects templates with
/// variables the trigger does not bind.
RuleSet parse_rules(std::string_view text);
RuleSet load_rules_file(const std::string& path);

/// Rules whose trigger accepts `act` (ignoring phase).
std::vector<const ObligationRule*> rules_for(const RuleSet& rules, const ConversationAct& act);

/// Act types that satisfy an obligation of type `t`.
std::vector<ActType> satisfying_acts(ObType t);

class ObligationStack {
 public:
  explicit ObligationStack(Participant owner) : owner_(owner) {}

  Participant owner() const { return owner_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  ObligationId top() const;
  bool contains(ObligationId id) const;
  /// Bottom-to-top order.
  const std::vector<ObligationId>& entries() const { return entries_; }

  void push(ObligationId id) { entries_.push_back(id); }
  void pop();
  void remove(ObligationId id);

 private:
  Participant owner_;
  std::vector<ObligationId> entries_;
};

struct ObligationTransition {
  ObligationId id;
  std::optional<ObState> from;  ///< nullopt when incurred
  ObState to;
};

/// Registry of every obligation ever incurred plus the two discourse stacks.
/// ACHIEVE obligations are kept as commitments beside the stacks: they wait on
/// the plan executor and never block discourse deliberation.
class ObligationBook {
 public:
  ObligationBook() = default;

  const Obligation& get(ObligationId id) const { return all_.at(id - 1); }
  const std::vector<Obligation>& all() const { return all_; }
  ObligationStack& stack(Participant p) { return p == Participant::System ? system_ : user_; }
  const ObligationStack& stack(Participant p) const {
    return p == Participant::System ? system_ : user_;
  }
  const std::vector<ObligationId>& commitments() const { return commitments_; }
  const std::vector<ObligationTransition>& history() const { return history_; }

  ObligationId incur(Obligation ob);
  void transition(ObligationId id, ObState to);

  std::size_t count(ObState s) const;

 private:
  std::vector<Obligation> all_;
  ObligationStack system_{Participant::System};
  ObligationStack user_{Participant::User};
  std::vector<ObligationId> commitments_;
  std::vector<ObligationTransition> history_;
};

enum class IntentionSource : std::uint8_t { Obligation, Goal, Grounding, Negotiation };
std::string_view to_string(IntentionSource s);

struct IntendedAct {
  ActType type = ActType::Ack;
  Term content;
  std::string render() const { return render_act(type, content); }
  friend bool operator==(const IntendedAct&, const IntendedAct&) = default;
};

struct Intention {
  std::vector<IntendedAct> acts;
  IntentionSource source = IntentionSource::Goal;
  std::optional<ObligationId> obligation;
  std::string goal;
  std::string group;
  /// Proposal ids this intention responds to (negotiation bookkeeping).
  std::vector<std::string> about;
};

/// Forward-chains `act` through `rules` for the given phase, pushing one new
/// PENDING obligation per matching rule. Returns the ids in push order.
std::vector<ObligationId> chain(ObligationBook& book, const RuleSet& rules,
                                const ConversationAct& act, AttachPhase phase);

/// Pops `id` (which must be the top of its obligee's stack) and returns an
/// intention carrying the back-reference.
Intention form_intention(ObligationBook& book, ObligationId id, std::vector<IntendedAct> acts,
                         std::string group);

/// Puts an obligation whose intention was dropped back on top of its stack.
void reinstate(ObligationBook& book, ObligationId id);

bool satisfies(const Obligation& ob, const ConversationAct& act);

void discharge(ObligationBook& book, ObligationId id, const ConversationAct& by_act);

/// PENDING -> VIOLATED, removing the entry from its stack.
void mark_violated(ObligationBook& book, ObligationId id);

/// Discharges an ACHIEVE commitment once the executor reports completion.
void complete_commitment(ObligationBook& book, ObligationId id);

}  // namespace discourse
