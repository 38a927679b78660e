#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "discourse/term.hpp"

namespace discourse {

enum class ActType : std::uint8_t {
  // core speech acts
  Inform,
  Ynq,
  Check,
  Whq,
  Suggest,
  Request,
  Accept,
  Reject,
  Promise,
  InformIf,
  InformRef,
  Eval,
  InformInability,
  // grounding
  Ack,
  Repair,
  RequestAck,
  RequestRepair,
  // turn-taking
  TakeTurn,
  ReleaseTurn,
  KeepTurn,
};

enum class ActLevel { Core, Grounding, TurnTaking };

ActLevel level_of(ActType t);
std::string_view to_string(ActType t);
/// Throws VocabularyError for unknown tokens. Accepts upper or lower case.
ActType parse_act_type(std::string_view token);
const std::vector<ActType>& all_act_types();

/// CHECK behaves as a YNQ for rule matching.
bool is_question(ActType t);
/// Core acts the hearer settles by responding; these are grounded on receipt.
bool is_response(ActType t);

enum class Participant : std::uint8_t { System, User };

inline Participant other(Participant p) {
  return p == Participant::System ? Participant::User : Participant::System;
}
std::string_view to_string(Participant p);
Participant parse_participant(std::string_view s);

enum class Grounding : std::uint8_t { Ungrounded, Acknowledged, RepairPending };
std::string_view to_string(Grounding g);

struct ActMarks {
  bool imperative = false;
  bool goal_stating = false;
  bool defective = false;
  friend bool operator==(const ActMarks&, const ActMarks&) = default;
};

struct ConversationAct {
  std::uint32_t seq = 0;  ///< dialogue-wide counter, rendered as TYPE-seq
  ActType type = ActType::Inform;
  Participant speaker = Participant::User;
  Term content;
  std::string group;
  Grounding grounded = Grounding::Ungrounded;
  ActMarks marks;
  std::optional<std::uint32_t> derived_from;

  std::string id() const;
  Term ref() const { return Term::act_ref(id()); }
  /// `(TYPE content)`, splicing reference lists: `(ACK [INFORM-1] [SUGGEST-2])`.
  std::string render() const;

  friend bool operator==(const ConversationAct&, const ConversationAct&) = default;
};

std::string render_act(ActType type, const Term& content);
std::string act_id(ActType type, std::uint32_t seq);

/// Parses `TYPE-n` back into its parts; nullopt when malformed.
std::optional<std::pair<ActType, std::uint32_t>> parse_act_id(std::string_view id);

enum class TurnEffect : std::uint8_t { Release, Keep };
std::string_view to_string(TurnEffect t);

struct UtteranceEvent {
  std::string utt_id;
  Participant speaker = Participant::User;
  std::vector<ConversationAct> acts;
  TurnEffect turn_effect = TurnEffect::Release;
  std::int64_t tick = 0;
  std::string text;  ///< surface form, only for generated utterances

  bool has_core_act() const;
  bool only_turn_acts() const;
};

/// Monotonic act numbering for one dialogue.
class ActIdAllocator {
 public:
  std::uint32_t next() { return ++last_; }
  std::uint32_t last() const { return last_; }

 private:
  std::uint32_t last_ = 0;
};

/// Supplies content the script leaves implicit: `@utt` back-references and
/// the default targets of content-less ACK / ACCEPT / REJECT acts. May return
/// several contents, one act is decoded per entry.
struct ContentResolver {
  std::function<std::optional<Term>(std::string_view utt)> utterance_content;
  std::function<std::vector<Term>(ActType, Participant)> default_content;
};

/// Decodes one script record (`utt`, `speaker`, `acts`, `turn`, `tick`).
UtteranceEvent decode_event(const nlohmann::json& record, ActIdAllocator& ids,
                            const ContentResolver& resolver = {});

/// Adds indirect acts: imperative INFORM -> REQUEST of the informed action;
/// goal-stating INFORM -> SUGGEST of the stated action. Idempotent.
std::vector<ConversationAct> derive_indirect_acts(std::vector<ConversationAct> acts,
                                                  ActIdAllocator& ids);

nlohmann::json to_json(const ConversationAct& act);
nlohmann::json to_json(const UtteranceEvent& ev);

}  // namespace discourse
