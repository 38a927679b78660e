#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "discourse/acts.hpp"
#include "discourse/domain.hpp"
#include "discourse/obligations.hpp"

namespace discourse {

enum class TurnHolder : std::uint8_t { System, User, Nobody };
std::string_view to_string(TurnHolder t);

enum class DiscourseGoal : std::uint8_t { GetGoal, BuildPlan, ExecutePlan };
std::string_view to_string(DiscourseGoal g);

enum class ProposalStatus : std::uint8_t { Proposed, Acknowledged, Accepted, Rejected, Retracted };
std::string_view to_string(ProposalStatus s);

struct Proposal {
  std::string id;  ///< id of the proposing act
  Term content;
  Participant proposer = Participant::User;
  ActType via = ActType::Suggest;
  ProposalStatus status = ProposalStatus::Proposed;
  std::vector<ProposalStatus> history{ProposalStatus::Proposed};
  /// An intention responding to this proposal is queued.
  bool response_pending = false;
  bool acceptance_requested = false;
};

enum class Initiative : std::uint8_t { User, System };

/// Whether the user was handed the turn after every goal was met.
enum class EndOffer : std::uint8_t { None, Offered, Declined };

struct OwnAct {
  std::string id;
  /// Times the user had the floor without grounding this act.
  int missed_turns = 0;
  bool ack_requested = false;
};

/// The six fields of a discourse-context snapshot.
struct DiscourseContext {
  std::vector<std::string> system_obligations;  ///< top of stack first
  std::vector<std::string> user_obligations;
  std::string turn_holder;
  std::vector<std::string> intended_acts;
  std::vector<std::string> unacked_acts;
  std::vector<std::string> unaccepted_proposals;
  std::vector<std::string> discourse_goals;

  nlohmann::json to_json() const;
  static DiscourseContext from_json(const nlohmann::json& j);
  /// One labelled line per field.
  std::string pretty() const;

  friend bool operator==(const DiscourseContext&, const DiscourseContext&) = default;
};

class DiscourseState {
 public:
  explicit DiscourseState(RuleSet rules = builtin_rules());

  // Snapshot fields.
  ObligationBook obligations;
  TurnHolder turn_holder = TurnHolder::Nobody;
  std::vector<Intention> intended_acts;
  std::vector<std::string> unacked_acts;
  std::vector<std::string> unaccepted_proposals;
  std::deque<DiscourseGoal> discourse_goals{DiscourseGoal::GetGoal, DiscourseGoal::BuildPlan,
                                            DiscourseGoal::ExecutePlan};
  std::int64_t tick = 0;

  // Bookkeeping behind those fields.
  RuleSet rules;
  ActIdAllocator ids;
  std::vector<ConversationAct> acts;
  std::vector<Proposal> proposals;
  std::vector<OwnAct> own_unacked;
  DomainPlan plan;
  Initiative initiative = Initiative::User;
  std::int64_t last_user_activity = 0;
  std::optional<std::int64_t> released_at;
  EndOffer end_offer = EndOffer::None;
  bool user_assented = false;
  bool turn_seized = false;
  bool finished = false;
  std::map<std::string, Term> utterance_contents;  ///< utt id -> first core content
  std::map<std::string, Term> choices;             ///< resolved choice-point variables
  std::optional<ChoicePoint> open_choice;          ///< put to the user, unanswered
  bool eval_offered = false;
  bool goal_asked = false;
  bool execution_failed = false;
  int system_utterances = 0;

  const ConversationAct* find_act(std::string_view id) const;
  ConversationAct* find_act(std::string_view id);
  Proposal* find_proposal(std::string_view id);
  const Proposal* find_proposal(std::string_view id) const;

  bool goal_pending(DiscourseGoal g) const;
  /// Removes `g` if it is at the front of the goal list.
  bool consume_goal(DiscourseGoal g);

  /// Appends to the trace, first flushing obligation transitions.
  void log(nlohmann::json record);
  const std::vector<nlohmann::json>& trace() const { return trace_; }

  /// Inserts by source priority: obligation, grounding, negotiation, goal.
  void queue_intention(Intention in);

  void set_proposal_status(Proposal& p, ProposalStatus to);

 private:
  void flush_obligation_log();
  std::vector<nlohmann::json> trace_;
  std::size_t logged_transitions_ = 0;
};

/// Applies a perceived (or self-produced) utterance to the state.
DiscourseState& apply_event(DiscourseState& state, const UtteranceEvent& ev);

/// Grounds the listed other-party acts and queues an ACK intention.
void acknowledge(DiscourseState& state, const std::vector<std::string>& act_ids);

/// Marks one of the system's own acts as grounded by the user.
void ground_own_act(DiscourseState& state, const std::string& act_id);

void set_turn(DiscourseState& state, TurnHolder holder, std::string_view reason);

DiscourseContext snapshot(const DiscourseState& state);

/// Whether a SUGGEST/REQUEST content is a plan contribution (domain action,
/// goal or condition) rather than a request for some discourse action.
bool is_proposal_content(const Term& content);

}  // namespace discourse
