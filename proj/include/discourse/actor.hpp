#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "discourse/domain.hpp"
#include "discourse/state.hpp"

namespace discourse {

enum class Strategy : std::uint8_t { AutoPerform, AdoptAllAsGoals, AdoptIfDesired };
enum class Cooperativity : std::uint8_t { Cooperative, Guarded, Adversarial };
/// How a plan choice point is settled.
enum class ChoiceMode : std::uint8_t { Canonical, Executor, Ask, Random };

std::string_view to_string(Strategy s);
std::string_view to_string(Cooperativity c);
std::string_view to_string(ChoiceMode m);

struct Policy {
  Strategy strategy = Strategy::AutoPerform;
  Cooperativity cooperativity = Cooperativity::Cooperative;
  std::int64_t pause_threshold = 3;
  bool allow_violation = false;
  ChoiceMode choice = ChoiceMode::Canonical;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are a DecodeError.
  static Policy from_json(const nlohmann::json& j);
};

/// `cooperative`, `guarded`, `adversarial`, `permissive` (adversarial with
/// violations allowed and ADOPT-IF-DESIRED), or a path to a JSON policy file.
Policy load_policy(std::string_view name_or_path);

enum class Tier : std::uint8_t {
  TurnManagement = 0,  ///< release/take/end
  Obligations = 1,
  DontInterrupt = 2,
  IntendedActs = 3,
  Grounding = 4,
  Negotiation = 5,
  Goals = 6,
};

enum class DecisionKind : std::uint8_t {
  AddressObligations,
  Generate,
  HandleGrounding,
  Negotiate,
  PursueGoals,
  ReleaseTurn,
  EndConversation,
  TakeTurn,
  Wait,
};

std::string_view to_string(DecisionKind k);
Tier tier_of(DecisionKind k);

struct ActorDecision {
  DecisionKind kind = DecisionKind::Wait;
  std::string note;
  std::vector<UtteranceEvent> utterances;
};

/// Everything the actor consults besides the discourse state.
struct ActorEnv {
  const Policy& policy;
  World& world;
  std::mt19937_64& rng;
};

/// The priority cascade, without side effects.
DecisionKind select_decision(const DiscourseState& state, const Policy& policy, const World& world);

/// One loop iteration: selects, performs and logs exactly one decision.
ActorDecision actor_step(DiscourseState& state, ActorEnv& env);

/// Forms the response intentions for the top system obligation `id`.
std::vector<Intention> address_obligation(DiscourseState& state, ActorEnv& env, ObligationId id);

/// Realizes queued intentions as one utterance and feeds it back.
std::vector<UtteranceEvent> generate(DiscourseState& state, ActorEnv& env);

std::vector<Intention> handle_grounding(DiscourseState& state);
std::vector<Intention> negotiate(DiscourseState& state, ActorEnv& env);

struct GoalOutcome {
  std::vector<Intention> intentions;
  std::optional<ExecutionReport> execution;
};
GoalOutcome pursue_goals(DiscourseState& state, ActorEnv& env);

/// Policy-layer abandonment of a pending obligation.
void abandon(DiscourseState& state, const Policy& policy, ObligationId id);

/// Surface text for one act; throws GenerationError when no template fits.
std::string realize(const ConversationAct& act, bool with_others);

/// FNV-1a over the compact snapshot JSON, as 16 hex digits.
std::string state_digest(const DiscourseState& state);

}  // namespace discourse
