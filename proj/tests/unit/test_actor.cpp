#include <doctest.h>

#include "discourse/actor.hpp"
#include "discourse/errors.hpp"
#include "fixtures.hpp"

using namespace discourse;
using fixtures::act;
using fixtures::utterance;

namespace {

void hear(DiscourseState& s, const nlohmann::json& rec) {
  auto ev = decode_event(rec, s.ids);
  ev.acts = derive_indirect_acts(ev.acts, s.ids);
  apply_event(s, ev);
}

Intention say(ActType type, const char* content, IntentionSource src = IntentionSource::Goal) {
  Intention in;
  in.source = src;
  in.acts = {{type, Term::parse(content)}};
  return in;
}

}  // namespace

TEST_CASE("decision kinds map onto their tiers") {
  CHECK(tier_of(DecisionKind::ReleaseTurn) == Tier::TurnManagement);
  CHECK(tier_of(DecisionKind::TakeTurn) == Tier::TurnManagement);
  CHECK(tier_of(DecisionKind::EndConversation) == Tier::TurnManagement);
  CHECK(tier_of(DecisionKind::AddressObligations) == Tier::Obligations);
  CHECK(tier_of(DecisionKind::Wait) == Tier::DontInterrupt);
  CHECK(tier_of(DecisionKind::Generate) == Tier::IntendedActs);
  CHECK(tier_of(DecisionKind::HandleGrounding) == Tier::Grounding);
  CHECK(tier_of(DecisionKind::Negotiate) == Tier::Negotiation);
  CHECK(tier_of(DecisionKind::PursueGoals) == Tier::Goals);
}

TEST_CASE("pending obligations come before anything else") {
  const Policy policy;
  const World world = default_world();
  DiscourseState s;
  hear(s, utterance("1", 1, {act("YNQ", "(:AT ENGINE-E1 AVON)"), act("SUGGEST", "(MOVE-ENGINE ENGINE-E1 AVON BATH)")}));
  s.queue_intention(say(ActType::Inform, "(:AT ORANGES CORNING)"));
  REQUIRE(s.turn_holder == TurnHolder::System);
  CHECK(select_decision(s, policy, world) == DecisionKind::AddressObligations);
}

TEST_CASE("intended acts go out before grounding or negotiation") {
  const Policy policy;
  const World world = default_world();
  DiscourseState s;
  hear(s, utterance("1", 1, {act("SUGGEST", "(MOVE-ENGINE ENGINE-E1 AVON DANSVILLE)")}));
  s.queue_intention(say(ActType::Inform, "(:AT ORANGES CORNING)", IntentionSource::Obligation));
  CHECK(select_decision(s, policy, world) == DecisionKind::Generate);
  s.intended_acts.clear();
  // Unacknowledged user acts are the next concern.
  CHECK(select_decision(s, policy, world) == DecisionKind::HandleGrounding);
}

TEST_CASE("the user's floor is respected until the pause threshold") {
  Policy policy;
  policy.pause_threshold = 3;
  const World world = default_world();
  DiscourseState s;
  hear(s, utterance("1", 10, {act("INFORM", "(:AT ORANGES CORNING)")}, "keep"));
  REQUIRE(s.turn_holder == TurnHolder::User);
  s.tick = 12;
  CHECK(select_decision(s, policy, world) == DecisionKind::Wait);
  s.tick = 13;
  CHECK(select_decision(s, policy, world) == DecisionKind::TakeTurn);
}

TEST_CASE("a finished dialogue only waits") {
  DiscourseState s;
  hear(s, utterance("1", 1, {act("YNQ", "(:AT ENGINE-E1 AVON)")}));
  s.finished = true;
  CHECK(select_decision(s, Policy{}, default_world()) == DecisionKind::Wait);
}

TEST_CASE("an answerable question is answered") {
  Policy policy;
  World world = default_world();
  std::mt19937_64 rng(0);
  ActorEnv env{policy, world, rng};
  DiscourseState s;
  hear(s, utterance("1", 1, {act("YNQ", "(:AT ENGINE-E1 AVON)")}));
  std::vector<std::string> said;
  for (int i = 0; i < 8 && said.empty(); ++i) {
    auto d = actor_step(s, env);
    for (const auto& u : d.utterances)
      for (const auto& a : u.acts) said.push_back(a.render());
  }
  CHECK(std::find(said.begin(), said.end(), "(INFORM-IF (YES (:AT ENGINE-E1 AVON)))") != said.end());
  CHECK(s.obligations.count(ObState::Discharged) == 1);
}

TEST_CASE("realization covers the system's act types") {
  ConversationAct a;
  a.type = ActType::InformIf;
  a.content = Term::parse("(NO (:AT ORANGES AVON))");
  CHECK(realize(a, false) == "No, that's not right.");
  a.type = ActType::Ack;
  CHECK(realize(a, true).empty());
  a.type = ActType::TakeTurn;
  CHECK_THROWS_AS(realize(a, false), GenerationError);
}

TEST_CASE("policies parse strictly") {
  auto p = Policy::from_json({{"cooperativity", "guarded"}, {"pause_threshold", 5}});
  CHECK(p.cooperativity == Cooperativity::Guarded);
  CHECK(p.pause_threshold == 5);
  CHECK(Policy::from_json(p.to_json()).to_json() == p.to_json());

  auto field_of = [](const nlohmann::json& j) {
    try {
      Policy::from_json(j);
    } catch (const DecodeError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of({{"mood", "sunny"}}) == "mood");
  CHECK(field_of({{"pause_threshold", 0}}) == "pause_threshold");
  CHECK_THROWS_AS(Policy::from_json({{"strategy", "whatever"}}), DecodeError);
  CHECK_THROWS_AS(load_policy("no-such-policy"), Error);

  auto permissive = load_policy("permissive");
  CHECK(permissive.allow_violation);
  CHECK(permissive.strategy == Strategy::AdoptIfDesired);
  CHECK(load_policy("adversarial").cooperativity == Cooperativity::Adversarial);
  CHECK_FALSE(load_policy("adversarial").allow_violation);
}

TEST_CASE("only a permissive policy may abandon an obligation") {
  DiscourseState s;
  hear(s, utterance("1", 1, {act("YNQ", "(:AT ENGINE-E1 AVON)")}));
  const ObligationId id = s.obligations.stack(Participant::System).top();
  CHECK_THROWS_AS(abandon(s, load_policy("adversarial"), id), PolicyError);
  abandon(s, load_policy("permissive"), id);
  CHECK(s.obligations.get(id).state == ObState::Violated);
  CHECK(s.obligations.stack(Participant::System).empty());
}

TEST_CASE("the state digest tracks the visible context") {
  DiscourseState a;
  DiscourseState b;
  CHECK(state_digest(a) == state_digest(b));
  CHECK(state_digest(a).size() == 16);
  hear(a, utterance("1", 1, {act("INFORM", "(:AT ORANGES CORNING)")}));
  CHECK(state_digest(a) != state_digest(b));
}
