#include <doctest.h>

#include "discourse/errors.hpp"
#include "discourse/state.hpp"
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

}  // namespace

TEST_CASE("a fresh state has every goal and nobody holds the turn") {
  DiscourseState s;
  auto c = snapshot(s);
  CHECK(c.turn_holder == "NOBODY");
  CHECK(c.discourse_goals == std::vector<std::string>{"GET-GOAL", "BUILD-PLAN", "EXECUTE-PLAN"});
  CHECK(c.system_obligations.empty());
  CHECK(c.unacked_acts.empty());
}

TEST_CASE("user contributions wait for grounding and acceptance") {
  DiscourseState s;
  hear(s, utterance("1", 1,
                    {act("INFORM", "(:AT ORANGES CORNING)"),
                     act("SUGGEST", "(MOVE-ENGINE ENGINE-E1 AVON DANSVILLE)")}));
  auto c = snapshot(s);
  CHECK(c.turn_holder == "SYSTEM");
  CHECK(c.unacked_acts == std::vector<std::string>{"[INFORM-1]", "[SUGGEST-2]"});
  // A proposal is only up for acceptance once it has been understood.
  CHECK(c.unaccepted_proposals.empty());
  acknowledge(s, {"INFORM-1", "SUGGEST-2"});
  CHECK(snapshot(s).unaccepted_proposals == std::vector<std::string>{"[SUGGEST-2]"});
  CHECK(s.utterance_contents.at("1").str() == "(:AT ORANGES CORNING)");
}

TEST_CASE("a question obliges the system at once") {
  DiscourseState s;
  hear(s, utterance("1", 1, {act("YNQ", "(:AT ENGINE-E1 AVON)")}, "keep"));
  auto c = snapshot(s);
  CHECK(c.system_obligations == std::vector<std::string>{"(ANSWER-IF (:AT ENGINE-E1 AVON))"});
  CHECK(c.turn_holder == "USER");
}

TEST_CASE("grounding a request attaches the address obligation") {
  DiscourseState s;
  hear(s, utterance("1", 1, {act("REQUEST", "(MOVE-ENGINE ENGINE-E1 AVON BATH)")}));
  CHECK(snapshot(s).system_obligations.empty());
  acknowledge(s, {"REQUEST-1"});
  auto c = snapshot(s);
  CHECK(c.system_obligations == std::vector<std::string>{"(ADDRESS [REQUEST-1])"});
  CHECK(c.unacked_acts.empty());
  CHECK(c.intended_acts == std::vector<std::string>{"(ACK [REQUEST-1])"});
}

TEST_CASE("events may not go back in time") {
  DiscourseState s;
  hear(s, utterance("1", 5, {act("INFORM", "(:AT ORANGES CORNING)")}));
  auto ev = decode_event(utterance("2", 4, {act("INFORM", "(:AT X Y)")}), s.ids);
  CHECK_THROWS_AS(apply_event(s, ev), TimeOrderError);
  CHECK(s.tick == 5);
}

TEST_CASE("proposal status follows the allowed paths only") {
  DiscourseState s;
  Proposal p;
  p.id = "SUGGEST-1";
  s.set_proposal_status(p, ProposalStatus::Acknowledged);
  CHECK_THROWS_AS(s.set_proposal_status(p, ProposalStatus::Retracted), TransitionError);
  s.set_proposal_status(p, ProposalStatus::Rejected);
  s.set_proposal_status(p, ProposalStatus::Retracted);
  CHECK(p.history == std::vector{ProposalStatus::Proposed, ProposalStatus::Acknowledged,
                                 ProposalStatus::Rejected, ProposalStatus::Retracted});

  Proposal q;
  q.id = "SUGGEST-2";
  CHECK_THROWS_AS(s.set_proposal_status(q, ProposalStatus::Accepted), TransitionError);
}

TEST_CASE("goals are consumed only from the front") {
  DiscourseState s;
  CHECK_FALSE(s.consume_goal(DiscourseGoal::BuildPlan));
  CHECK(s.consume_goal(DiscourseGoal::GetGoal));
  CHECK(s.consume_goal(DiscourseGoal::BuildPlan));
  CHECK(s.goal_pending(DiscourseGoal::ExecutePlan));
  CHECK_FALSE(s.goal_pending(DiscourseGoal::GetGoal));
}

TEST_CASE("intentions queue by source priority") {
  DiscourseState s;
  auto make = [](IntentionSource src, const char* content) {
    Intention in;
    in.source = src;
    in.acts = {{ActType::Inform, Term::parse(content)}};
    return in;
  };
  s.queue_intention(make(IntentionSource::Goal, "(G)"));
  s.queue_intention(make(IntentionSource::Negotiation, "(N)"));
  s.queue_intention(make(IntentionSource::Obligation, "(O)"));
  s.queue_intention(make(IntentionSource::Grounding, "(R)"));
  std::vector<IntentionSource> order;
  for (const auto& in : s.intended_acts) order.push_back(in.source);
  CHECK(order == std::vector{IntentionSource::Obligation, IntentionSource::Grounding,
                             IntentionSource::Negotiation, IntentionSource::Goal});
}

TEST_CASE("contexts round-trip through json") {
  DiscourseState s;
  hear(s, utterance("1", 1,
                    {act("YNQ", "(:AT ENGINE-E1 AVON)"),
                     act("SUGGEST", "(MOVE-ENGINE ENGINE-E1 AVON DANSVILLE)")}));
  const auto c = snapshot(s);
  CHECK(DiscourseContext::from_json(c.to_json()) == c);
  CHECK(c.to_json().at("obligations").contains("USER"));
  CHECK_FALSE(c.pretty().empty());
}

TEST_CASE("a further user contribution grounds what the system said") {
  DiscourseState s;
  hear(s, utterance("1", 1, {act("YNQ", "(:AT ENGINE-E1 AVON)")}));
  s.own_unacked.push_back({"INFORM-IF-9", 0, false});
  hear(s, utterance("2", 2, {act("INFORM", "(:AT ORANGES CORNING)")}));
  CHECK(s.own_unacked.empty());
}
