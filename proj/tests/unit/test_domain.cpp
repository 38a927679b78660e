#include <doctest.h>

#include "discourse/domain.hpp"
#include "discourse/errors.hpp"
#include "fixtures.hpp"

using namespace discourse;

namespace {

Term T(const char* s) { return Term::parse(s); }

DomainPlan plan_of(std::vector<const char*> steps, const char* goal = nullptr) {
  DomainPlan p;
  if (goal) p.goal = T(goal);
  for (auto s : steps) p.steps.push_back({T(s), true, ""});
  return p;
}

// The five-step chain for oranges to Bath in the default world, worked out by
// hand from the initial positions: E1 at Avon, B1 at Dansville, oranges at Corning.
const std::vector<const char*> kOrangesToBath{
    "(MOVE-ENGINE ENGINE-E1 AVON DANSVILLE)", "(COUPLE ENGINE-E1 BOXCAR-B1 DANSVILLE)",
    "(MOVE-ENGINE ENGINE-E1 DANSVILLE CORNING)", "(LOAD ORANGES BOXCAR-B1 CORNING)",
    "(MOVE-ENGINE ENGINE-E1 CORNING BATH)"};

}  // namespace

TEST_CASE("kb queries are three-valued") {
  const auto w = default_world();
  CHECK(kb_query(w.kb, T("(:AT ORANGES CORNING)")) == Answer::Yes);
  // :ISA is closed, so absence means NO.
  CHECK(kb_query(w.kb, T("(:ISA ORANGES ENGINE)")) == Answer::No);
  // :AT is open, so absence is UNKNOWN.
  CHECK(kb_query(w.kb, T("(:AT ORANGES AVON)")) == Answer::Unknown);
  CHECK_THROWS_AS(kb_query(w.kb, T("(:AT ORANGES ?X)")), QueryError);
}

TEST_CASE("resolve finds the first matching fact") {
  const auto w = default_world();
  auto hit = w.kb.resolve(T("(:AT ORANGES ?X)"));
  REQUIRE(hit);
  CHECK(hit->str() == "(:AT ORANGES CORNING)");
  CHECK_FALSE(w.kb.resolve(T("(:AT ?X ELMIRA)")));
}

TEST_CASE("the hand-built chain delivers the oranges") {
  auto w = default_world();
  auto sim = simulate(plan_of(kOrangesToBath).actions(), w.kb);
  CHECK(sim.all_ok());
  CHECK(sim.final.holds(T("(:AT ORANGES BATH)")));
  CHECK(goal_achieved(T("(MOVE-COMMODITY ORANGES BATH)"), sim.final));
  CHECK_FALSE(goal_achieved(T("(MOVE-COMMODITY ORANGES BATH)"), w.kb));

  auto report = execute_plan(plan_of(kOrangesToBath, "(MOVE-COMMODITY ORANGES BATH)"), w.kb);
  CHECK(report.success);
  CHECK(w.kb.holds(T("(:AT ORANGES BATH)")));
}

TEST_CASE("a plan without the load step fails to deliver") {
  auto steps = kOrangesToBath;
  steps.erase(steps.begin() + 3);
  const auto w = default_world();
  auto sim = simulate(plan_of(steps).actions(), w.kb);
  CHECK_FALSE(goal_achieved(T("(MOVE-COMMODITY ORANGES BATH)"), sim.final));
  auto eval = evaluate_plan(plan_of(steps, "(MOVE-COMMODITY ORANGES BATH)"), w.kb);
  CHECK_FALSE(eval.ok);
  CHECK_FALSE(eval.problems.empty());
}

TEST_CASE("simulation stops at an impossible step unless told to skip") {
  const auto w = default_world();
  auto bad = plan_of({"(MOVE-ENGINE ENGINE-E1 BATH CORNING)", "(MOVE-ENGINE ENGINE-E1 AVON BATH)"});
  auto strict = simulate(bad.actions(), w.kb);
  CHECK(strict.steps.size() == 1);
  CHECK_FALSE(strict.steps[0].ok);
  auto lenient = simulate(bad.actions(), w.kb, true);
  REQUIRE(lenient.steps.size() == 2);
  CHECK(lenient.steps[1].ok);
  CHECK(lenient.final.holds(T("(:AT ENGINE-E1 BATH)")));

  auto at_fail = plan_of({"(MOVE-ENGINE ENGINE-E1 BATH CORNING)"}, "(MOVE-COMMODITY ORANGES BATH)");
  auto kb = w.kb;
  auto report = execute_plan(at_fail, kb);
  // Evaluation refuses the plan before any step runs.
  CHECK_FALSE(report.success);
  CHECK_FALSE(report.failed_at.has_value());
  CHECK(kb.holds(T("(:AT ENGINE-E1 AVON)")));
}

TEST_CASE("elaboration in the default world is unique") {
  const auto w = default_world();
  auto e = elaborate_plan(plan_of({}, "(MOVE-COMMODITY ORANGES BATH)"), w);
  REQUIRE(e.found);
  CHECK(e.choice_points.empty());
  REQUIRE(e.candidate_steps.size() == 1);
  std::vector<std::string> got;
  for (const auto& s : e.candidate_steps[0]) got.push_back(s.str());
  CHECK(got == std::vector<std::string>(kOrangesToBath.begin(), kOrangesToBath.end()));
}

TEST_CASE("a second engine yields exactly one choice point") {
  const auto w = load_world_file(fixtures::data_path("worlds/two_engines.world"));
  auto e = elaborate_plan(plan_of({}, "(MOVE-COMMODITY ORANGES BATH)"), w);
  REQUIRE(e.found);
  REQUIRE(e.choice_points.size() == 1);
  CHECK(e.choice_points[0].variable == "E");
  REQUIRE(e.choice_points[0].options.size() == 2);
  CHECK(e.choice_points[0].options[0].str() == "ENGINE-E1");
  CHECK(e.choice_points[0].options[1].str() == "ENGINE-E2");
  CHECK(w.preferences == std::vector{T("ENGINE-E2")});
}

TEST_CASE("type checking flags unbound and ill-typed arguments") {
  const auto w = default_world();
  CHECK(type_check(T("(MOVE-ENGINE ENGINE-E1 AVON BATH)"), w.kb).ok);
  auto open = type_check(T("(MOVE-ENGINE ?E AVON BATH)"), w.kb);
  // Open arguments are reported, not treated as type errors.
  CHECK(open.ok);
  CHECK(open.unbound == std::vector<std::string>{"E"});
  CHECK_FALSE(type_check(T("(LOAD ORANGES ENGINE-E1 CORNING)"), w.kb).ok);
  CHECK(is_domain_action(T("(COUPLE ENGINE-E1 BOXCAR-B1 DANSVILLE)")));
  CHECK(is_goal_action(T("(MOVE-COMMODITY ORANGES BATH)")));
  CHECK_FALSE(is_domain_action(T("(:AT ORANGES BATH)")));
}

TEST_CASE("world files reject malformed clauses") {
  CHECK_THROWS_AS(parse_world("(FACTS (:AT ?X AVON))"), ParseError);
  CHECK_THROWS_AS(parse_world("(ELABORATE (G) (STEPS))"), ParseError);
  CHECK_THROWS_AS(parse_world("(WEATHER SUNNY)"), ParseError);
}

TEST_CASE("helpfulness follows the goal's chain") {
  const auto w = default_world();
  auto plan = plan_of({}, "(MOVE-COMMODITY ORANGES BATH)");
  CHECK(helpful(T("(MOVE-ENGINE ENGINE-E1 AVON DANSVILLE)"), plan, w));
  CHECK_FALSE(helpful(T("(MOVE-ENGINE ENGINE-E1 AVON ELMIRA)"), plan, w));
}
