#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "discourse/errors.hpp"
#include "discourse/obligations.hpp"
#include "fixtures.hpp"

using namespace discourse;

namespace {

ConversationAct make(ActType type, std::uint32_t seq, std::string content,
                     Participant speaker = Participant::User) {
  ConversationAct a;
  a.seq = seq;
  a.type = type;
  a.speaker = speaker;
  a.content = Term::parse(content);
  return a;
}

const ObligationRule& rule_named(const RuleSet& rules, std::string_view name) {
  auto it = std::find_if(rules.begin(), rules.end(), [&](const auto& r) { return r.name == name; });
  REQUIRE(it != rules.end());
  return *it;
}

}  // namespace

TEST_CASE("builtin rules cover the five standard rules") {
  // Row by row: source act, who is obliged, obliged action.
  const auto& rules = builtin_rules();
  REQUIRE(rules.size() == 5);

  const auto& accept = rule_named(rules, "accept-or-promise");
  CHECK(accept.triggers == std::vector{ActType::Accept, ActType::Promise});
  CHECK(accept.obligee == Role::Speaker);
  CHECK(accept.ob_type == ObType::Achieve);

  const auto& request = rule_named(rules, "request");
  CHECK(request.triggers == std::vector{ActType::Request});
  CHECK(request.obligee == Role::Hearer);
  CHECK(request.ob_type == ObType::Address);

  const auto& ynq = rule_named(rules, "yes-no-question");
  CHECK(ynq.obligee == Role::Hearer);
  CHECK(ynq.ob_type == ObType::AnswerIf);

  const auto& whq = rule_named(rules, "wh-question");
  CHECK(whq.obligee == Role::Hearer);
  CHECK(whq.ob_type == ObType::InformRef);

  const auto& defect = rule_named(rules, "not-understood");
  CHECK(defect.on_defect);
  CHECK(defect.ob_type == ObType::Repair);
}

TEST_CASE("the shipped rules file matches the builtin set") {
  const auto file = load_rules_file(fixtures::data_path("rules/builtin.rules"));
  const auto& builtin = builtin_rules();
  REQUIRE(file.size() == builtin.size());
  for (std::size_t i = 0; i < file.size(); ++i) {
    CHECK(file[i].name == builtin[i].name);
    CHECK(file[i].triggers == builtin[i].triggers);
    CHECK(file[i].ob_type == builtin[i].ob_type);
    CHECK(file[i].attach == builtin[i].attach);
    CHECK(file[i].obliged_template == builtin[i].obliged_template);
  }
}

TEST_CASE("rule parsing rejects unbound template variables") {
  CHECK_THROWS_AS(parse_rules("(RULE r (ON YNQ) (CONTENT ?P) (OBLIGE HEARER ANSWER-IF ?Q) "
                              "(ATTACH ON-OBSERVATION))"),
                  ParseError);
  CHECK_THROWS_AS(parse_rules("(RULE r (ON YNQ) (OBLIGE SOMEONE ANSWER-IF ?ACT) "
                              "(ATTACH ON-OBSERVATION))"),
                  ParseError);
  CHECK_THROWS_AS(parse_rules("(RULE r (ON YNQ))"), ParseError);
}

TEST_CASE("questions oblige the hearer on observation") {
  ObligationBook book;
  const auto q = make(ActType::Ynq, 2, "(:AT ENGINE-E1 AVON)");
  CHECK(chain(book, builtin_rules(), q, AttachPhase::OnGrounding).empty());
  auto ids = chain(book, builtin_rules(), q, AttachPhase::OnObservation);
  REQUIRE(ids.size() == 1);
  const auto& ob = book.get(ids[0]);
  CHECK(ob.obligee == Participant::System);
  CHECK(ob.render() == "(ANSWER-IF (:AT ENGINE-E1 AVON))");
  CHECK(book.stack(Participant::System).top() == ids[0]);

  // A rule fires at most once per act.
  CHECK(chain(book, builtin_rules(), q, AttachPhase::OnObservation).empty());

  const auto c = make(ActType::Check, 3, "(:AT ORANGES CORNING)");
  auto check_ids = chain(book, builtin_rules(), c, AttachPhase::OnObservation);
  REQUIRE(check_ids.size() == 1);
  CHECK(book.get(check_ids[0]).render() == "(CHECK-IF (:AT ORANGES CORNING))");
}

TEST_CASE("requests and acceptances attach once grounded") {
  ObligationBook book;
  const auto r = make(ActType::Request, 49, "(EVAL (PLAN))");
  CHECK(chain(book, builtin_rules(), r, AttachPhase::OnObservation).empty());
  auto ids = chain(book, builtin_rules(), r, AttachPhase::OnGrounding);
  REQUIRE(ids.size() == 1);
  CHECK(book.get(ids[0]).render() == "(ADDRESS [REQUEST-49])");

  const auto a = make(ActType::Accept, 50, "[SUGGEST-4]", Participant::System);
  auto commit = chain(book, builtin_rules(), a, AttachPhase::OnGrounding);
  REQUIRE(commit.size() == 1);
  CHECK(book.get(commit[0]).obligee == Participant::System);
  CHECK(book.get(commit[0]).type == ObType::Achieve);
  // Commitments wait beside the stacks.
  CHECK(book.commitments() == std::vector{commit[0]});
  CHECK(book.stack(Participant::System).entries() == std::vector{ids[0]});
}

TEST_CASE("defective acts oblige a repair instead of an answer") {
  ObligationBook book;
  auto q = make(ActType::Ynq, 7, "(:AT ORANGES AVON)");
  q.marks.defective = true;
  auto ids = chain(book, builtin_rules(), q, AttachPhase::OnObservation);
  REQUIRE(ids.size() == 1);
  CHECK(book.get(ids[0]).type == ObType::Repair);
  CHECK(book.get(ids[0]).content == q.ref());
}

TEST_CASE("only the top of a stack can be taken up") {
  ObligationBook book;
  auto a = chain(book, builtin_rules(), make(ActType::Ynq, 1, "(P)"), AttachPhase::OnObservation);
  auto b = chain(book, builtin_rules(), make(ActType::Ynq, 2, "(Q)"), AttachPhase::OnObservation);
  CHECK_THROWS_AS(form_intention(book, a[0], {}, "g"), OrderingError);
  auto in = form_intention(book, b[0], {}, "g");
  CHECK(in.obligation == b[0]);
  CHECK(in.source == IntentionSource::Obligation);
  CHECK(book.get(b[0]).state == ObState::IntentionFormed);
  CHECK_THROWS_AS(form_intention(book, b[0], {}, "g"), PreconditionError);
}

TEST_CASE("reinstating in reverse order restores the stack") {
  // Exhaustive over small stacks: pop k entries, reinstate them newest-first.
  for (std::uint32_t n = 1; n <= 5; ++n) {
    for (std::uint32_t k = 1; k <= n; ++k) {
      ObligationBook book;
      for (std::uint32_t i = 1; i <= n; ++i)
        chain(book, builtin_rules(), make(ActType::Ynq, i, "(P" + std::to_string(i) + ")"),
              AttachPhase::OnObservation);
      const auto before = book.stack(Participant::System).entries();
      std::vector<ObligationId> formed;
      for (std::uint32_t j = 0; j < k; ++j)
        formed.push_back(*form_intention(book, book.stack(Participant::System).top(), {}, "g")
                              .obligation);
      for (auto it = formed.rbegin(); it != formed.rend(); ++it) reinstate(book, *it);
      CHECK(book.stack(Participant::System).entries() == before);
      CHECK(book.count(ObState::Pending) == n);
    }
  }
}

TEST_CASE("discharge requires a formed intention and a satisfying act") {
  ObligationBook book;
  auto ids = chain(book, builtin_rules(), make(ActType::Ynq, 1, "(:AT ENGINE-E1 AVON)"),
                   AttachPhase::OnObservation);
  const auto yes = make(ActType::InformIf, 2, "(YES (:AT ENGINE-E1 AVON))", Participant::System);
  CHECK_THROWS_AS(discharge(book, ids[0], yes), TransitionError);
  form_intention(book, ids[0], {}, "g");
  CHECK_THROWS_AS(discharge(book, ids[0], make(ActType::InformIf, 3, "(YES (:AT X Y))")),
                  MismatchError);
  discharge(book, ids[0], yes);
  CHECK(book.get(ids[0]).state == ObState::Discharged);
  CHECK_THROWS_AS(reinstate(book, ids[0]), TransitionError);
}

TEST_CASE("satisfaction by obligation type") {
  Obligation answer;
  answer.type = ObType::AnswerIf;
  answer.content = Term::parse("(P)");
  CHECK(satisfies(answer, make(ActType::InformIf, 1, "(NO (P))")));
  CHECK(satisfies(answer, make(ActType::InformInability, 1, "(UNKNOWN (P))")));
  CHECK_FALSE(satisfies(answer, make(ActType::InformIf, 1, "(MAYBE (P))")));
  CHECK_FALSE(satisfies(answer, make(ActType::InformRef, 1, "(P)")));

  Obligation ref;
  ref.type = ObType::InformRef;
  ref.content = Term::parse("(:AT ORANGES ?X)");
  CHECK(satisfies(ref, make(ActType::InformRef, 1, "(:AT ORANGES CORNING)")));
  CHECK_FALSE(satisfies(ref, make(ActType::InformRef, 1, "(:AT BOXCAR-B1 CORNING)")));

  Obligation address;
  address.type = ObType::Address;
  address.content = Term::act_ref("REQUEST-4");
  address.request_content = Term::parse("(MOVE-ENGINE ENGINE-E1 AVON BATH)");
  CHECK(satisfies(address, make(ActType::Accept, 5, "[REQUEST-4]")));
  CHECK(satisfies(address, make(ActType::Reject, 5, "([REQUEST-4] [SUGGEST-2])")));
  CHECK_FALSE(satisfies(address, make(ActType::Accept, 5, "[REQUEST-3]")));
  CHECK_FALSE(satisfies(address, make(ActType::Eval, 5, "(OK (PLAN))")));
}

TEST_CASE("violation removes a pending entry wherever it sits") {
  ObligationBook book;
  auto a = chain(book, builtin_rules(), make(ActType::Ynq, 1, "(P)"), AttachPhase::OnObservation);
  auto b = chain(book, builtin_rules(), make(ActType::Ynq, 2, "(Q)"), AttachPhase::OnObservation);
  mark_violated(book, a[0]);
  CHECK(book.stack(Participant::System).entries() == std::vector{b[0]});
  CHECK(book.count(ObState::Violated) == 1);
  CHECK_THROWS_AS(mark_violated(book, a[0]), TransitionError);
}

TEST_CASE("history records every transition in order") {
  ObligationBook book;
  auto ids = chain(book, builtin_rules(), make(ActType::Whq, 1, "(:AT ORANGES ?X)"),
                   AttachPhase::OnObservation);
  form_intention(book, ids[0], {}, "g");
  reinstate(book, ids[0]);
  const auto& h = book.history();
  REQUIRE(h.size() == 3);
  CHECK_FALSE(h[0].from.has_value());
  CHECK(h[1].to == ObState::IntentionFormed);
  CHECK(h[2].to == ObState::Pending);
}
