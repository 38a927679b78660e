#include <doctest.h>

#include <set>

#include "discourse/errors.hpp"
#include "discourse/harness.hpp"
#include "fixtures.hpp"

using namespace discourse;

namespace {

constexpr int kScripts = 150;

// Invariants that must hold after every event and every actor step.
struct InvariantChecker {
  std::vector<std::string> failures;

  void operator()(const std::string& label, int step, const ActorDecision*,
                  const DiscourseState& s) {
    const std::string where = label + "/" + std::to_string(step) + ": ";
    for (const auto& id : s.unacked_acts) {
      const auto* a = s.find_act(id);
      if (!a)
        failures.push_back(where + "unacked id " + id + " unknown");
      else if (a->grounded == Grounding::Acknowledged)
        failures.push_back(where + id + " both unacked and acknowledged");
    }
    for (auto p : {Participant::System, Participant::User})
      for (auto id : s.obligations.stack(p).entries()) {
        const auto& ob = s.obligations.get(id);
        if (ob.state != ObState::Pending)
          failures.push_back(where + ob.render() + " stacked but not pending");
        if (ob.obligee != p) failures.push_back(where + ob.render() + " on the wrong stack");
      }
    for (const auto& in : s.intended_acts)
      if (in.obligation &&
          s.obligations.get(*in.obligation).state != ObState::IntentionFormed)
        failures.push_back(where + "intention for a settled obligation");
    std::set<std::string> ids;
    std::uint32_t last = 0;
    for (const auto& a : s.acts) {
      if (!ids.insert(a.id()).second) failures.push_back(where + "duplicate act " + a.id());
      if (a.seq <= last) failures.push_back(where + "act numbers out of order at " + a.id());
      last = a.seq;
    }
  }
};

void drive(Engine& e, const DialogueScript& script) {
  for (const auto& entry : script.entries) {
    try {
      if (entry.pause)
        e.advance_to(entry.tick);
      else
        e.ingest_record(entry.record);
    } catch (const DecodeError&) {
      // Refused at decode, as a live session would; the state is unchanged.
    }
  }
  e.finish();
}

using Path = std::vector<ProposalStatus>;

bool legal_proposal_path(const Path& h) {
  using P = ProposalStatus;
  static const std::vector<Path> full{
      {P::Proposed, P::Acknowledged, P::Accepted},
      {P::Proposed, P::Acknowledged, P::Rejected, P::Retracted},
  };
  for (const auto& f : full)
    if (h.size() <= f.size() && std::equal(h.begin(), h.end(), f.begin())) return true;
  return false;
}

bool legal_obligation_step(const ObligationTransition& t) {
  if (!t.from) return t.to == ObState::Pending;
  switch (*t.from) {
    case ObState::Pending: return t.to == ObState::IntentionFormed || t.to == ObState::Violated;
    case ObState::IntentionFormed: return t.to == ObState::Discharged || t.to == ObState::Pending;
    default: return false;
  }
}

}  // namespace

TEST_CASE("state invariants hold at every step of random dialogues") {
  fixtures::ScriptGenerator gen(7);
  for (const char* policy : {"cooperative", "guarded", "adversarial", "permissive"}) {
    for (int i = 0; i < kScripts / 4; ++i) {
      const auto script = fixtures::script_of(gen.next());
      Engine e(fixtures::options(policy));
      InvariantChecker check;
      e.set_observer(std::ref(check));
      drive(e, script);
      INFO(policy << " script " << i);
      CHECK(check.failures.empty());
      if (!check.failures.empty()) MESSAGE(check.failures.front());

      e.read([&](const DiscourseState& s) {
        for (const auto& p : s.proposals) CHECK(legal_proposal_path(p.history));
        for (const auto& t : s.obligations.history()) CHECK(legal_obligation_step(t));
        // Discharged and violated are terminal.
        std::map<ObligationId, ObState> final;
        for (const auto& t : s.obligations.history()) final[t.id] = t.to;
        for (const auto& [id, st] : final) CHECK(s.obligations.get(id).state == st);
        return 0;
      });
    }
  }
}

TEST_CASE("snapshots are reproducible run to run") {
  fixtures::ScriptGenerator gen(11);
  for (int i = 0; i < 30; ++i) {
    const auto records = gen.next(2, 8);
    auto once = [&] {
      ProtocolSession session(fixtures::options("cooperative"));
      std::vector<nlohmann::json> all = session.hello();
      for (const auto& r : records) {
        auto out = r.contains("pause")
                       ? session.handle(protocol_record("pause", nlohmann::json::object(),
                                                        r.at("tick").get<std::int64_t>()))
                       : session.handle(protocol_record("user-event", r,
                                                        r.at("tick").get<std::int64_t>()));
        all.insert(all.end(), out.begin(), out.end());
      }
      auto end = session.handle(protocol_record("finish", nlohmann::json::object(), 0));
      all.insert(all.end(), end.begin(), end.end());
      return nlohmann::json(all).dump();
    };
    CHECK(once() == once());
  }
}

TEST_CASE("the golden dialogue keeps the invariants and violates nothing") {
  const auto script = load_script(fixtures::data_path("scripts/oranges.jsonl"));
  Engine e(engine_options(script.header, {}));
  InvariantChecker check;
  e.set_observer(std::ref(check));
  drive(e, script);
  CHECK(check.failures.empty());
  e.read([](const DiscourseState& s) {
    CHECK(s.obligations.count(ObState::Violated) == 0);
    return 0;
  });
}
