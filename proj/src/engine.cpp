#include "discourse/engine.hpp"

#include <algorithm>

#include "discourse/errors.hpp"

namespace discourse {

void StateStore::execute(const Command& cmd) {
  std::unique_lock lock(mu_);
  const std::uint64_t ticket = next_ticket_++;
  turn_.wait(lock, [&] { return serving_ == ticket; });
  struct Advance {
    StateStore& store;
    ~Advance() {
      ++store.serving_;
      store.turn_.notify_all();
    }
  } advance{*this};
  cmd(state_);
}

ContentResolver make_resolver(const DiscourseState& s) {
  ContentResolver r;
  r.utterance_content = [&s](std::string_view utt) -> std::optional<Term> {
    auto it = s.utterance_contents.find(std::string(utt));
    if (it == s.utterance_contents.end()) return std::nullopt;
    return it->second;
  };
  r.default_content = [&s](ActType type, Participant speaker) {
    std::vector<Term> out;
    if (speaker != Participant::User) return out;
    if (type == ActType::Ack) {
      std::vector<Term> refs;
      for (const auto& o : s.own_unacked) refs.push_back(Term::act_ref(o.id));
      if (refs.size() == 1) out.push_back(refs.front());
      if (refs.size() > 1) out.push_back(Term::list(std::move(refs)));
      return out;
    }
    if (type == ActType::Accept || type == ActType::Reject) {
      for (const auto& p : s.proposals)
        if (p.proposer == Participant::System && (p.status == ProposalStatus::Proposed ||
                                                  p.status == ProposalStatus::Acknowledged))
          out.push_back(Term::act_ref(p.id));
      if (out.empty())
        for (auto it = s.acts.rbegin(); it != s.acts.rend(); ++it)
          if (it->speaker == Participant::System && it->type == ActType::Eval) {
            out.push_back(it->ref());
            break;
          }
    }
    return out;
  };
  return r;
}

Engine::Engine(EngineOptions opts)
    : opts_(std::move(opts)), rng_(opts_.policy.seed), store_(DiscourseState(opts_.rules)) {}

std::vector<UtteranceEvent> Engine::run(DiscourseState& s, const std::string& label) {
  std::vector<UtteranceEvent> out;
  ActorEnv env{opts_.policy, opts_.world, rng_};
  for (std::size_t step = 1;; ++step) {
    if (step > opts_.step_budget)
      throw Error("actor did not settle within " + std::to_string(opts_.step_budget) +
                  " steps after " + label);
    ActorDecision d = actor_step(s, env);
    out.insert(out.end(), d.utterances.begin(), d.utterances.end());
    if (observer_) observer_(label, static_cast<int>(step), &d, s);
    if (d.kind == DecisionKind::Wait || d.kind == DecisionKind::EndConversation) break;
  }
  return out;
}

namespace {

// A failed command leaves no trace, not even consumed act numbers.
template <class F>
void transact(DiscourseState& s, F&& f) {
  DiscourseState backup = s;
  try {
    f();
  } catch (...) {
    s = std::move(backup);
    throw;
  }
}

}  // namespace

std::vector<UtteranceEvent> Engine::ingest_record(const nlohmann::json& record) {
  std::vector<UtteranceEvent> out;
  store_.execute([&](DiscourseState& s) {
    transact(s, [&] {
      UtteranceEvent ev = decode_event(record, s.ids, make_resolver(s));
      ev.acts = derive_indirect_acts(std::move(ev.acts), s.ids);
      apply_event(s, ev);
      if (observer_) observer_(ev.utt_id, 0, nullptr, s);
      out = run(s, ev.utt_id);
    });
  });
  return out;
}

std::vector<UtteranceEvent> Engine::ingest(UtteranceEvent ev) {
  std::vector<UtteranceEvent> out;
  store_.execute([&](DiscourseState& s) {
    transact(s, [&] {
      apply_event(s, ev);
      if (observer_) observer_(ev.utt_id, 0, nullptr, s);
      out = run(s, ev.utt_id);
    });
  });
  return out;
}

std::vector<UtteranceEvent> Engine::advance_to(std::int64_t tick) {
  std::vector<UtteranceEvent> out;
  store_.execute([&](DiscourseState& s) {
    if (tick < s.tick)
      throw TimeOrderError("pause to tick " + std::to_string(tick) + " precedes state tick " +
                           std::to_string(s.tick));
    if (s.finished) return;
    s.tick = tick;
    s.log({{"type", "pause"}});
    const std::string label = "pause@" + std::to_string(tick);
    if (observer_) observer_(label, 0, nullptr, s);
    out = run(s, label);
  });
  return out;
}

std::vector<UtteranceEvent> Engine::finish() {
  const std::int64_t end = tick() + opts_.policy.pause_threshold;
  std::vector<UtteranceEvent> out;
  store_.execute([&](DiscourseState& s) {
    if (!s.finished) {
      s.tick = std::max(s.tick, end);
      s.log({{"type", "pause"}});
      if (observer_) observer_("end", 0, nullptr, s);
      out = run(s, "end");
    }
    // Whatever is still owed at this point was never met.
    for (const auto& in : s.intended_acts)
      if (in.obligation) reinstate(s.obligations, *in.obligation);
    s.intended_acts.clear();
    for (auto p : {Participant::System, Participant::User}) {
      const auto entries = s.obligations.stack(p).entries();
      for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
        const std::string rendered = s.obligations.get(*it).render();
        mark_violated(s.obligations, *it);
        s.log({{"type", "violation"},
               {"obligation", rendered},
               {"obligee", to_string(p)},
               {"reason", "dialogue ended"}});
      }
    }
    for (auto id : s.obligations.commitments()) {
      const Obligation& ob = s.obligations.get(id);
      if (ob.state == ObState::Pending)
        s.log({{"type", "outstanding"}, {"obligation", ob.render()},
               {"obligee", to_string(ob.obligee)}});
    }
    s.finished = true;
    s.log({{"type", "end"}, {"goals_left", s.discourse_goals.size()}});
  });
  return out;
}

DiscourseContext Engine::context() const {
  return store_.read([](const DiscourseState& s) { return snapshot(s); });
}

std::vector<nlohmann::json> Engine::trace() const {
  return store_.read([](const DiscourseState& s) { return s.trace(); });
}

std::int64_t Engine::tick() const {
  return store_.read([](const DiscourseState& s) { return s.tick; });
}

bool Engine::finished() const {
  return store_.read([](const DiscourseState& s) { return s.finished; });
}

}  // namespace discourse
