#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "discourse/actor.hpp"
#include "discourse/state.hpp"

namespace discourse {

/// Owns the discourse state. Commands run one at a time, in submission
/// order, whichever thread submits them.
class StateStore {
 public:
  using Command = std::function<void(DiscourseState&)>;

  explicit StateStore(DiscourseState initial) : state_(std::move(initial)) {}

  void execute(const Command& cmd);

  template <class F>
  auto read(F&& f) const {
    std::lock_guard lock(mu_);
    return f(static_cast<const DiscourseState&>(state_));
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable turn_;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t serving_ = 0;
  DiscourseState state_;
};

struct EngineOptions {
  Policy policy;
  World world = default_world();
  RuleSet rules = builtin_rules();
  /// Actor iterations allowed per ingest before the loop is declared stuck.
  std::size_t step_budget = 512;
};

/// Called after an event is applied (step 0, no decision) and after every
/// actor iteration.
using StepObserver = std::function<void(const std::string& label, int step,
                                        const ActorDecision* decision, const DiscourseState& s)>;

class Engine {
 public:
  explicit Engine(EngineOptions opts);

  void set_observer(StepObserver obs) { observer_ = std::move(obs); }

  /// Decodes a script record against the current state, derives indirect acts,
  /// applies it and runs the actor until it waits. Returns system utterances.
  std::vector<UtteranceEvent> ingest_record(const nlohmann::json& record);
  std::vector<UtteranceEvent> ingest(UtteranceEvent ev);

  /// Lets time pass without user input.
  std::vector<UtteranceEvent> advance_to(std::int64_t tick);

  /// Waits out one pause, then sweeps whatever is still pending into VIOLATED.
  std::vector<UtteranceEvent> finish();

  template <class F>
  auto read(F&& f) const {
    return store_.read(std::forward<F>(f));
  }
  DiscourseContext context() const;
  std::vector<nlohmann::json> trace() const;
  std::int64_t tick() const;
  bool finished() const;

  const Policy& policy() const { return opts_.policy; }
  const World& world() const { return opts_.world; }

 private:
  std::vector<UtteranceEvent> run(DiscourseState& s, const std::string& label);

  EngineOptions opts_;
  std::mt19937_64 rng_;
  StateStore store_;
  StepObserver observer_;
};

/// Fills in `@utt` back-references and content-less ACK/ACCEPT/REJECT from
/// what the user can currently be acknowledging or accepting.
ContentResolver make_resolver(const DiscourseState& s);

}  // namespace discourse
