#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "discourse/term.hpp"

namespace discourse {

enum class Answer { Yes, No, Unknown };
std::string_view to_string(Answer a);

/// Ground facts plus a per-predicate closed-world flag.
class WorldKB {
 public:
  std::set<Term> facts;
  std::set<std::string> closed_predicates;

  bool holds(const Term& fact) const { return facts.count(fact) > 0; }
  bool isa(const Term& object, std::string_view type) const;
  bool closed(const Term& prop) const;

  /// All bindings satisfying the conjunction, in fact order.
  std::vector<Bindings> solve(const std::vector<Term>& patterns, const Bindings& seed = {}) const;
  /// First fact unifying with `pattern`.
  std::optional<Term> resolve(const Term& pattern) const;
};

/// YES iff present, NO iff absent under a closed predicate, else UNKNOWN.
/// Throws QueryError on unground propositions.
Answer kb_query(const WorldKB& kb, const Term& proposition);

/// One row of the elaboration table: a goal, the KB conditions that bind
/// its parameters, and the step chain that achieves it.
struct ElaborationEntry {
  Term goal;
  std::vector<Term> where;
  std::vector<Term> steps;
};

struct World {
  WorldKB kb;
  std::vector<ElaborationEntry> table;
  /// Executor's fixed preference, consulted by the executor choice mode.
  std::vector<Term> preferences;
};

/// Avon/Bath/Corning/Dansville world with engine E1, boxcar B1 and oranges.
World default_world();
World parse_world(std::string_view text);
World load_world_file(const std::string& path);

struct ChoicePoint {
  std::string variable;
  std::vector<Term> options;
};

struct PlanStep {
  Term action;
  bool shared = false;
  std::string proposal;  ///< act id of the proposing SUGGEST/REQUEST, if any
};

struct DomainPlan {
  std::optional<Term> goal;
  std::vector<PlanStep> steps;
  std::vector<ChoicePoint> choice_points;
  std::vector<Term> conditions;

  bool has_step(const Term& action) const;
  std::vector<Term> actions() const;
  /// Only the parts both parties accepted.
  DomainPlan shared_view() const;
  bool fully_shared() const;
};

/// Signature-level check of a domain action.
struct TypeCheck {
  bool ok = false;
  std::vector<std::string> unbound;
  std::string reason;
};

bool is_domain_action(const Term& t);
bool is_goal_action(const Term& t);
TypeCheck type_check(const Term& action, const WorldKB& kb);

struct StepOutcome {
  Term action;
  bool ok = false;
  std::string reason;
};

struct Simulation {
  std::vector<StepOutcome> steps;
  WorldKB final;
  std::set<Term> seen;  ///< every fact that held at some point
  bool all_ok() const;
};

/// Applies steps in order. With `skip_failures`, a failing step is recorded
/// and skipped; otherwise simulation stops at the first failure.
Simulation simulate(const std::vector<Term>& steps, const WorldKB& kb, bool skip_failures = false);

bool goal_achieved(const Term& goal, const WorldKB& kb);

struct Elaboration {
  bool found = false;
  std::vector<Term> augmentations;
  std::vector<ChoicePoint> choice_points;
  /// Ground step chains, one per surviving parameter binding.
  std::vector<std::vector<Term>> candidate_steps;
  std::vector<Bindings> candidates;
};

Elaboration elaborate_plan(const DomainPlan& plan, const World& world);

struct Evaluation {
  bool ok = false;
  std::vector<Term> problems;
};

Evaluation evaluate_plan(const DomainPlan& plan, const WorldKB& kb);

struct ExecutionReport {
  bool success = false;
  std::optional<std::size_t> failed_at;
  std::string reason;
  std::vector<StepOutcome> steps;
};

/// Runs the plan against the world, mutating `kb`.
ExecutionReport execute_plan(const DomainPlan& plan, WorldKB& kb);

/// Whether a proposed action, goal or condition fits the table's chain for
/// the plan's goal.
bool helpful(const Term& content, const DomainPlan& plan, const World& world);

}  // namespace discourse
