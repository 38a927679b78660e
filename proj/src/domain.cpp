#include "discourse/domain.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "discourse/errors.hpp"

namespace discourse {

namespace {

constexpr std::string_view kDefaultWorld = R"(
(WORLD
  (FACTS
    (:ISA AVON CITY) (:ISA BATH CITY) (:ISA CORNING CITY) (:ISA DANSVILLE CITY)
    (:CONNECTED AVON BATH) (:CONNECTED AVON CORNING) (:CONNECTED AVON DANSVILLE)
    (:CONNECTED BATH CORNING) (:CONNECTED BATH DANSVILLE) (:CONNECTED CORNING DANSVILLE)
    (:ISA ENGINE-E1 ENGINE) (:AT ENGINE-E1 AVON)
    (:ISA BOXCAR-B1 BOXCAR) (:AT BOXCAR-B1 DANSVILLE)
    (:ISA ORANGES COMMODITY) (:AT ORANGES CORNING)
    (:REQUIRES MOVE-BOXCAR ENGINE))
  (CLOSED :ISA :CONNECTED :COUPLED :IN)
  (ELABORATE (MOVE-COMMODITY ?C ?DEST)
    (WHERE (:ISA ?C COMMODITY) (:AT ?C ?CL)
           (:ISA ?B BOXCAR) (:AT ?B ?BL)
           (:ISA ?E ENGINE) (:AT ?E ?EL))
    (STEPS (MOVE-ENGINE ?E ?EL ?BL)
           (COUPLE ?E ?B ?BL)
           (MOVE-ENGINE ?E ?BL ?CL)
           (LOAD ?C ?B ?CL)
           (MOVE-ENGINE ?E ?CL ?DEST))))
)";

struct Signature {
  std::string_view head;
  std::vector<std::string_view> arg_types;
  bool goal = false;
};

const std::vector<Signature>& signatures() {
  static const std::vector<Signature> s{
      {"MOVE-ENGINE", {"ENGINE", "CITY", "CITY"}},
      {"COUPLE", {"ENGINE", "BOXCAR", "CITY"}},
      {"LOAD", {"COMMODITY", "BOXCAR", "CITY"}},
      {"MOVE-COMMODITY", {"COMMODITY", "CITY"}, true},
  };
  return s;
}

const Signature* signature_of(const Term& t) {
  auto h = t.head();
  for (const auto& s : signatures())
    if (s.head == h) return &s;
  return nullptr;
}

Term fact(std::string_view pred, const Term& a, const Term& b) {
  return Term::list({Term::symbol(std::string(pred)), a, b});
}

void relocate(WorldKB& kb, const Term& object, const Term& to) {
  for (auto it = kb.facts.begin(); it != kb.facts.end();) {
    if (it->head() == ":AT" && it->size() == 3 && (*it)[1] == object)
      it = kb.facts.erase(it);
    else
      ++it;
  }
  kb.facts.insert(fact(":AT", object, to));
}

std::vector<Term> related(const WorldKB& kb, std::string_view pred, const Term& subject) {
  std::vector<Term> out;
  for (const auto& f : kb.facts)
    if (f.head() == pred && f.size() == 3 && f[1] == subject) out.push_back(f[2]);
  return out;
}

std::vector<Term> holders(const WorldKB& kb, std::string_view pred, const Term& object) {
  std::vector<Term> out;
  for (const auto& f : kb.facts)
    if (f.head() == pred && f.size() == 3 && f[2] == object) out.push_back(f[1]);
  return out;
}

// Returns a failure reason, or empty on success.
std::string apply_step(const Term& action, WorldKB& kb) {
  auto tc = type_check(action, kb);
  if (!tc.ok) return tc.reason;
  auto h = action.head();
  if (h == "MOVE-ENGINE") {
    const Term &e = action[1], &from = action[2], &to = action[3];
    if (from == to) return "engine already at " + to.str();
    if (!kb.holds(fact(":AT", e, from))) return e.str() + " is not at " + from.str();
    if (!kb.holds(fact(":CONNECTED", from, to)) && !kb.holds(fact(":CONNECTED", to, from)))
      return from.str() + " and " + to.str() + " are not connected";
    relocate(kb, e, to);
    for (const auto& car : related(kb, ":COUPLED", e)) {
      relocate(kb, car, to);
      for (const auto& cargo : holders(kb, ":IN", car)) relocate(kb, cargo, to);
    }
    return {};
  }
  if (h == "COUPLE") {
    const Term &e = action[1], &car = action[2], &at = action[3];
    if (!kb.holds(fact(":AT", e, at))) return e.str() + " is not at " + at.str();
    if (!kb.holds(fact(":AT", car, at))) return car.str() + " is not at " + at.str();
    if (kb.holds(fact(":COUPLED", e, car))) return "already coupled";
    kb.facts.insert(fact(":COUPLED", e, car));
    return {};
  }
  if (h == "LOAD") {
    const Term &c = action[1], &car = action[2], &at = action[3];
    if (!kb.holds(fact(":AT", c, at))) return c.str() + " is not at " + at.str();
    if (!kb.holds(fact(":AT", car, at))) return car.str() + " is not at " + at.str();
    if (kb.holds(fact(":IN", c, car))) return "already loaded";
    kb.facts.insert(fact(":IN", c, car));
    return {};
  }
  return action.str() + " is not an executable step";
}

bool is_noop(const Term& step) {
  return step.head() == "MOVE-ENGINE" && step.size() == 4 && step[2] == step[3];
}

// A condition matches a fact when each argument is equal or names a type of
// the fact's argument, so (:AT BOXCAR CORNING) matches (:AT BOXCAR-B1 CORNING).
bool generalizes(const Term& cond, const Term& f, const WorldKB& kb) {
  if (!cond.is_list() || !f.is_list() || cond.size() != f.size() || cond.head() != f.head())
    return false;
  for (std::size_t i = 1; i < cond.size(); ++i) {
    if (cond[i] == f[i]) continue;
    if (cond[i].is_symbol() && kb.isa(f[i], cond[i].text())) continue;
    return false;
  }
  return true;
}

const ElaborationEntry* find_entry(const World& world, const Term& goal, Bindings& b) {
  for (const auto& e : world.table) {
    Bindings local;
    if (match(e.goal, goal, local)) {
      b = local;
      return &e;
    }
  }
  return nullptr;
}

}  // namespace

std::string_view to_string(Answer a) {
  switch (a) {
    case Answer::Yes:
      return "YES";
    case Answer::No:
      return "NO";
    case Answer::Unknown:
      return "UNKNOWN";
  }
  return {};
}

bool WorldKB::isa(const Term& object, std::string_view type) const {
  return holds(fact(":ISA", object, Term::symbol(std::string(type))));
}

bool WorldKB::closed(const Term& prop) const {
  auto h = prop.head();
  return !h.empty() && closed_predicates.count(std::string(h)) > 0;
}

std::vector<Bindings> WorldKB::solve(const std::vector<Term>& patterns, const Bindings& seed) const {
  std::vector<Bindings> out;
  auto rec = [&](auto& self, std::size_t i, const Bindings& b) -> void {
    if (i == patterns.size()) {
      out.push_back(b);
      return;
    }
    Term p = substitute(patterns[i], b);
    for (const auto& f : facts) {
      Bindings next = b;
      if (match(p, f, next)) self(self, i + 1, next);
    }
  };
  rec(rec, 0, seed);
  return out;
}

std::optional<Term> WorldKB::resolve(const Term& pattern) const {
  for (const auto& f : facts) {
    Bindings b;
    if (match(pattern, f, b)) return f;
  }
  return std::nullopt;
}

Answer kb_query(const WorldKB& kb, const Term& proposition) {
  if (!proposition.is_ground())
    throw QueryError("proposition " + proposition.str() + " is not ground");
  if (kb.holds(proposition)) return Answer::Yes;
  return kb.closed(proposition) ? Answer::No : Answer::Unknown;
}

World default_world() { return parse_world(kDefaultWorld); }

World parse_world(std::string_view text) {
  auto forms = Term::parse_all(text);
  std::vector<Term> clauses;
  for (const auto& f : forms) {
    if (f.head() == "WORLD")
      clauses.insert(clauses.end(), f.items().begin() + 1, f.items().end());
    else
      clauses.push_back(f);
  }
  World w;
  for (const auto& c : clauses) {
    auto h = c.head();
    if (h == "FACTS" || h == "FACT") {
      for (std::size_t i = 1; i < c.size(); ++i) {
        if (!c[i].is_ground() || !c[i].is_list())
          throw ParseError("world fact must be a ground list: " + c[i].str());
        w.kb.facts.insert(c[i]);
      }
    } else if (h == "CLOSED") {
      for (std::size_t i = 1; i < c.size(); ++i) w.kb.closed_predicates.insert(c[i].text());
    } else if (h == "ELABORATE") {
      if (c.size() != 4 || c[2].head() != "WHERE" || c[3].head() != "STEPS")
        throw ParseError("expected (ELABORATE goal (WHERE ...) (STEPS ...))");
      ElaborationEntry e;
      e.goal = c[1];
      e.where.assign(c[2].items().begin() + 1, c[2].items().end());
      e.steps.assign(c[3].items().begin() + 1, c[3].items().end());
      w.table.push_back(std::move(e));
    } else if (h == "PREFER") {
      w.preferences.insert(w.preferences.end(), c.items().begin() + 1, c.items().end());
    } else {
      throw ParseError("unknown world clause " + c.str());
    }
  }
  return w;
}

World load_world_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open world file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_world(ss.str());
}

bool DomainPlan::has_step(const Term& action) const {
  return std::any_of(steps.begin(), steps.end(),
                     [&](const PlanStep& s) { return s.action == action; });
}

std::vector<Term> DomainPlan::actions() const {
  std::vector<Term> out;
  for (const auto& s : steps) out.push_back(s.action);
  return out;
}

DomainPlan DomainPlan::shared_view() const {
  DomainPlan p;
  p.goal = goal;
  p.conditions = conditions;
  for (const auto& s : steps)
    if (s.shared) p.steps.push_back(s);
  return p;
}

bool DomainPlan::fully_shared() const {
  return std::all_of(steps.begin(), steps.end(), [](const PlanStep& s) { return s.shared; });
}

bool is_domain_action(const Term& t) {
  const auto* s = signature_of(t);
  return s && !s->goal;
}

bool is_goal_action(const Term& t) {
  const auto* s = signature_of(t);
  return s && s->goal;
}

TypeCheck type_check(const Term& action, const WorldKB& kb) {
  TypeCheck r;
  const auto* sig = signature_of(action);
  if (!sig) {
    r.reason = "unknown action " + action.str();
    return r;
  }
  if (action.size() != sig->arg_types.size() + 1) {
    r.reason = "wrong number of arguments for " + std::string(sig->head);
    return r;
  }
  for (std::size_t i = 0; i < sig->arg_types.size(); ++i) {
    const Term& arg = action[i + 1];
    if (arg.is_variable()) {
      r.unbound.push_back(arg.text());
      continue;
    }
    if (!kb.isa(arg, sig->arg_types[i])) {
      r.reason = arg.str() + " is not a " + std::string(sig->arg_types[i]);
      return r;
    }
  }
  r.ok = true;
  return r;
}

bool Simulation::all_ok() const {
  return std::all_of(steps.begin(), steps.end(), [](const StepOutcome& s) { return s.ok; });
}

Simulation simulate(const std::vector<Term>& steps, const WorldKB& kb, bool skip_failures) {
  Simulation sim;
  sim.final = kb;
  sim.seen = kb.facts;
  for (const auto& step : steps) {
    WorldKB trial = sim.final;
    auto reason = apply_step(step, trial);
    sim.steps.push_back({step, reason.empty(), reason});
    if (reason.empty()) {
      sim.final = std::move(trial);
      sim.seen.insert(sim.final.facts.begin(), sim.final.facts.end());
    } else if (!skip_failures) {
      break;
    }
  }
  return sim;
}

bool goal_achieved(const Term& goal, const WorldKB& kb) {
  if (goal.head() == "MOVE-COMMODITY" && goal.size() == 3)
    return kb.holds(fact(":AT", goal[1], goal[2]));
  return false;
}

Elaboration elaborate_plan(const DomainPlan& plan, const World& world) {
  Elaboration out;
  if (!plan.goal) return out;
  Bindings gb;
  const ElaborationEntry* entry = find_entry(world, *plan.goal, gb);
  if (!entry) return out;
  auto bindings = world.kb.solve(entry->where, gb);
  if (bindings.empty()) return out;
  out.found = true;

  std::vector<std::vector<Term>> chains;
  std::vector<std::size_t> scores;
  for (const auto& b : bindings) {
    std::vector<Term> chain;
    for (const auto& s : entry->steps) {
      Term step = substitute(s, b);
      if (!is_noop(step)) chain.push_back(std::move(step));
    }
    auto score = static_cast<std::size_t>(std::count_if(
        chain.begin(), chain.end(), [&](const Term& t) { return plan.has_step(t); }));
    chains.push_back(std::move(chain));
    scores.push_back(score);
  }
  const std::size_t best = *std::max_element(scores.begin(), scores.end());
  for (std::size_t i = 0; i < bindings.size(); ++i) {
    if (scores[i] != best) continue;
    out.candidates.push_back(bindings[i]);
    out.candidate_steps.push_back(chains[i]);
  }

  std::vector<std::string> vars;
  for (const auto& s : entry->steps) s.collect_variables(vars);
  // Only object selections are choices; locations follow from the object.
  auto selects_object = [&](const std::string& v) {
    return std::any_of(entry->where.begin(), entry->where.end(), [&](const Term& w) {
      return w.head() == ":ISA" && w.size() == 3 && w[1].is_variable() && w[1].text() == v;
    });
  };
  Bindings common;
  for (const auto& v : vars) {
    if (common.count(v) ||
        std::any_of(out.choice_points.begin(), out.choice_points.end(),
                    [&](const ChoicePoint& cp) { return cp.variable == v; }))
      continue;
    std::set<Term> values;
    for (const auto& c : out.candidates)
      if (auto it = c.find(v); it != c.end()) values.insert(it->second);
    if (values.size() > 1 && selects_object(v))
      out.choice_points.push_back({v, std::vector<Term>(values.begin(), values.end())});
    else if (values.size() == 1)
      common[v] = *values.begin();
  }

  if (out.choice_points.empty()) {
    for (const auto& step : out.candidate_steps.front())
      if (!plan.has_step(step)) out.augmentations.push_back(step);
  } else {
    for (const auto& s : entry->steps) {
      bool everywhere_done = std::all_of(out.candidates.begin(), out.candidates.end(),
                                         [&](const Bindings& b) {
                                           Term g = substitute(s, b);
                                           return is_noop(g) || plan.has_step(g);
                                         });
      if (!everywhere_done) out.augmentations.push_back(substitute(s, common));
    }
  }
  return out;
}

Evaluation evaluate_plan(const DomainPlan& plan, const WorldKB& kb) {
  Evaluation ev;
  if (!plan.goal) {
    ev.problems.push_back(Term::parse("(NO-GOAL)"));
    return ev;
  }
  for (const auto& cp : plan.choice_points)
    ev.problems.push_back(Term::list({Term::symbol("UNRESOLVED-CHOICE"), Term::variable(cp.variable)}));
  for (const auto& s : plan.steps)
    if (!s.action.is_ground())
      ev.problems.push_back(Term::list({Term::symbol("UNRESOLVED-STEP"), s.action}));
  if (!ev.problems.empty()) return ev;

  auto sim = simulate(plan.actions(), kb);
  for (const auto& st : sim.steps)
    if (!st.ok) ev.problems.push_back(Term::list({Term::symbol("PRECONDITION-FAILED"), st.action}));
  if (!goal_achieved(*plan.goal, sim.final)) {
    ev.problems.push_back(Term::list({Term::symbol("GOAL-UNACHIEVED"), *plan.goal}));
    const Term& goal = *plan.goal;
    if (goal.head() == "MOVE-COMMODITY") {
      bool loaded = std::any_of(sim.seen.begin(), sim.seen.end(), [&](const Term& f) {
        return f.head() == ":IN" && f.size() == 3 && f[1] == goal[1];
      });
      if (!loaded) ev.problems.push_back(Term::list({Term::symbol("NEVER-LOADED"), goal[1]}));
    }
  }
  ev.ok = ev.problems.empty();
  return ev;
}

ExecutionReport execute_plan(const DomainPlan& plan, WorldKB& kb) {
  ExecutionReport r;
  if (!plan.fully_shared()) {
    r.reason = "plan is not fully shared";
    return r;
  }
  auto ev = evaluate_plan(plan, kb);
  if (!ev.ok) {
    r.reason = "plan does not evaluate: " + ev.problems.front().str();
    return r;
  }
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    auto reason = apply_step(plan.steps[i].action, kb);
    r.steps.push_back({plan.steps[i].action, reason.empty(), reason});
    if (!reason.empty()) {
      r.failed_at = i;
      r.reason = reason;
      return r;
    }
  }
  r.success = true;
  return r;
}

bool helpful(const Term& content, const DomainPlan& plan, const World& world) {
  if (is_goal_action(content)) {
    Bindings b;
    return find_entry(world, content, b) != nullptr;
  }
  std::vector<const ElaborationEntry*> entries;
  std::vector<Bindings> seeds;
  if (plan.goal) {
    Bindings b;
    if (const auto* e = find_entry(world, *plan.goal, b)) {
      entries.push_back(e);
      seeds.push_back(b);
    }
  } else {
    for (const auto& e : world.table) {
      entries.push_back(&e);
      seeds.emplace_back();
    }
  }
  const bool condition = content.head().starts_with(":");
  for (std::size_t k = 0; k < entries.size(); ++k) {
    for (const auto& b : world.kb.solve(entries[k]->where, seeds[k])) {
      std::vector<Term> chain;
      for (const auto& s : entries[k]->steps) {
        Term step = substitute(s, b);
        if (!is_noop(step)) chain.push_back(step);
      }
      if (!condition) {
        Bindings m;
        for (const auto& step : chain)
          if (step.is_ground() && match(content, step, m)) return true;
        continue;
      }
      auto sim = simulate(chain, world.kb);
      for (const auto& f : sim.seen)
        if (generalizes(content, f, world.kb)) return true;
    }
  }
  return false;
}

}  // namespace discourse
