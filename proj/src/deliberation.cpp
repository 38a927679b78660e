#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "actor_internal.hpp"
#include "discourse/errors.hpp"

namespace discourse {

namespace {

template <class E, std::size_t N>
E parse_token(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s,
              const char* field) {
  for (const auto& [e, name] : table) {
    if (name.size() != s.size()) continue;
    if (std::equal(name.begin(), name.end(), s.begin(), [](char a, char b) {
          return std::toupper(static_cast<unsigned char>(a)) ==
                 std::toupper(static_cast<unsigned char>(b));
        }))
      return e;
  }
  throw DecodeError(field, "unknown value '" + std::string(s) + "'");
}

constexpr std::array<std::pair<Strategy, std::string_view>, 3> kStrategies{{
    {Strategy::AutoPerform, "AUTO-PERFORM"},
    {Strategy::AdoptAllAsGoals, "ADOPT-ALL-AS-GOALS"},
    {Strategy::AdoptIfDesired, "ADOPT-IF-DESIRED"},
}};
constexpr std::array<std::pair<Cooperativity, std::string_view>, 3> kCooperativity{{
    {Cooperativity::Cooperative, "COOPERATIVE"},
    {Cooperativity::Guarded, "GUARDED"},
    {Cooperativity::Adversarial, "ADVERSARIAL"},
}};
constexpr std::array<std::pair<ChoiceMode, std::string_view>, 4> kChoiceModes{{
    {ChoiceMode::Canonical, "CANONICAL"},
    {ChoiceMode::Executor, "EXECUTOR"},
    {ChoiceMode::Ask, "ASK"},
    {ChoiceMode::Random, "RANDOM"},
}};

template <class E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
  for (const auto& [k, name] : table)
    if (k == e) return name;
  return "?";
}

bool open_status(ProposalStatus st) {
  return st == ProposalStatus::Proposed || st == ProposalStatus::Acknowledged;
}

bool system_already_tried(const DiscourseState& s, const Term& step) {
  return std::any_of(s.proposals.begin(), s.proposals.end(), [&](const Proposal& p) {
    return p.proposer == Participant::System && p.content == step &&
           (p.status == ProposalStatus::Rejected || p.status == ProposalStatus::Retracted);
  });
}

bool said_before(const DiscourseState& s, ActType type, std::string_view head) {
  return std::any_of(s.acts.begin(), s.acts.end(), [&](const ConversationAct& a) {
    return a.speaker == Participant::System && a.type == type && a.content.head() == head;
  });
}

bool plan_ready(const DiscourseState& s, const World& world) {
  if (!s.plan.goal || !s.plan.fully_shared()) return false;
  const bool open_own = std::any_of(s.proposals.begin(), s.proposals.end(), [](const Proposal& p) {
    return p.proposer == Participant::System && open_status(p.status) && is_domain_action(p.content);
  });
  return !open_own && evaluate_plan(s.plan, world.kb).ok;
}

Intention goal_intention(const DiscourseState& s, ActType type, Term content) {
  Intention in;
  in.source = IntentionSource::Goal;
  in.goal = s.discourse_goals.empty() ? "" : std::string(to_string(s.discourse_goals.front()));
  in.group = detail::batch_group(s, "G");
  in.acts.push_back({type, std::move(content)});
  return in;
}

Term choice_question(const ChoicePoint& cp) {
  std::vector<Term> opts{Term::symbol("OPTIONS")};
  opts.insert(opts.end(), cp.options.begin(), cp.options.end());
  return Term::list({Term::symbol("WHICH"), Term::variable(cp.variable), Term::list(std::move(opts))});
}

}  // namespace

std::string_view to_string(Strategy s) { return name_of(kStrategies, s); }
std::string_view to_string(Cooperativity c) { return name_of(kCooperativity, c); }
std::string_view to_string(ChoiceMode m) { return name_of(kChoiceModes, m); }

nlohmann::json Policy::to_json() const {
  return {{"strategy", to_string(strategy)},
          {"cooperativity", to_string(cooperativity)},
          {"pause_threshold", pause_threshold},
          {"allow_violation", allow_violation},
          {"choice", to_string(choice)},
          {"seed", seed}};
}

Policy Policy::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DecodeError("policy", "expected an object");
  Policy p;
  for (const auto& [key, v] : j.items()) {
    if (key == "strategy")
      p.strategy = parse_token(kStrategies, v.get<std::string>(), "strategy");
    else if (key == "cooperativity")
      p.cooperativity = parse_token(kCooperativity, v.get<std::string>(), "cooperativity");
    else if (key == "pause_threshold")
      p.pause_threshold = v.get<std::int64_t>();
    else if (key == "allow_violation")
      p.allow_violation = v.get<bool>();
    else if (key == "choice")
      p.choice = parse_token(kChoiceModes, v.get<std::string>(), "choice");
    else if (key == "seed")
      p.seed = v.get<std::uint64_t>();
    else
      throw DecodeError(key, "unknown policy key");
  }
  if (p.pause_threshold < 1) throw DecodeError("pause_threshold", "must be at least 1");
  return p;
}

Policy load_policy(std::string_view name) {
  Policy p;
  if (name.empty() || name == "cooperative") return p;
  if (name == "guarded") {
    p.cooperativity = Cooperativity::Guarded;
    return p;
  }
  if (name == "adversarial") {
    p.cooperativity = Cooperativity::Adversarial;
    return p;
  }
  if (name == "permissive") {
    p.cooperativity = Cooperativity::Adversarial;
    p.strategy = Strategy::AdoptIfDesired;
    p.allow_violation = true;
    return p;
  }
  std::ifstream in{std::string(name)};
  if (!in) throw Error("unknown policy '" + std::string(name) + "'");
  try {
    return Policy::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError("policy", e.what());
  }
}

namespace detail {

std::string batch_group(const DiscourseState& s, std::string_view tag) {
  return std::string(tag) + std::to_string(s.ids.last());
}

bool question_like(ActType t) {
  switch (t) {
    case ActType::Ynq:
    case ActType::Whq:
    case ActType::Check:
    case ActType::Request:
    case ActType::RequestAck:
    case ActType::Repair:
      return true;
    default:
      return false;
  }
}

std::vector<std::string> stale_own_proposals(const DiscourseState& s) {
  std::vector<std::string> out;
  for (const auto& o : s.own_unacked) {
    if (o.missed_turns < 1 || o.ack_requested) continue;
    const ConversationAct* a = s.find_act(o.id);
    if (a && (a->type == ActType::Suggest || a->type == ActType::Request)) out.push_back(o.id);
  }
  return out;
}

bool grounding_applicable(const DiscourseState& s) {
  return !s.unacked_acts.empty() || !stale_own_proposals(s).empty();
}

std::vector<NegotiationMove> plan_negotiation(const DiscourseState& s, const Policy& policy,
                                              const World& world) {
  std::vector<NegotiationMove> moves;
  std::vector<Term> to_confirm;
  std::vector<std::string> confirm_ids;
  for (const auto& p : s.proposals) {
    if (p.response_pending) continue;
    if (p.proposer == Participant::User) {
      // Requests are answered through their ADDRESS obligation.
      if (p.via != ActType::Suggest || p.status != ProposalStatus::Acknowledged) continue;
      const bool ok = policy.cooperativity != Cooperativity::Adversarial &&
                      helpful(p.content, s.plan, world);
      moves.push_back({ok ? ActType::Accept : ActType::Reject, Term::act_ref(p.id), {p.id}});
    } else if (p.status == ProposalStatus::Acknowledged && !p.acceptance_requested) {
      to_confirm.push_back(Term::act_ref(p.id));
      confirm_ids.push_back(p.id);
    } else if (p.status == ProposalStatus::Rejected) {
      moves.push_back({ActType::Inform,
                       Term::list({Term::symbol("RETRACT"), Term::act_ref(p.id)}),
                       {p.id}});
    }
  }
  if (!to_confirm.empty()) {
    to_confirm.insert(to_confirm.begin(), Term::symbol("ACCEPT"));
    moves.push_back({ActType::Request, Term::list(std::move(to_confirm)), confirm_ids});
  }
  return moves;
}

DomainPlan working_plan(const DiscourseState& s) {
  DomainPlan wp = s.plan;
  for (const auto& p : s.proposals)
    if (p.proposer == Participant::System && open_status(p.status) &&
        is_domain_action(p.content) && !wp.has_step(p.content))
      wp.steps.push_back({p.content, false, p.id});
  return wp;
}

GoalPlan plan_goals(const DiscourseState& s, const Policy& policy, const World& world) {
  (void)policy;
  GoalPlan gp;
  if (s.discourse_goals.empty()) return gp;
  switch (s.discourse_goals.front()) {
    case DiscourseGoal::GetGoal: {
      const bool goal_open = std::any_of(s.proposals.begin(), s.proposals.end(), [](const auto& p) {
        return is_goal_action(p.content) && open_status(p.status);
      });
      if (s.initiative == Initiative::System && !s.goal_asked && !goal_open)
        gp.kind = GoalPlan::Kind::AskGoal;
      return gp;
    }
    case DiscourseGoal::BuildPlan: {
      const bool ready = plan_ready(s, world);
      if (ready && s.user_assented) {
        gp.kind = GoalPlan::Kind::ConsumeBuild;
        return gp;
      }
      if (s.initiative != Initiative::System || !s.plan.goal) return gp;
      if (ready) {
        if (!s.eval_offered) gp.kind = GoalPlan::Kind::Eval;
        return gp;
      }
      if (s.open_choice) return gp;
      const DomainPlan wp = working_plan(s);
      const Elaboration e = elaborate_plan(wp, world);
      if (!e.found) {
        if (!said_before(s, ActType::Inform, "NO-ELABORATION"))
          gp.kind = GoalPlan::Kind::NoElaboration;
        return gp;
      }
      // Keep candidates consistent with choices already made.
      std::vector<std::size_t> keep;
      for (std::size_t i = 0; i < e.candidates.size(); ++i) {
        const bool agrees = std::all_of(s.choices.begin(), s.choices.end(), [&](const auto& kv) {
          auto it = e.candidates[i].find(kv.first);
          return it == e.candidates[i].end() || it->second == kv.second;
        });
        if (agrees) keep.push_back(i);
      }
      if (keep.empty()) return gp;
      for (const auto& cp : e.choice_points) {
        if (s.choices.count(cp.variable)) continue;
        gp.choices.push_back(cp);
      }
      if (!gp.choices.empty()) {
        gp.kind = GoalPlan::Kind::ResolveChoices;
        return gp;
      }
      for (const auto& step : e.candidate_steps[keep.front()])
        if (!wp.has_step(step) && !system_already_tried(s, step)) gp.steps.push_back(step);
      if (!gp.steps.empty()) gp.kind = GoalPlan::Kind::Suggest;
      return gp;
    }
    case DiscourseGoal::ExecutePlan:
      if (s.execution_failed) return gp;
      if (s.user_assented && plan_ready(s, world)) gp.kind = GoalPlan::Kind::Execute;
      return gp;
  }
  return gp;
}

bool has_agenda(const DiscourseState& s, const Policy& policy, const World& world) {
  if (!s.intended_acts.empty() || !s.unacked_acts.empty()) return true;
  // Once the system takes the turn, every ungrounded own proposal turns stale.
  for (const auto& o : s.own_unacked) {
    const ConversationAct* a = s.find_act(o.id);
    if (!o.ack_requested && a && (a->type == ActType::Suggest || a->type == ActType::Request))
      return true;
  }
  return !plan_negotiation(s, policy, world).empty() ||
         plan_goals(s, policy, world).kind != GoalPlan::Kind::None;
}

}  // namespace detail

std::vector<Intention> handle_grounding(DiscourseState& s) {
  std::vector<Intention> out;
  if (!s.unacked_acts.empty()) {
    const auto ids = s.unacked_acts;
    acknowledge(s, ids);
    for (const auto& in : s.intended_acts)
      if (in.source == IntentionSource::Grounding && !in.acts.empty() &&
          in.acts.front().type == ActType::Ack)
        out.push_back(in);
  }
  const auto stale = detail::stale_own_proposals(s);
  if (!stale.empty()) {
    std::vector<Term> refs;
    for (const auto& id : stale) {
      refs.push_back(Term::act_ref(id));
      for (auto& o : s.own_unacked)
        if (o.id == id) o.ack_requested = true;
    }
    Intention in;
    in.source = IntentionSource::Grounding;
    in.group = detail::batch_group(s, "R");
    in.acts.push_back({ActType::RequestAck, Term::list(std::move(refs))});
    in.about = stale;
    out.push_back(in);
    s.queue_intention(std::move(in));
  }
  return out;
}

std::vector<Intention> negotiate(DiscourseState& s, ActorEnv& env) {
  std::vector<Intention> out;
  const auto moves = detail::plan_negotiation(s, env.policy, env.world);
  const std::string group = detail::batch_group(s, "N");
  for (const auto& m : moves) {
    Intention in;
    in.source = IntentionSource::Negotiation;
    in.group = group;
    in.about = m.about;
    in.acts.push_back({m.type, m.content});
    for (const auto& id : m.about)
      if (Proposal* p = s.find_proposal(id)) {
        if (m.type == ActType::Request)
          p->acceptance_requested = true;
        else
          p->response_pending = true;
      }
    s.log({{"type", "negotiate"}, {"act", in.acts.front().render()}});
    out.push_back(in);
    s.queue_intention(std::move(in));
  }
  return out;
}

GoalOutcome pursue_goals(DiscourseState& s, ActorEnv& env) {
  using Kind = detail::GoalPlan::Kind;
  GoalOutcome out;
  auto gp = detail::plan_goals(s, env.policy, env.world);
  auto queue = [&](Intention in) {
    out.intentions.push_back(in);
    s.queue_intention(std::move(in));
  };

  if (gp.kind == Kind::ResolveChoices) {
    for (const auto& cp : gp.choices) {
      if (env.policy.choice == ChoiceMode::Ask) {
        s.open_choice = cp;
        queue(goal_intention(s, ActType::Whq, choice_question(cp)));
        return out;
      }
      Term chosen = cp.options.front();
      if (env.policy.choice == ChoiceMode::Executor) {
        for (const auto& pref : env.world.preferences)
          if (std::find(cp.options.begin(), cp.options.end(), pref) != cp.options.end()) {
            chosen = pref;
            break;
          }
      } else if (env.policy.choice == ChoiceMode::Random) {
        std::uniform_int_distribution<std::size_t> pick(0, cp.options.size() - 1);
        chosen = cp.options[pick(env.rng)];
      }
      s.choices[cp.variable] = chosen;
      std::vector<std::string> opts;
      for (const auto& o : cp.options) opts.push_back(o.str());
      s.log({{"type", "choice"},
             {"variable", cp.variable},
             {"options", opts},
             {"chosen", chosen.str()},
             {"mode", to_string(env.policy.choice)}});
    }
    gp = detail::plan_goals(s, env.policy, env.world);
  }

  switch (gp.kind) {
    case Kind::None:
    case Kind::ResolveChoices:
      break;
    case Kind::AskGoal:
      s.goal_asked = true;
      queue(goal_intention(s, ActType::Whq, Term::parse("(GOAL ?G)")));
      break;
    case Kind::Suggest: {
      const std::string group = detail::batch_group(s, "G");
      for (const auto& step : gp.steps) {
        Intention in = goal_intention(s, ActType::Suggest, step);
        in.group = group;
        queue(std::move(in));
      }
      break;
    }
    case Kind::Eval:
      s.eval_offered = true;
      queue(goal_intention(s, ActType::Eval, Term::parse("(OK (PLAN))")));
      break;
    case Kind::ConsumeBuild:
      s.consume_goal(DiscourseGoal::BuildPlan);
      break;
    case Kind::NoElaboration:
      queue(goal_intention(s, ActType::Inform,
                           Term::list({Term::symbol("NO-ELABORATION"), *s.plan.goal})));
      break;
    case Kind::Execute: {
      auto report = execute_plan(s.plan, env.world.kb);
      nlohmann::json steps = nlohmann::json::array();
      for (const auto& st : report.steps)
        steps.push_back({{"action", st.action.str()}, {"ok", st.ok}, {"reason", st.reason}});
      s.log({{"type", "execution"}, {"success", report.success}, {"steps", steps},
             {"reason", report.reason}});
      if (report.success) {
        for (auto id : s.obligations.commitments())
          if (s.obligations.get(id).state == ObState::Pending)
            complete_commitment(s.obligations, id);
        s.consume_goal(DiscourseGoal::ExecutePlan);
      } else {
        s.execution_failed = true;
        Term where = report.failed_at ? report.steps.at(*report.failed_at).action
                                      : Term::symbol("PLAN");
        queue(goal_intention(s, ActType::Inform,
                             Term::list({Term::symbol("EXECUTION-FAILED"), where})));
      }
      out.execution = std::move(report);
      break;
    }
  }
  return out;
}

void abandon(DiscourseState& s, const Policy& policy, ObligationId id) {
  const Obligation& ob = s.obligations.get(id);
  if (!policy.allow_violation)
    throw PolicyError("policy forbids violating " + ob.render());
  if (ob.state != ObState::Pending)
    throw TransitionError("cannot abandon " + ob.render() + " in state " +
                          std::string(to_string(ob.state)));
  mark_violated(s.obligations, id);
  s.log({{"type", "violation"}, {"obligation", ob.render()}, {"reason", "abandoned"}});
}

}  // namespace discourse
