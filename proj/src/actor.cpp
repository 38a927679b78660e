#include "discourse/actor.hpp"

#include <algorithm>
#include <cstdio>

#include "actor_internal.hpp"
#include "discourse/errors.hpp"

namespace discourse {

namespace {

std::uint32_t seq_of(std::string_view id) {
  auto p = parse_act_id(id);
  return p ? p->second : 0;
}

bool pure_ack(const Intention& in) {
  return in.source == IntentionSource::Grounding &&
         std::all_of(in.acts.begin(), in.acts.end(),
                     [](const IntendedAct& a) { return a.type == ActType::Ack; });
}

void append_refs(std::vector<Term>& refs, const Term& content) {
  if (content.is_act_ref()) refs.push_back(content);
  if (content.is_list())
    for (const auto& t : content.items())
      if (t.is_act_ref()) refs.push_back(t);
}

Term sorted_ref_list(std::vector<Term> refs) {
  std::stable_sort(refs.begin(), refs.end(), [](const Term& a, const Term& b) {
    return seq_of(a.text()) < seq_of(b.text());
  });
  refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
  if (refs.size() == 1) return refs.front();
  return Term::list(std::move(refs));
}

// Replays shared steps and open step proposals in arrival order; the request
// contradicts the plan when its own step cannot apply.
bool contradicts(const DiscourseState& s, const World& world, const std::string& req_id) {
  std::vector<std::pair<std::uint32_t, Term>> steps;
  for (const auto& st : s.plan.steps)
    if (st.shared) steps.emplace_back(seq_of(st.proposal), st.action);
  for (const auto& p : s.proposals)
    if (p.status == ProposalStatus::Acknowledged && is_domain_action(p.content) &&
        !s.plan.has_step(p.content))
      steps.emplace_back(seq_of(p.id), p.content);
  std::stable_sort(steps.begin(), steps.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Term> actions;
  std::size_t mine = steps.size();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].first == seq_of(req_id)) mine = i;
    actions.push_back(steps[i].second);
  }
  if (mine == steps.size()) return false;
  return !simulate(actions, world.kb, true).steps.at(mine).ok;
}

std::vector<IntendedAct> respond_to_request(const DiscourseState& s, const ActorEnv& env,
                                            const Obligation& ob) {
  const Term& req = ob.content;
  const Term& rc = ob.request_content;
  const bool adversarial = env.policy.cooperativity == Cooperativity::Adversarial;
  const IntendedAct reject{ActType::Reject, req};
  const IntendedAct accept{ActType::Accept, req};

  if (adversarial) return {reject};
  if (rc.head() == "EVAL") {
    const auto ev = evaluate_plan(s.plan.shared_view(), env.world.kb);
    if (ev.ok) return {{ActType::Eval, Term::parse("(OK (PLAN))")}};
    std::vector<Term> items{Term::symbol("PROBLEMS")};
    items.insert(items.end(), ev.problems.begin(), ev.problems.end());
    return {{ActType::Eval, Term::list(std::move(items))}};
  }
  if (is_domain_action(rc) || is_goal_action(rc)) {
    const auto tc = type_check(rc, env.world.kb);
    if (!tc.ok) return {reject};
    if (!tc.unbound.empty())
      return {{ActType::Whq, Term::list({Term::symbol("CLARIFY"), req,
                                         Term::variable(tc.unbound.front())})}};
    if (is_goal_action(rc)) return {helpful(rc, s.plan, env.world) ? accept : reject};
    if (contradicts(s, env.world, req.text())) return {reject};
    if (env.policy.cooperativity == Cooperativity::Guarded && !helpful(rc, s.plan, env.world))
      return {reject};
    return {accept};
  }
  if (env.policy.cooperativity == Cooperativity::Guarded && is_proposal_content(rc) &&
      !helpful(rc, s.plan, env.world))
    return {reject};
  return {accept};
}

std::vector<IntendedAct> answer_question(const ActorEnv& env, const Obligation& ob) {
  const Term& p = ob.content;
  auto inability = [&](const char* why) {
    return std::vector<IntendedAct>{
        {ActType::InformInability, Term::list({Term::symbol(why), p})}};
  };
  if (env.policy.cooperativity == Cooperativity::Adversarial) return inability("WONT-SAY");
  if (ob.type == ObType::InformRef) {
    if (auto fact = env.world.kb.resolve(p)) return {{ActType::InformRef, *fact}};
    return inability("DONT-KNOW");
  }
  if (!p.is_ground()) return inability("DONT-KNOW");
  switch (kb_query(env.world.kb, p)) {
    case Answer::Yes: return {{ActType::InformIf, Term::list({Term::symbol("YES"), p})}};
    case Answer::No: return {{ActType::InformIf, Term::list({Term::symbol("NO"), p})}};
    case Answer::Unknown: break;
  }
  return inability("DONT-KNOW");
}

// Undoes the planning marks of an intention that was not uttered.
void revert(DiscourseState& s, const Intention& in) {
  if (in.obligation) {
    reinstate(s.obligations, *in.obligation);
    s.log({{"type", "reinstate"}, {"obligation", s.obligations.get(*in.obligation).render()}});
    for (const auto& a : in.acts)
      if (a.content.is_act_ref())
        if (Proposal* p = s.find_proposal(a.content.text())) p->response_pending = false;
    return;
  }
  for (const auto& id : in.about) {
    if (Proposal* p = s.find_proposal(id)) {
      p->response_pending = false;
      p->acceptance_requested = false;
    }
    for (auto& o : s.own_unacked)
      if (o.id == id) o.ack_requested = false;
  }
  for (const auto& a : in.acts) {
    if (a.type == ActType::Eval && in.source == IntentionSource::Goal) s.eval_offered = false;
    if (a.type == ActType::Whq && a.content.head() == "GOAL") s.goal_asked = false;
    if (a.type == ActType::Whq && a.content.head() == "WHICH") s.open_choice.reset();
  }
  s.log({{"type", "drop"}, {"act", in.acts.empty() ? "" : in.acts.front().render()}});
}

std::string capitalize_list(const std::vector<Term>& xs, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i].str();
  }
  return out;
}

}  // namespace

std::string_view to_string(DecisionKind k) {
  switch (k) {
    case DecisionKind::AddressObligations: return "ADDRESS-OBLIGATIONS";
    case DecisionKind::Generate: return "GENERATE";
    case DecisionKind::HandleGrounding: return "HANDLE-GROUNDING";
    case DecisionKind::Negotiate: return "NEGOTIATE";
    case DecisionKind::PursueGoals: return "PURSUE-GOALS";
    case DecisionKind::ReleaseTurn: return "RELEASE-TURN";
    case DecisionKind::EndConversation: return "END-CONVERSATION";
    case DecisionKind::TakeTurn: return "TAKE-TURN";
    case DecisionKind::Wait: return "WAIT";
  }
  return "?";
}

Tier tier_of(DecisionKind k) {
  switch (k) {
    case DecisionKind::AddressObligations: return Tier::Obligations;
    case DecisionKind::Wait: return Tier::DontInterrupt;
    case DecisionKind::Generate: return Tier::IntendedActs;
    case DecisionKind::HandleGrounding: return Tier::Grounding;
    case DecisionKind::Negotiate: return Tier::Negotiation;
    case DecisionKind::PursueGoals: return Tier::Goals;
    default: return Tier::TurnManagement;
  }
}

std::string state_digest(const DiscourseState& s) {
  const std::string text = snapshot(s).to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

DecisionKind select_decision(const DiscourseState& s, const Policy& policy, const World& world) {
  using namespace detail;
  if (s.finished) return DecisionKind::Wait;
  if (!s.obligations.stack(Participant::System).empty()) return DecisionKind::AddressObligations;

  if (s.turn_holder == TurnHolder::System) {
    if (!s.intended_acts.empty()) {
      const bool only_acks = std::all_of(s.intended_acts.begin(), s.intended_acts.end(), pure_ack);
      if (!only_acks) return DecisionKind::Generate;
      // A lone acknowledgement waits for something to travel with.
      if (grounding_applicable(s)) return DecisionKind::HandleGrounding;
      if (!plan_negotiation(s, policy, world).empty()) return DecisionKind::Negotiate;
      if (plan_goals(s, policy, world).kind != GoalPlan::Kind::None)
        return DecisionKind::PursueGoals;
      return DecisionKind::Generate;
    }
    if (grounding_applicable(s)) return DecisionKind::HandleGrounding;
    if (!plan_negotiation(s, policy, world).empty()) return DecisionKind::Negotiate;
    if (plan_goals(s, policy, world).kind != GoalPlan::Kind::None) return DecisionKind::PursueGoals;
    if (s.discourse_goals.empty() && s.end_offer == EndOffer::Declined)
      return DecisionKind::EndConversation;
    return DecisionKind::ReleaseTurn;
  }

  const bool repair = std::any_of(s.intended_acts.begin(), s.intended_acts.end(), [](const auto& in) {
    return std::any_of(in.acts.begin(), in.acts.end(),
                       [](const IntendedAct& a) { return a.type == ActType::Repair; });
  });
  if (repair) return DecisionKind::Generate;

  if (s.turn_holder == TurnHolder::Nobody) {
    const bool idle = !s.released_at || s.tick > *s.released_at;
    if (idle && (s.end_offer == EndOffer::Offered || has_agenda(s, policy, world)))
      return DecisionKind::TakeTurn;
    return DecisionKind::Wait;
  }
  if (s.tick - s.last_user_activity >= policy.pause_threshold) return DecisionKind::TakeTurn;
  return DecisionKind::Wait;
}

std::vector<Intention> address_obligation(DiscourseState& s, ActorEnv& env, ObligationId id) {
  const Obligation ob = s.obligations.get(id);
  const Policy& policy = env.policy;
  if (ob.type == ObType::Achieve)
    throw PreconditionError("ACHIEVE commitments are settled by the executor");

  if (policy.strategy == Strategy::AdoptIfDesired &&
      policy.cooperativity == Cooperativity::Adversarial && policy.allow_violation) {
    abandon(s, policy, id);
    return {};
  }

  std::vector<IntendedAct> acts;
  switch (ob.type) {
    case ObType::Address: acts = respond_to_request(s, env, ob); break;
    case ObType::AnswerIf:
    case ObType::CheckIf:
    case ObType::InformRef: acts = answer_question(env, ob); break;
    case ObType::Repair: acts = {{ActType::Repair, ob.content}}; break;
    case ObType::Achieve: break;
  }

  const ConversationAct* src = s.find_act(ob.source_act);
  Intention in = form_intention(s.obligations, id, acts, src ? src->group : "");
  if (policy.strategy == Strategy::AdoptAllAsGoals) {
    in.goal = ob.render();
    s.log({{"type", "adopt"}, {"obligation", ob.render()}});
  }
  for (const auto& a : acts)
    if (a.content.is_act_ref())
      if (Proposal* p = s.find_proposal(a.content.text())) p->response_pending = true;
  s.log({{"type", "address"}, {"obligation", ob.render()}, {"intends", acts.front().render()}});
  s.queue_intention(in);
  return {in};
}

std::string realize(const ConversationAct& act, bool with_others) {
  const Term& c = act.content;
  const auto h = c.head();
  switch (act.type) {
    case ActType::Ack: return with_others ? "" : "Okay.";
    case ActType::Accept: return "Okay.";
    case ActType::Reject: return "No, that won't work.";
    case ActType::InformIf: return h == "YES" ? "Right." : "No, that's not right.";
    case ActType::InformInability:
      return h == "WONT-SAY" ? "I'd rather not say." : "I don't know.";
    case ActType::InformRef: return "That would be " + c.str() + ".";
    case ActType::Eval:
      return h == "OK" ? "That's no problem." : "There's a problem with that plan.";
    case ActType::Suggest: return "How about " + c.str() + "?";
    case ActType::Request:
      return h == "ACCEPT" ? "Is that okay with you?" : "Could you do " + c.str() + "?";
    case ActType::RequestAck: return "Did you get that?";
    case ActType::Repair: return "Sorry, I didn't catch that.";
    case ActType::Promise: return "I'll do that.";
    case ActType::Whq:
      if (h == "CLARIFY") return "Which one do you mean?";
      if (h == "GOAL") return "What would you like to do?";
      if (h == "WHICH" && c.size() == 3)
        return "Which should we use: " +
               capitalize_list({c[2].items().begin() + 1, c[2].items().end()}, " or ") + "?";
      return "What about " + c.str() + "?";
    case ActType::Ynq:
    case ActType::Check: return c.str() + "?";
    case ActType::Inform:
      if (h == "NO-ELABORATION") return "I don't know how to do that.";
      if (h == "EXECUTION-FAILED") return "The plan could not be carried out.";
      if (h == "RETRACT") return "Never mind that suggestion.";
      return c.str() + ".";
    default: break;
  }
  throw GenerationError("no template for " + act.render());
}

std::vector<UtteranceEvent> generate(DiscourseState& s, ActorEnv& env) {
  (void)env;
  if (s.intended_acts.empty()) throw PreconditionError("nothing intended");

  std::vector<Intention> queue = std::move(s.intended_acts);
  s.intended_acts.clear();
  // Responses all go out together; goal-driven acts only ride along with
  // their own batch, and only when nothing else is owed.
  const bool responding = std::any_of(queue.begin(), queue.end(), [](const auto& in) {
    return !pure_ack(in) && in.source != IntentionSource::Goal;
  });
  auto first = std::find_if(queue.begin(), queue.end(), [](const auto& in) { return !pure_ack(in); });
  const std::string group = first != queue.end() ? first->group : "";

  std::vector<Term> ack_refs;
  std::vector<Intention> chosen;
  for (auto& in : queue) {
    if (pure_ack(in)) {
      for (const auto& a : in.acts) append_refs(ack_refs, a.content);
    } else if (in.source != IntentionSource::Goal || (!responding && in.group == group)) {
      chosen.push_back(std::move(in));
    } else {
      revert(s, in);
    }
  }

  std::vector<IntendedAct> flat;
  if (!ack_refs.empty()) flat.push_back({ActType::Ack, sorted_ref_list(ack_refs)});
  for (const auto& in : chosen)
    for (const auto& a : in.acts) {
      auto merged = std::find_if(flat.begin(), flat.end(), [&](const IntendedAct& x) {
        return x.type == a.type && (a.type == ActType::Accept || a.type == ActType::Reject);
      });
      if (merged != flat.end()) {
        std::vector<Term> refs;
        append_refs(refs, merged->content);
        append_refs(refs, a.content);
        merged->content = sorted_ref_list(refs);
      } else {
        flat.push_back(a);
      }
    }

  UtteranceEvent ev;
  ev.utt_id = "S" + std::to_string(++s.system_utterances);
  ev.speaker = Participant::System;
  ev.tick = s.tick;
  bool asks = false;
  for (const auto& a : flat) {
    ConversationAct act;
    act.seq = s.ids.next();
    act.type = a.type;
    act.speaker = Participant::System;
    act.content = a.content;
    act.group = group.empty() ? ev.utt_id : group;
    asks = asks || detail::question_like(a.type);
    ev.acts.push_back(std::move(act));
  }
  ev.turn_effect =
      s.initiative == Initiative::User || asks ? TurnEffect::Release : TurnEffect::Keep;
  for (const auto& act : ev.acts) {
    auto piece = realize(act, ev.acts.size() > 1);
    if (piece.empty()) continue;
    if (!ev.text.empty()) ev.text += ' ';
    ev.text += piece;
  }

  apply_event(s, ev);

  for (const auto& in : chosen) {
    if (!in.obligation) continue;
    const Obligation& ob = s.obligations.get(*in.obligation);
    auto by = std::find_if(ev.acts.begin(), ev.acts.end(),
                           [&](const ConversationAct& a) { return satisfies(ob, a); });
    if (by == ev.acts.end())
      throw MismatchError("utterance " + ev.utt_id + " does not satisfy " + ob.render());
    discharge(s.obligations, *in.obligation, *by);
  }
  for (const auto& act : ev.acts)
    if (act.type == ActType::Eval && act.content.head() == "OK")
      s.consume_goal(DiscourseGoal::BuildPlan);

  s.log({{"type", "utterance"}, {"utt", ev.utt_id}, {"text", ev.text}});
  return {ev};
}

ActorDecision actor_step(DiscourseState& s, ActorEnv& env) {
  ActorDecision d;
  d.kind = select_decision(s, env.policy, env.world);
  const std::string digest = state_digest(s);

  switch (d.kind) {
    case DecisionKind::AddressObligations: {
      const ObligationId top = s.obligations.stack(Participant::System).top();
      const Obligation& ob = s.obligations.get(top);
      const bool source_unacked = std::find(s.unacked_acts.begin(), s.unacked_acts.end(),
                                            ob.source_act) != s.unacked_acts.end();
      if (source_unacked) {
        // Ground the question before answering it.
        d.note = "acknowledge " + ob.source_act;
        const auto ids = s.unacked_acts;
        acknowledge(s, ids);
      } else {
        d.note = ob.render();
        address_obligation(s, env, top);
      }
      break;
    }
    case DecisionKind::Generate:
      d.utterances = generate(s, env);
      d.note = d.utterances.front().utt_id;
      break;
    case DecisionKind::HandleGrounding:
      handle_grounding(s);
      break;
    case DecisionKind::Negotiate:
      negotiate(s, env);
      break;
    case DecisionKind::PursueGoals: {
      auto out = pursue_goals(s, env);
      if (out.execution) d.note = out.execution->success ? "executed" : "execution failed";
      break;
    }
    case DecisionKind::ReleaseTurn:
      if (s.discourse_goals.empty() && s.end_offer == EndOffer::None) {
        s.end_offer = EndOffer::Offered;
        d.note = "offer to end";
      }
      set_turn(s, TurnHolder::Nobody, "release");
      break;
    case DecisionKind::EndConversation:
      s.finished = true;
      break;
    case DecisionKind::TakeTurn:
      if (s.turn_holder == TurnHolder::User) {
        s.initiative = Initiative::System;
        d.note = "long pause";
      }
      if (s.end_offer == EndOffer::Offered) s.end_offer = EndOffer::Declined;
      for (auto& o : s.own_unacked) ++o.missed_turns;
      s.turn_seized = true;
      set_turn(s, TurnHolder::System, "take");
      break;
    case DecisionKind::Wait:
      break;
  }

  s.log({{"type", "decision"},
         {"decision", to_string(d.kind)},
         {"tier", static_cast<int>(tier_of(d.kind))},
         {"digest", digest},
         {"note", d.note}});
  return d;
}

}  // namespace discourse
