#include "discourse/state.hpp"

#include <algorithm>
#include <sstream>

#include "discourse/errors.hpp"

namespace discourse {

namespace {

std::vector<std::string> json_strings(const nlohmann::json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) throw DecodeError(key, "missing field");
  for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
  return out;
}

std::string join(const std::vector<std::string>& xs, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i];
  }
  return out;
}

// Title casing for the goal line.
std::string_view goal_display(std::string_view token) {
  if (token == "GET-GOAL") return "Get-goal";
  if (token == "BUILD-PLAN") return "Build-Plan";
  if (token == "EXECUTE-PLAN") return "Execute-Plan";
  return token;
}

std::uint32_t seq_of(std::string_view id) {
  auto p = parse_act_id(id);
  return p ? p->second : 0;
}

int source_rank(IntentionSource s) {
  switch (s) {
    case IntentionSource::Obligation: return 0;
    case IntentionSource::Grounding: return 1;
    case IntentionSource::Negotiation: return 2;
    case IntentionSource::Goal: return 3;
  }
  return 4;
}

void erase_id(std::vector<std::string>& xs, const std::string& id) {
  xs.erase(std::remove(xs.begin(), xs.end(), id), xs.end());
}

bool contains_id(const std::vector<std::string>& xs, const std::string& id) {
  return std::find(xs.begin(), xs.end(), id) != xs.end();
}

// Act refs named in a content term, in order.
std::vector<std::string> referenced_ids(const Term& content) {
  std::vector<std::string> out;
  if (content.is_act_ref()) out.push_back(content.text());
  if (content.is_list())
    for (const auto& t : content.items())
      if (t.is_act_ref()) out.push_back(t.text());
  return out;
}

void add_to_plan(DiscourseState& s, const Proposal& p) {
  const Term& c = p.content;
  if (is_goal_action(c)) {
    s.plan.goal = c;
    s.consume_goal(DiscourseGoal::GetGoal);
    return;
  }
  if (!c.head().empty() && c.head().front() == ':') {
    if (std::find(s.plan.conditions.begin(), s.plan.conditions.end(), c) ==
        s.plan.conditions.end())
      s.plan.conditions.push_back(c);
    return;
  }
  for (auto& st : s.plan.steps)
    if (st.action == c) {
      st.shared = true;
      if (st.proposal.empty()) st.proposal = p.id;
      return;
    }
  // Shared steps stay in proposal order, whatever order they were accepted in.
  const auto seq = seq_of(p.id);
  auto at = std::find_if(s.plan.steps.begin(), s.plan.steps.end(), [&](const PlanStep& st) {
    return !st.proposal.empty() && seq_of(st.proposal) > seq;
  });
  s.plan.steps.insert(at, PlanStep{c, true, p.id});
}

void settle_proposal(DiscourseState& s, Proposal& p, bool accept) {
  if (p.status == ProposalStatus::Proposed) s.set_proposal_status(p, ProposalStatus::Acknowledged);
  if (p.status != ProposalStatus::Acknowledged) return;
  s.set_proposal_status(p, accept ? ProposalStatus::Accepted : ProposalStatus::Rejected);
  p.response_pending = false;
  erase_id(s.unaccepted_proposals, p.id);
  if (accept) add_to_plan(s, p);
}

void enter_unaccepted(DiscourseState& s, const std::string& act_id) {
  Proposal* p = s.find_proposal(act_id);
  if (!p || p->status != ProposalStatus::Proposed) return;
  s.set_proposal_status(*p, ProposalStatus::Acknowledged);
  if (!contains_id(s.unaccepted_proposals, p->id)) s.unaccepted_proposals.push_back(p->id);
}

// User acts settle what the user owed.
void observe_user_discharge(DiscourseState& s, const ConversationAct& act) {
  auto& stack = s.obligations.stack(Participant::User);
  const auto entries = stack.entries();
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    const Obligation& ob = s.obligations.get(*it);
    if (ob.state != ObState::Pending || !satisfies(ob, act)) continue;
    stack.remove(*it);
    s.obligations.transition(*it, ObState::IntentionFormed);
    discharge(s.obligations, *it, act);
    break;
  }
}

void process_core(DiscourseState& s, ConversationAct& act) {
  const Participant hearer = other(act.speaker);

  if (act.speaker == Participant::User) {
    if (act.marks.defective)
      act.grounded = Grounding::RepairPending;
    else if (is_response(act.type))
      act.grounded = Grounding::Acknowledged;
    else
      s.unacked_acts.push_back(act.id());
  } else {
    s.own_unacked.push_back({act.id(), 0});
  }

  if ((act.type == ActType::Suggest || act.type == ActType::Request) && !act.marks.defective &&
      is_proposal_content(act.content)) {
    Proposal p;
    p.id = act.id();
    p.content = act.content;
    p.proposer = act.speaker;
    p.via = act.type;
    s.proposals.push_back(std::move(p));
  }

  if (act.type == ActType::Accept || act.type == ActType::Reject) {
    const bool accept = act.type == ActType::Accept;
    for (const auto& id : referenced_ids(act.content)) {
      if (Proposal* p = s.find_proposal(id); p && p->proposer == hearer)
        settle_proposal(s, *p, accept);
      const ConversationAct* target = s.find_act(id);
      if (accept && act.speaker == Participant::User && target &&
          target->speaker == Participant::System && target->type == ActType::Eval)
        s.user_assented = true;
    }
    if (accept && act.speaker == Participant::User && act.content.head() == "PLAN")
      s.user_assented = true;
  }

  if (act.type == ActType::InformRef && act.speaker == Participant::User && s.open_choice &&
      act.content.head() == "WHICH" && act.content.size() >= 2) {
    const auto& opts = s.open_choice->options;
    if (std::find(opts.begin(), opts.end(), act.content[1]) != opts.end()) {
      s.choices[s.open_choice->variable] = act.content[1];
      s.log({{"type", "choice"},
             {"variable", s.open_choice->variable},
             {"chosen", act.content[1].str()},
             {"mode", "ask"}});
      s.open_choice.reset();
    }
  }

  if (act.type == ActType::Inform && act.content.head() == "RETRACT") {
    for (const auto& id : referenced_ids(act.content))
      if (Proposal* p = s.find_proposal(id);
          p && p->proposer == act.speaker && p->status == ProposalStatus::Rejected)
        s.set_proposal_status(*p, ProposalStatus::Retracted);
  }
}

void process_grounding(DiscourseState& s, ConversationAct& act) {
  if (act.type != ActType::Ack) return;
  for (const auto& id : referenced_ids(act.content)) {
    const ConversationAct* target = s.find_act(id);
    if (!target || target->speaker == act.speaker) continue;
    if (act.speaker == Participant::User)
      ground_own_act(s, id);
    else
      erase_id(s.unacked_acts, id);
  }
}

}  // namespace

std::string_view to_string(TurnHolder t) {
  switch (t) {
    case TurnHolder::System: return "SYSTEM";
    case TurnHolder::User: return "USER";
    case TurnHolder::Nobody: return "NOBODY";
  }
  return "?";
}

std::string_view to_string(DiscourseGoal g) {
  switch (g) {
    case DiscourseGoal::GetGoal: return "GET-GOAL";
    case DiscourseGoal::BuildPlan: return "BUILD-PLAN";
    case DiscourseGoal::ExecutePlan: return "EXECUTE-PLAN";
  }
  return "?";
}

std::string_view to_string(ProposalStatus s) {
  switch (s) {
    case ProposalStatus::Proposed: return "PROPOSED";
    case ProposalStatus::Acknowledged: return "ACKNOWLEDGED";
    case ProposalStatus::Accepted: return "ACCEPTED";
    case ProposalStatus::Rejected: return "REJECTED";
    case ProposalStatus::Retracted: return "RETRACTED";
  }
  return "?";
}

nlohmann::json DiscourseContext::to_json() const {
  return {
      {"obligations", {{"SYSTEM", system_obligations}, {"USER", user_obligations}}},
      {"turn_holder", turn_holder},
      {"intended_acts", intended_acts},
      {"unacked_acts", unacked_acts},
      {"unaccepted_proposals", unaccepted_proposals},
      {"discourse_goals", discourse_goals},
  };
}

DiscourseContext DiscourseContext::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DecodeError("context", "expected an object");
  DiscourseContext c;
  if (!j.contains("obligations")) throw DecodeError("obligations", "missing field");
  const auto& ob = j.at("obligations");
  c.system_obligations = json_strings(ob, "SYSTEM");
  if (ob.contains("USER")) c.user_obligations = json_strings(ob, "USER");
  if (!j.contains("turn_holder")) throw DecodeError("turn_holder", "missing field");
  c.turn_holder = j.at("turn_holder").get<std::string>();
  c.intended_acts = json_strings(j, "intended_acts");
  c.unacked_acts = json_strings(j, "unacked_acts");
  c.unaccepted_proposals = json_strings(j, "unaccepted_proposals");
  c.discourse_goals = json_strings(j, "discourse_goals");
  return c;
}

std::string DiscourseContext::pretty() const {
  std::vector<std::string> goals;
  for (const auto& g : discourse_goals) goals.emplace_back(goal_display(g));
  std::string holder = turn_holder;
  if (!holder.empty())
    std::transform(holder.begin() + 1, holder.end(), holder.begin() + 1,
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  std::ostringstream os;
  os << "Discourse Obligations: " << join(system_obligations, ", ") << "\n"
     << "Turn Holder: " << holder << "\n"
     << "Intended Speech Acts: " << join(intended_acts, ", ") << "\n"
     << "Unack'd Speech Acts: " << join(unacked_acts, ", ") << "\n"
     << "Unaccepted Proposals: " << join(unaccepted_proposals, ", ") << "\n"
     << "Discourse Goals: " << join(goals, " ") << "\n";
  return os.str();
}

DiscourseState::DiscourseState(RuleSet r) : rules(std::move(r)) {}

const ConversationAct* DiscourseState::find_act(std::string_view id) const {
  const auto seq = seq_of(id);
  for (const auto& a : acts)
    if (a.seq == seq) return a.id() == id ? &a : nullptr;
  return nullptr;
}

ConversationAct* DiscourseState::find_act(std::string_view id) {
  return const_cast<ConversationAct*>(std::as_const(*this).find_act(id));
}

Proposal* DiscourseState::find_proposal(std::string_view id) {
  for (auto& p : proposals)
    if (p.id == id) return &p;
  return nullptr;
}

const Proposal* DiscourseState::find_proposal(std::string_view id) const {
  for (const auto& p : proposals)
    if (p.id == id) return &p;
  return nullptr;
}

bool DiscourseState::goal_pending(DiscourseGoal g) const {
  return std::find(discourse_goals.begin(), discourse_goals.end(), g) != discourse_goals.end();
}

bool DiscourseState::consume_goal(DiscourseGoal g) {
  if (discourse_goals.empty() || discourse_goals.front() != g) return false;
  discourse_goals.pop_front();
  log({{"type", "goal"}, {"goal", to_string(g)}, {"status", "SATISFIED"}});
  return true;
}

void DiscourseState::flush_obligation_log() {
  const auto& h = obligations.history();
  for (; logged_transitions_ < h.size(); ++logged_transitions_) {
    const auto& tr = h[logged_transitions_];
    const Obligation& ob = obligations.get(tr.id);
    nlohmann::json rec{{"type", "obligation"},
                       {"tick", tick},
                       {"id", tr.id},
                       {"obligation", ob.render()},
                       {"obligee", to_string(ob.obligee)},
                       {"source", ob.source_act},
                       {"to", to_string(tr.to)}};
    rec["from"] = tr.from ? nlohmann::json(to_string(*tr.from)) : nlohmann::json(nullptr);
    trace_.push_back(std::move(rec));
  }
}

void DiscourseState::log(nlohmann::json record) {
  flush_obligation_log();
  if (!record.contains("tick")) record["tick"] = tick;
  trace_.push_back(std::move(record));
}

void DiscourseState::queue_intention(Intention in) {
  const int rank = source_rank(in.source);
  auto at = std::find_if(intended_acts.begin(), intended_acts.end(),
                         [&](const Intention& x) { return source_rank(x.source) > rank; });
  intended_acts.insert(at, std::move(in));
}

void DiscourseState::set_proposal_status(Proposal& p, ProposalStatus to) {
  const ProposalStatus from = p.status;
  const bool ok = (from == ProposalStatus::Proposed && to == ProposalStatus::Acknowledged) ||
                  (from == ProposalStatus::Acknowledged &&
                   (to == ProposalStatus::Accepted || to == ProposalStatus::Rejected)) ||
                  (from == ProposalStatus::Rejected && to == ProposalStatus::Retracted);
  if (!ok)
    throw TransitionError("illegal proposal transition " + std::string(to_string(from)) + " -> " +
                          std::string(to_string(to)) + " for " + p.id);
  p.status = to;
  p.history.push_back(to);
  log({{"type", "proposal"}, {"id", p.id}, {"status", to_string(to)}});
}

void set_turn(DiscourseState& s, TurnHolder holder, std::string_view reason) {
  if (s.turn_holder == holder) return;
  s.log({{"type", "turn"},
         {"from", to_string(s.turn_holder)},
         {"to", to_string(holder)},
         {"reason", reason}});
  s.turn_holder = holder;
  if (holder == TurnHolder::Nobody) s.released_at = s.tick;
}

void ground_own_act(DiscourseState& s, const std::string& id) {
  auto it = std::find_if(s.own_unacked.begin(), s.own_unacked.end(),
                         [&](const OwnAct& o) { return o.id == id; });
  if (it == s.own_unacked.end()) return;
  s.own_unacked.erase(it);
  ConversationAct* act = s.find_act(id);
  if (!act) return;
  act->grounded = Grounding::Acknowledged;
  s.log({{"type", "grounded"}, {"act", id}, {"by", "USER"}});
  enter_unaccepted(s, id);
  chain(s.obligations, s.rules, *act, AttachPhase::OnGrounding);
}

void acknowledge(DiscourseState& s, const std::vector<std::string>& act_ids) {
  if (act_ids.empty()) return;
  for (const auto& id : act_ids)
    if (!contains_id(s.unacked_acts, id))
      throw ReferenceError("act " + id + " is not awaiting acknowledgement");

  std::vector<Term> refs;
  for (const auto& id : act_ids) {
    erase_id(s.unacked_acts, id);
    ConversationAct* act = s.find_act(id);
    act->grounded = Grounding::Acknowledged;
    refs.push_back(act->ref());
    enter_unaccepted(s, id);
    chain(s.obligations, s.rules, *act, AttachPhase::OnGrounding);
  }
  s.log({{"type", "acknowledge"}, {"acts", act_ids}});

  for (auto& in : s.intended_acts) {
    if (in.source != IntentionSource::Grounding || in.acts.empty() ||
        in.acts.front().type != ActType::Ack)
      continue;
    std::vector<Term> merged = in.acts.front().content.is_list()
                                   ? in.acts.front().content.items()
                                   : std::vector<Term>{in.acts.front().content};
    merged.insert(merged.end(), refs.begin(), refs.end());
    in.acts.front().content = Term::list(std::move(merged));
    return;
  }
  Intention in;
  in.source = IntentionSource::Grounding;
  in.acts.push_back({ActType::Ack, Term::list(std::move(refs))});
  s.queue_intention(std::move(in));
}

DiscourseState& apply_event(DiscourseState& s, const UtteranceEvent& ev) {
  if (ev.tick < s.tick)
    throw TimeOrderError("event " + ev.utt_id + " at tick " + std::to_string(ev.tick) +
                         " precedes state tick " + std::to_string(s.tick));
  s.tick = ev.tick;
  s.log({{"type", "event"}, {"event", to_json(ev)}});

  const bool user = ev.speaker == Participant::User;
  if (user) {
    if (s.turn_holder != TurnHolder::User) set_turn(s, TurnHolder::User, "speaks");
    s.last_user_activity = ev.tick;
    s.turn_seized = false;
    const bool trouble = std::any_of(ev.acts.begin(), ev.acts.end(), [](const auto& a) {
      return a.type == ActType::Repair || a.type == ActType::RequestRepair;
    });
    // Any further core contribution implicitly grounds what the system said.
    if (ev.has_core_act() && !trouble) {
      const auto pending = s.own_unacked;
      for (const auto& o : pending) ground_own_act(s, o.id);
    }
    const bool initiating = std::any_of(ev.acts.begin(), ev.acts.end(), [](const auto& a) {
      return level_of(a.type) == ActLevel::Core && !is_response(a.type);
    });
    if (initiating) {
      s.initiative = Initiative::User;
      s.end_offer = EndOffer::None;
    }
  } else if (s.turn_holder != TurnHolder::System) {
    set_turn(s, TurnHolder::System, "speaks");
  }

  const std::size_t first = s.acts.size();
  for (const auto& a : ev.acts) s.acts.push_back(a);
  for (const auto& a : ev.acts)
    if (level_of(a.type) == ActLevel::Core) {
      s.utterance_contents.emplace(ev.utt_id, a.content);
      break;
    }

  for (std::size_t i = first; i < s.acts.size(); ++i) {
    // Index, not reference: chaining never appends acts, but settle paths look
    // acts up by id.
    ConversationAct& act = s.acts[i];
    switch (level_of(act.type)) {
      case ActLevel::Core: process_core(s, act); break;
      case ActLevel::Grounding: process_grounding(s, act); break;
      case ActLevel::TurnTaking: break;
    }
    ConversationAct snapshot_act = s.acts[i];
    if (user) observe_user_discharge(s, snapshot_act);
    chain(s.obligations, s.rules, snapshot_act, AttachPhase::OnObservation);
    if (snapshot_act.grounded == Grounding::Acknowledged && snapshot_act.speaker == Participant::User)
      chain(s.obligations, s.rules, snapshot_act, AttachPhase::OnGrounding);
  }

  if (user) {
    if (ev.turn_effect == TurnEffect::Release) {
      if (ev.only_turn_acts()) {
        s.initiative = Initiative::System;
        if (s.end_offer == EndOffer::Offered) s.end_offer = EndOffer::Declined;
      }
      for (auto& o : s.own_unacked) ++o.missed_turns;
      set_turn(s, TurnHolder::System, "released");
    }
  } else if (ev.turn_effect == TurnEffect::Release) {
    set_turn(s, TurnHolder::Nobody, "released");
  }
  s.log({{"type", "applied"}, {"utt", ev.utt_id}});
  return s;
}

DiscourseContext snapshot(const DiscourseState& s) {
  DiscourseContext c;
  for (auto p : {Participant::System, Participant::User}) {
    const auto& entries = s.obligations.stack(p).entries();
    auto& out = p == Participant::System ? c.system_obligations : c.user_obligations;
    for (auto it = entries.rbegin(); it != entries.rend(); ++it)
      out.push_back(s.obligations.get(*it).render());
  }
  c.turn_holder = std::string(to_string(s.turn_holder));
  for (const auto& in : s.intended_acts)
    for (const auto& a : in.acts) c.intended_acts.push_back(a.render());
  for (const auto& id : s.unacked_acts) c.unacked_acts.push_back("[" + id + "]");
  for (const auto& id : s.unaccepted_proposals) c.unaccepted_proposals.push_back("[" + id + "]");
  for (auto g : s.discourse_goals) c.discourse_goals.emplace_back(to_string(g));
  return c;
}

bool is_proposal_content(const Term& content) {
  if (is_domain_action(content) || is_goal_action(content)) return true;
  const auto h = content.head();
  return !h.empty() && h.front() == ':';
}

}  // namespace discourse
