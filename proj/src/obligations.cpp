#include "discourse/obligations.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "discourse/errors.hpp"

namespace discourse {

namespace {

constexpr std::string_view kBuiltinRules = R"(
; source of obligation             obliged action
(RULE accept-or-promise (ON ACCEPT PROMISE) (CONTENT ?A)
      (OBLIGE SPEAKER ACHIEVE ?A) (ATTACH ON-GROUNDING))
(RULE request (ON REQUEST) (CONTENT ?A)
      (OBLIGE HEARER ADDRESS ?ACT) (ATTACH ON-GROUNDING))
(RULE yes-no-question (ON YNQ) (CONTENT ?P)
      (OBLIGE HEARER ANSWER-IF ?P) (ATTACH ON-OBSERVATION))
(RULE wh-question (ON WHQ) (CONTENT ?P)
      (OBLIGE HEARER INFORM-REF ?P) (ATTACH ON-OBSERVATION))
(RULE not-understood (ON DEFECTIVE) (CONTENT ?U)
      (OBLIGE HEARER REPAIR ?ACT) (ATTACH ON-OBSERVATION))
)";

bool refers_to(const Term& content, const Term& ref) {
  if (content == ref) return true;
  if (!content.is_list()) return false;
  return std::any_of(content.items().begin(), content.items().end(),
                     [&](const Term& t) { return t == ref; });
}

const Term* first_ref(const Term& content) {
  if (content.is_act_ref()) return &content;
  if (content.is_list())
    for (const auto& t : content.items())
      if (t.is_act_ref()) return &t;
  return nullptr;
}

ObligationRule parse_rule(const Term& form) {
  if (form.head() != "RULE" || form.size() < 3 || !form[1].is_symbol())
    throw ParseError("expected (RULE name ...), got " + form.str());
  ObligationRule r;
  r.name = form[1].text();
  bool have_on = false, have_oblige = false, have_attach = false;
  r.content_pattern = Term::variable("_");

  for (std::size_t i = 2; i < form.size(); ++i) {
    const Term& clause = form[i];
    auto h = clause.head();
    if (h == "ON") {
      have_on = true;
      for (std::size_t k = 1; k < clause.size(); ++k) {
        if (!clause[k].is_symbol()) throw ParseError("ON expects act types");
        if (clause[k].text() == "DEFECTIVE")
          r.on_defect = true;
        else
          r.triggers.push_back(parse_act_type(clause[k].text()));
      }
    } else if (h == "CONTENT" && clause.size() == 2) {
      r.content_pattern = clause[1];
    } else if (h == "OBLIGE" && clause.size() == 4) {
      have_oblige = true;
      if (clause[1].is_symbol("SPEAKER"))
        r.obligee = Role::Speaker;
      else if (clause[1].is_symbol("HEARER"))
        r.obligee = Role::Hearer;
      else
        throw ParseError("OBLIGE role must be SPEAKER or HEARER in rule " + r.name);
      r.ob_type = parse_ob_type(clause[2].text());
      r.obliged_template = clause[3];
    } else if (h == "ATTACH" && clause.size() == 2) {
      have_attach = true;
      if (clause[1].is_symbol("ON-OBSERVATION"))
        r.attach = AttachPhase::OnObservation;
      else if (clause[1].is_symbol("ON-GROUNDING"))
        r.attach = AttachPhase::OnGrounding;
      else
        throw ParseError("unknown attach phase in rule " + r.name);
    } else {
      throw ParseError("unknown clause " + clause.str() + " in rule " + r.name);
    }
  }
  if (!have_on || !have_oblige || !have_attach)
    throw ParseError("rule " + r.name + " needs ON, OBLIGE and ATTACH clauses");

  std::vector<std::string> bound{"ACT"};
  r.content_pattern.collect_variables(bound);
  std::vector<std::string> used;
  r.obliged_template.collect_variables(used);
  for (const auto& v : used)
    if (std::find(bound.begin(), bound.end(), v) == bound.end())
      throw ParseError("variable ?" + v + " in rule " + r.name + " is not bound by its trigger");

  r.outcomes = satisfying_acts(r.ob_type);
  return r;
}

}  // namespace

std::string_view to_string(ObType t) {
  switch (t) {
    case ObType::Achieve:
      return "ACHIEVE";
    case ObType::Address:
      return "ADDRESS";
    case ObType::AnswerIf:
      return "ANSWER-IF";
    case ObType::CheckIf:
      return "CHECK-IF";
    case ObType::InformRef:
      return "INFORM-REF";
    case ObType::Repair:
      return "REPAIR";
  }
  return {};
}

ObType parse_ob_type(std::string_view s) {
  for (auto t : {ObType::Achieve, ObType::Address, ObType::AnswerIf, ObType::CheckIf,
                 ObType::InformRef, ObType::Repair})
    if (to_string(t) == s) return t;
  throw ParseError("unknown obligation type '" + std::string(s) + "'");
}

std::string_view to_string(ObState s) {
  switch (s) {
    case ObState::Pending:
      return "PENDING";
    case ObState::IntentionFormed:
      return "INTENTION-FORMED";
    case ObState::Discharged:
      return "DISCHARGED";
    case ObState::Violated:
      return "VIOLATED";
  }
  return {};
}

std::string_view to_string(AttachPhase p) {
  return p == AttachPhase::OnObservation ? "ON-OBSERVATION" : "ON-GROUNDING";
}

std::string_view to_string(IntentionSource s) {
  switch (s) {
    case IntentionSource::Obligation:
      return "OBLIGATION";
    case IntentionSource::Goal:
      return "GOAL";
    case IntentionSource::Grounding:
      return "GROUNDING";
    case IntentionSource::Negotiation:
      return "NEGOTIATION";
  }
  return {};
}

std::string Obligation::render() const {
  return "(" + std::string(to_string(type)) + " " + content.str() + ")";
}

bool ObligationRule::triggered_by(const ConversationAct& act) const {
  if (on_defect) return act.marks.defective || act.type == ActType::RequestRepair;
  if (act.marks.defective) return false;
  return std::any_of(triggers.begin(), triggers.end(), [&](ActType t) {
    return t == act.type || (t == ActType::Ynq && act.type == ActType::Check);
  });
}

const RuleSet& builtin_rules() {
  static const RuleSet rules = parse_rules(kBuiltinRules);
  return rules;
}

RuleSet parse_rules(std::string_view text) {
  RuleSet out;
  for (const auto& form : Term::parse_all(text)) out.push_back(parse_rule(form));
  return out;
}

RuleSet load_rules_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open rules file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_rules(ss.str());
}

std::vector<const ObligationRule*> rules_for(const RuleSet& rules, const ConversationAct& act) {
  std::vector<const ObligationRule*> out;
  for (const auto& r : rules)
    if (r.triggered_by(act)) out.push_back(&r);
  return out;
}

std::vector<ActType> satisfying_acts(ObType t) {
  switch (t) {
    case ObType::Achieve:
      return {ActType::Inform};
    case ObType::Address:
      return {ActType::Accept, ActType::Reject, ActType::Whq, ActType::Eval};
    case ObType::AnswerIf:
    case ObType::CheckIf:
      return {ActType::InformIf, ActType::InformInability};
    case ObType::InformRef:
      return {ActType::InformRef, ActType::InformInability};
    case ObType::Repair:
      return {ActType::Repair};
  }
  return {};
}

ObligationId ObligationStack::top() const {
  if (entries_.empty()) throw PreconditionError("obligation stack is empty");
  return entries_.back();
}

bool ObligationStack::contains(ObligationId id) const {
  return std::find(entries_.begin(), entries_.end(), id) != entries_.end();
}

void ObligationStack::pop() {
  if (entries_.empty()) throw PreconditionError("obligation stack is empty");
  entries_.pop_back();
}

void ObligationStack::remove(ObligationId id) {
  entries_.erase(std::remove(entries_.begin(), entries_.end(), id), entries_.end());
}

ObligationId ObligationBook::incur(Obligation ob) {
  ob.id = static_cast<ObligationId>(all_.size() + 1);
  ob.state = ObState::Pending;
  all_.push_back(ob);
  if (ob.type == ObType::Achieve)
    commitments_.push_back(ob.id);
  else
    stack(ob.obligee).push(ob.id);
  history_.push_back({ob.id, std::nullopt, ObState::Pending});
  return ob.id;
}

void ObligationBook::transition(ObligationId id, ObState to) {
  auto& ob = all_.at(id - 1);
  const ObState from = ob.state;
  bool ok = (from == ObState::Pending &&
             (to == ObState::IntentionFormed || to == ObState::Violated)) ||
            (from == ObState::IntentionFormed &&
             (to == ObState::Discharged || to == ObState::Pending));
  if (!ok)
    throw TransitionError("illegal obligation transition " + std::string(to_string(from)) +
                          " -> " + std::string(to_string(to)) + " for " + ob.render());
  ob.state = to;
  history_.push_back({id, from, to});
}

std::size_t ObligationBook::count(ObState s) const {
  return static_cast<std::size_t>(
      std::count_if(all_.begin(), all_.end(), [&](const Obligation& o) { return o.state == s; }));
}

std::vector<ObligationId> chain(ObligationBook& book, const RuleSet& rules,
                                const ConversationAct& act, AttachPhase phase) {
  std::vector<ObligationId> pushed;
  for (const auto& rule : rules) {
    if (rule.attach != phase || !rule.triggered_by(act)) continue;
    const std::string source = act.id();
    const bool fired = std::any_of(book.all().begin(), book.all().end(), [&](const Obligation& o) {
      return o.source_act == source && o.rule == rule.name;
    });
    if (fired) continue;

    Bindings b;
    if (!match(rule.content_pattern, act.content, b)) continue;
    Term subject = act.ref();
    if (rule.on_defect && act.type == ActType::RequestRepair)
      if (const Term* r = first_ref(act.content)) subject = *r;
    b["ACT"] = subject;

    Obligation ob;
    ob.type = rule.ob_type;
    if (ob.type == ObType::AnswerIf && act.type == ActType::Check) ob.type = ObType::CheckIf;
    ob.content = substitute(rule.obliged_template, b);
    ob.obligee = rule.obligee == Role::Speaker ? act.speaker : other(act.speaker);
    ob.source_act = source;
    ob.rule = rule.name;
    if (ob.type == ObType::Address) ob.request_content = act.content;
    pushed.push_back(book.incur(std::move(ob)));
  }
  return pushed;
}

Intention form_intention(ObligationBook& book, ObligationId id, std::vector<IntendedAct> acts,
                         std::string group) {
  const Obligation& ob = book.get(id);
  if (ob.type == ObType::Achieve)
    throw PreconditionError("ACHIEVE commitments are not taken from a stack");
  auto& stack = book.stack(ob.obligee);
  if (stack.empty()) throw PreconditionError("obligation stack is empty");
  if (ob.state != ObState::Pending)
    throw PreconditionError("obligation " + ob.render() + " is not pending");
  if (stack.top() != id)
    throw OrderingError("obligation " + ob.render() + " is not on top of its stack");
  stack.pop();
  book.transition(id, ObState::IntentionFormed);
  Intention in;
  in.acts = std::move(acts);
  in.source = IntentionSource::Obligation;
  in.obligation = id;
  in.group = std::move(group);
  return in;
}

void reinstate(ObligationBook& book, ObligationId id) {
  book.transition(id, ObState::Pending);
  book.stack(book.get(id).obligee).push(id);
}

bool satisfies(const Obligation& ob, const ConversationAct& act) {
  const Term& c = act.content;
  auto answers = [&](const Term& p) {
    return c.is_list() && c.size() == 2 && c[1] == p;
  };
  switch (ob.type) {
    case ObType::Address:
      if (act.type == ActType::Accept || act.type == ActType::Reject)
        return refers_to(c, ob.content);
      if (act.type == ActType::Whq || act.type == ActType::Ynq)
        return c.head() == "CLARIFY" && c.size() >= 2 && c[1] == ob.content;
      if (act.type == ActType::Eval) return ob.request_content.head() == "EVAL";
      return false;
    case ObType::AnswerIf:
    case ObType::CheckIf:
      if (act.type == ActType::InformIf)
        return (c.head() == "YES" || c.head() == "NO") && answers(ob.content);
      return act.type == ActType::InformInability && answers(ob.content);
    case ObType::InformRef: {
      if (act.type == ActType::InformInability) return answers(ob.content);
      Bindings b;
      return act.type == ActType::InformRef && match(ob.content, c, b);
    }
    case ObType::Repair:
      return act.type == ActType::Repair && refers_to(c, ob.content);
    case ObType::Achieve:
      return act.type == ActType::Inform && c.head() == "DONE" && c.size() == 2 &&
             c[1] == ob.content;
  }
  return false;
}

void discharge(ObligationBook& book, ObligationId id, const ConversationAct& by_act) {
  const Obligation& ob = book.get(id);
  if (ob.state != ObState::IntentionFormed)
    throw TransitionError("cannot discharge " + ob.render() + " in state " +
                          std::string(to_string(ob.state)));
  if (!satisfies(ob, by_act))
    throw MismatchError(by_act.render() + " does not satisfy " + ob.render());
  book.transition(id, ObState::Discharged);
}

void mark_violated(ObligationBook& book, ObligationId id) {
  const Obligation& ob = book.get(id);
  book.transition(id, ObState::Violated);
  book.stack(ob.obligee).remove(id);
}

void complete_commitment(ObligationBook& book, ObligationId id) {
  book.transition(id, ObState::IntentionFormed);
  book.transition(id, ObState::Discharged);
}

}  // namespace discourse
