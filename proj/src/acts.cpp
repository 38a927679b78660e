#include "discourse/acts.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "discourse/errors.hpp"

namespace discourse {

namespace {

struct ActInfo {
  ActType type;
  std::string_view token;
  ActLevel level;
};

constexpr std::array<ActInfo, 20> kActs{{
    {ActType::Inform, "INFORM", ActLevel::Core},
    {ActType::Ynq, "YNQ", ActLevel::Core},
    {ActType::Check, "CHECK", ActLevel::Core},
    {ActType::Whq, "WHQ", ActLevel::Core},
    {ActType::Suggest, "SUGGEST", ActLevel::Core},
    {ActType::Request, "REQUEST", ActLevel::Core},
    {ActType::Accept, "ACCEPT", ActLevel::Core},
    {ActType::Reject, "REJECT", ActLevel::Core},
    {ActType::Promise, "PROMISE", ActLevel::Core},
    {ActType::InformIf, "INFORM-IF", ActLevel::Core},
    {ActType::InformRef, "INFORM-REF", ActLevel::Core},
    {ActType::Eval, "EVAL", ActLevel::Core},
    {ActType::InformInability, "INFORM-INABILITY", ActLevel::Core},
    {ActType::Ack, "ACK", ActLevel::Grounding},
    {ActType::Repair, "REPAIR", ActLevel::Grounding},
    {ActType::RequestAck, "REQUEST-ACK", ActLevel::Grounding},
    {ActType::RequestRepair, "REQUEST-REPAIR", ActLevel::Grounding},
    {ActType::TakeTurn, "TAKE-TURN", ActLevel::TurnTaking},
    {ActType::ReleaseTurn, "RELEASE-TURN", ActLevel::TurnTaking},
    {ActType::KeepTurn, "KEEP-TURN", ActLevel::TurnTaking},
}};

const ActInfo& info(ActType t) { return kActs[static_cast<std::size_t>(t)]; }

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

// "3-7" and "3-3=6" belong to turn 3; "9=13" is its own group.
std::string default_group(const std::string& utt) {
  return "T" + utt.substr(0, utt.find('-'));
}

}  // namespace

ActLevel level_of(ActType t) { return info(t).level; }
std::string_view to_string(ActType t) { return info(t).token; }

ActType parse_act_type(std::string_view token) {
  auto up = upper(token);
  for (const auto& a : kActs)
    if (a.token == up) return a.type;
  throw VocabularyError("unknown act type '" + std::string(token) + "'");
}

const std::vector<ActType>& all_act_types() {
  static const std::vector<ActType> all = [] {
    std::vector<ActType> v;
    for (const auto& a : kActs) v.push_back(a.type);
    return v;
  }();
  return all;
}

bool is_question(ActType t) {
  return t == ActType::Ynq || t == ActType::Check || t == ActType::Whq;
}

bool is_response(ActType t) {
  switch (t) {
    case ActType::Accept:
    case ActType::Reject:
    case ActType::InformIf:
    case ActType::InformRef:
    case ActType::InformInability:
    case ActType::Eval:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(Participant p) { return p == Participant::System ? "SYSTEM" : "USER"; }

Participant parse_participant(std::string_view s) {
  auto up = upper(s);
  if (up == "SYSTEM" || up == "S") return Participant::System;
  if (up == "USER" || up == "U") return Participant::User;
  throw DecodeError("speaker", "unknown participant '" + std::string(s) + "'");
}

std::string_view to_string(Grounding g) {
  switch (g) {
    case Grounding::Ungrounded:
      return "UNGROUNDED";
    case Grounding::Acknowledged:
      return "ACKNOWLEDGED";
    case Grounding::RepairPending:
      return "REPAIR-PENDING";
  }
  return {};
}

std::string_view to_string(TurnEffect t) { return t == TurnEffect::Release ? "release" : "keep"; }

std::string act_id(ActType type, std::uint32_t seq) {
  return std::string(to_string(type)) + "-" + std::to_string(seq);
}

std::optional<std::pair<ActType, std::uint32_t>> parse_act_id(std::string_view id) {
  auto dash = id.rfind('-');
  if (dash == std::string_view::npos || dash + 1 >= id.size()) return std::nullopt;
  auto num = id.substr(dash + 1);
  if (!std::all_of(num.begin(), num.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return std::nullopt;
  try {
    return std::pair{parse_act_type(id.substr(0, dash)),
                     static_cast<std::uint32_t>(std::stoul(std::string(num)))};
  } catch (const VocabularyError&) {
    return std::nullopt;
  }
}

std::string ConversationAct::id() const { return act_id(type, seq); }

std::string render_act(ActType type, const Term& content) {
  std::string s = "(" + std::string(to_string(type));
  bool splice = content.is_list() && !content.items().empty() &&
                std::all_of(content.items().begin(), content.items().end(),
                            [](const Term& t) { return t.is_act_ref(); });
  if (splice) {
    for (const auto& r : content.items()) s += " " + r.str();
  } else if (!(content.is_list() && content.items().empty())) {
    s += " " + content.str();
  }
  return s + ")";
}

std::string ConversationAct::render() const { return render_act(type, content); }

bool UtteranceEvent::has_core_act() const {
  return std::any_of(acts.begin(), acts.end(),
                     [](const ConversationAct& a) { return level_of(a.type) == ActLevel::Core; });
}

bool UtteranceEvent::only_turn_acts() const {
  return std::all_of(acts.begin(), acts.end(), [](const ConversationAct& a) {
    return level_of(a.type) == ActLevel::TurnTaking;
  });
}

UtteranceEvent decode_event(const nlohmann::json& record, ActIdAllocator& ids,
                            const ContentResolver& resolver) {
  using nlohmann::json;
  if (!record.is_object()) throw DecodeError("<record>", "expected an object");

  auto require = [&](const char* field, json::value_t type) -> const json& {
    auto it = record.find(field);
    if (it == record.end()) throw DecodeError(field, "missing");
    bool ok = it->type() == type ||
              (type == json::value_t::number_integer && it->is_number_unsigned());
    if (!ok) throw DecodeError(field, std::string("wrong type ") + it->type_name());
    return *it;
  };

  UtteranceEvent ev;
  ev.utt_id = require("utt", json::value_t::string).get<std::string>();
  if (ev.utt_id.empty()) throw DecodeError("utt", "empty");
  ev.speaker = parse_participant(require("speaker", json::value_t::string).get<std::string>());
  ev.tick = require("tick", json::value_t::number_integer).get<std::int64_t>();

  auto turn = upper(require("turn", json::value_t::string).get<std::string>());
  if (turn == "RELEASE")
    ev.turn_effect = TurnEffect::Release;
  else if (turn == "KEEP")
    ev.turn_effect = TurnEffect::Keep;
  else
    throw DecodeError("turn", "expected release|keep");

  std::string group = default_group(ev.utt_id);
  if (auto g = record.find("group"); g != record.end()) {
    if (!g->is_string()) throw DecodeError("group", "expected string");
    group = g->get<std::string>();
  }

  const auto& acts = require("acts", json::value_t::array);
  if (acts.empty()) throw DecodeError("acts", "act list must be non-empty");

  // Validate everything before consuming ids so a failed decode leaves the
  // allocator untouched.
  struct Pending {
    ActType type;
    std::vector<Term> contents;
    ActMarks marks;
  };
  std::vector<Pending> pending;
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const auto& a = acts[i];
    std::string where = "acts[" + std::to_string(i) + "]";
    if (!a.is_object()) throw DecodeError(where, "expected an object");
    auto t = a.find("type");
    if (t == a.end() || !t->is_string()) throw DecodeError(where + ".type", "missing");
    Pending p{parse_act_type(t->get<std::string>()), {}, {}};

    if (auto m = a.find("marks"); m != a.end()) {
      if (!m->is_array()) throw DecodeError(where + ".marks", "expected array");
      for (const auto& mark : *m) {
        auto s = mark.is_string() ? upper(mark.get<std::string>()) : std::string();
        if (s == "IMPERATIVE")
          p.marks.imperative = true;
        else if (s == "GOAL-STATING")
          p.marks.goal_stating = true;
        else if (s == "DEFECTIVE")
          p.marks.defective = true;
        else
          throw DecodeError(where + ".marks", "unknown mark " + mark.dump());
      }
    }

    auto c = a.find("content");
    if (c != a.end() && !c->is_null()) {
      if (!c->is_string()) throw DecodeError(where + ".content", "expected string");
      auto text = c->get<std::string>();
      if (!text.empty() && text[0] == '@') {
        std::optional<Term> resolved;
        if (resolver.utterance_content) resolved = resolver.utterance_content(text.substr(1));
        if (!resolved) throw DecodeError(where + ".content", "unresolved reference " + text);
        p.contents.push_back(*resolved);
      } else {
        try {
          p.contents.push_back(Term::parse(text));
        } catch (const ParseError& e) {
          throw DecodeError(where + ".content", e.what());
        }
      }
    } else if (level_of(p.type) == ActLevel::TurnTaking) {
      p.contents.push_back(Term::list({}));
    } else if (resolver.default_content) {
      p.contents = resolver.default_content(p.type, ev.speaker);
    } else {
      throw DecodeError(where + ".content", "missing");
    }
    if (p.contents.empty() && level_of(p.type) == ActLevel::Core)
      throw DecodeError(where + ".content", "nothing to respond to");
    pending.push_back(std::move(p));
  }

  for (auto& p : pending) {
    for (auto& content : p.contents) {
      ConversationAct act;
      act.seq = ids.next();
      act.type = p.type;
      act.speaker = ev.speaker;
      act.content = std::move(content);
      act.group = group;
      act.marks = p.marks;
      ev.acts.push_back(std::move(act));
    }
  }
  if (ev.acts.empty()) throw DecodeError("acts", "nothing to acknowledge");
  return ev;
}

std::vector<ConversationAct> derive_indirect_acts(std::vector<ConversationAct> acts,
                                                  ActIdAllocator& ids) {
  const std::size_t n = acts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& src = acts[i];
    if (src.type != ActType::Inform || src.derived_from) continue;
    if (!src.marks.imperative && !src.marks.goal_stating) continue;
    bool done = std::any_of(acts.begin(), acts.end(), [&](const ConversationAct& a) {
      return a.derived_from == src.seq;
    });
    if (done) continue;

    Term action = src.content;
    auto h = action.head();
    if ((h == "NEED" || h == "SHOULD" || h == "MUST" || h == "WANT") && action.size() == 2)
      action = action[1];

    ConversationAct d;
    d.seq = ids.next();
    d.type = src.marks.imperative ? ActType::Request : ActType::Suggest;
    d.speaker = src.speaker;
    d.content = std::move(action);
    d.group = src.group;
    d.derived_from = src.seq;
    acts.push_back(std::move(d));
  }
  return acts;
}

nlohmann::json to_json(const ConversationAct& act) {
  nlohmann::json j{{"id", act.id()},
                   {"type", to_string(act.type)},
                   {"speaker", to_string(act.speaker)},
                   {"content", act.content.str()},
                   {"group", act.group}};
  if (act.derived_from) j["derived_from"] = *act.derived_from;
  nlohmann::json marks = nlohmann::json::array();
  if (act.marks.imperative) marks.push_back("imperative");
  if (act.marks.goal_stating) marks.push_back("goal-stating");
  if (act.marks.defective) marks.push_back("defective");
  if (!marks.empty()) j["marks"] = std::move(marks);
  return j;
}

nlohmann::json to_json(const UtteranceEvent& ev) {
  nlohmann::json acts = nlohmann::json::array();
  for (const auto& a : ev.acts) acts.push_back(to_json(a));
  nlohmann::json j{{"utt", ev.utt_id},
                   {"speaker", to_string(ev.speaker)},
                   {"acts", std::move(acts)},
                   {"turn", to_string(ev.turn_effect)},
                   {"tick", ev.tick}};
  if (!ev.text.empty()) j["text"] = ev.text;
  return j;
}

}  // namespace discourse
