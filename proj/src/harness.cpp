#include "discourse/harness.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "discourse/errors.hpp"

namespace discourse {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Non-blank, non-comment lines with their 1-based line numbers.
std::vector<std::pair<int, std::string_view>> record_lines(std::string_view text) {
  std::vector<std::pair<int, std::string_view>> out;
  int n = 0;
  while (!text.empty()) {
    ++n;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#') continue;
    out.emplace_back(n, line);
  }
  return out;
}

json parse_line(int n, std::string_view line) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(n) + ": " + e.what());
  }
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

std::string line_field(int n, const std::string& field) {
  return "line " + std::to_string(n) + ": " + field;
}

}  // namespace

DialogueScript parse_script(std::string_view text) {
  DialogueScript script;
  std::set<std::string> seen;
  std::optional<std::int64_t> last_tick;
  bool first = true;
  for (const auto& [n, line] : record_lines(text)) {
    json j = parse_line(n, line);
    if (!j.is_object()) throw DecodeError(line_field(n, "record"), "expected an object");
    if (first && j.contains("script")) {
      first = false;
      auto& h = script.header;
      h.version = j.at("script").get<int>();
      if (h.version != 1)
        throw DecodeError("script", "unsupported version " + std::to_string(h.version));
      h.name = j.value("name", "");
      if (j.contains("world")) h.world = j.at("world").get<std::string>();
      if (j.contains("policy")) h.policy = j.at("policy").get<std::string>();
      if (j.contains("seed")) h.seed = j.at("seed").get<std::uint64_t>();
      if (j.contains("pause_ticks")) h.pause_ticks = j.at("pause_ticks").get<std::int64_t>();
      continue;
    }
    first = false;
    ScriptEntry e;
    if (!j.contains("tick") || !j.at("tick").is_number_integer())
      throw DecodeError(line_field(n, "tick"), "missing or not an integer");
    e.tick = j.at("tick").get<std::int64_t>();
    if (last_tick && e.tick <= *last_tick)
      throw TimeOrderError("line " + std::to_string(n) + ": tick " + std::to_string(e.tick) +
                           " does not follow " + std::to_string(*last_tick));
    last_tick = e.tick;
    if (j.value("pause", false)) {
      e.pause = true;
    } else {
      if (!j.contains("utt") || !j.at("utt").is_string())
        throw DecodeError(line_field(n, "utt"), "missing or not a string");
      e.utt = j.at("utt").get<std::string>();
      if (!seen.insert(e.utt).second)
        throw DecodeError(line_field(n, "utt"), "duplicate utterance id '" + e.utt + "'");
    }
    e.record = std::move(j);
    script.entries.push_back(std::move(e));
  }
  return script;
}

DialogueScript load_script(const std::string& path) { return parse_script(read_file(path)); }

GoldenTrace parse_golden(std::string_view text) {
  GoldenTrace g;
  for (const auto& [n, line] : record_lines(text)) {
    json j = parse_line(n, line);
    const std::string expect = j.value("expect", "");
    if (j.contains("golden")) continue;  // header
    if (expect == "utterance") {
      GoldenUtterance u;
      u.after = j.at("after").get<std::string>();
      for (const auto& a : j.at("acts")) {
        const std::string content = a.value("content", "()");
        u.acts.emplace_back(parse_act_type(a.at("type").get<std::string>()),
                            Term::parse(content));
      }
      g.utterances.push_back(std::move(u));
    } else if (expect == "snapshot") {
      GoldenAnchor a;
      a.anchor = j.value("anchor", "");
      a.utt = j.at("utt").get<std::string>();
      a.step = j.value("step", 0);
      a.context = DiscourseContext::from_json(j.at("context"));
      g.anchors.push_back(std::move(a));
    } else {
      throw DecodeError(line_field(n, "expect"), "expected 'utterance' or 'snapshot'");
    }
  }
  return g;
}

GoldenTrace load_golden(const std::string& path) { return parse_golden(read_file(path)); }

bool IdCorrespondence::bind(const std::string& expected_id, const std::string& actual_id) {
  const auto e = parse_act_id(expected_id);
  const auto a = parse_act_id(actual_id);
  if (!e || !a || e->first != a->first) return false;
  auto f = forward_.find(expected_id);
  auto b = backward_.find(actual_id);
  if (f != forward_.end() || b != backward_.end())
    return f != forward_.end() && f->second == actual_id;
  forward_.emplace(expected_id, actual_id);
  backward_.emplace(actual_id, expected_id);
  return true;
}

bool IdCorrespondence::match(const Term& expected, const Term& actual) {
  if (expected.is_act_ref())
    return actual.is_act_ref() && bind(expected.text(), actual.text());
  if (!expected.is_list()) return expected == actual;
  if (!actual.is_list()) return false;
  const auto& ei = expected.items();
  const auto& ai = actual.items();
  const bool open = !ei.empty() && ei.back().is_symbol("...");
  const std::size_t fixed = open ? ei.size() - 1 : ei.size();
  if (open ? ai.size() < fixed : ai.size() != fixed) return false;
  // Bind tentatively so a failed match leaves no stale correspondences.
  IdCorrespondence trial = *this;
  for (std::size_t i = 0; i < fixed; ++i)
    if (!trial.match(ei[i], ai[i])) return false;
  *this = std::move(trial);
  return true;
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return "[" + out + "]";
}

void diff_terms(const std::string& field, const std::vector<std::string>& expected,
                const std::vector<std::string>& actual, IdCorrespondence& ids,
                std::vector<std::string>& out) {
  bool ok = expected.size() == actual.size();
  for (std::size_t i = 0; ok && i < expected.size(); ++i)
    ok = ids.match(Term::parse(expected[i]), Term::parse(actual[i]));
  if (!ok) out.push_back(field + ": expected " + join(expected) + ", got " + join(actual));
}

}  // namespace

std::vector<std::string> diff_contexts(const DiscourseContext& expected,
                                       const DiscourseContext& actual) {
  std::vector<std::string> out;
  IdCorrespondence ids;
  diff_terms("obligations.SYSTEM", expected.system_obligations, actual.system_obligations, ids,
             out);
  diff_terms("obligations.USER", expected.user_obligations, actual.user_obligations, ids, out);
  if (upper(expected.turn_holder) != upper(actual.turn_holder))
    out.push_back("turn_holder: expected " + expected.turn_holder + ", got " +
                  actual.turn_holder);
  diff_terms("intended_acts", expected.intended_acts, actual.intended_acts, ids, out);
  diff_terms("unacked_acts", expected.unacked_acts, actual.unacked_acts, ids, out);
  diff_terms("unaccepted_proposals", expected.unaccepted_proposals, actual.unaccepted_proposals,
             ids, out);
  std::vector<std::string> eg, ag;
  for (const auto& g : expected.discourse_goals) eg.push_back(upper(g));
  for (const auto& g : actual.discourse_goals) ag.push_back(upper(g));
  if (eg != ag)
    out.push_back("discourse_goals: expected " + join(expected.discourse_goals) + ", got " +
                  join(actual.discourse_goals));
  return out;
}

std::vector<std::string> diff_against_golden(const ReplayResult& run, const GoldenTrace& golden) {
  std::vector<std::string> out;
  IdCorrespondence ids;
  const auto& got = run.system_turns;
  const std::size_t n = std::min(golden.utterances.size(), got.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& exp = golden.utterances[i];
    const auto& ev = got[i].event;
    const std::string where = "system utterance " + std::to_string(i + 1);
    std::string expected_render, actual_render;
    for (const auto& [t, c] : exp.acts) expected_render += " " + render_act(t, c);
    for (const auto& a : ev.acts) actual_render += " " + a.render();
    if (exp.after != got[i].after) {
      out.push_back(where + ": expected after " + exp.after + ", got after " + got[i].after);
      continue;
    }
    bool ok = exp.acts.size() == ev.acts.size();
    for (std::size_t k = 0; ok && k < exp.acts.size(); ++k)
      ok = exp.acts[k].first == ev.acts[k].type && ids.match(exp.acts[k].second, ev.acts[k].content);
    if (!ok)
      out.push_back(where + " (after " + exp.after + "): expected" + expected_render + ", got" +
                    actual_render);
  }
  if (golden.utterances.size() != got.size())
    out.push_back("expected " + std::to_string(golden.utterances.size()) +
                  " system utterances, got " + std::to_string(got.size()));
  for (const auto& a : golden.anchors) {
    auto it = run.contexts.find({a.utt, a.step});
    const std::string where = "snapshot " + (a.anchor.empty() ? a.utt : a.anchor) + " (" + a.utt +
                              "#" + std::to_string(a.step) + ")";
    if (it == run.contexts.end()) {
      out.push_back(where + ": anchor not reached");
      continue;
    }
    for (const auto& d : diff_contexts(a.context, it->second)) out.push_back(where + ": " + d);
  }
  return out;
}

World resolve_world(const std::string& spec, const std::string& data_dir) {
  namespace fs = std::filesystem;
  if (spec.empty() || spec == "default") return default_world();
  if (fs::exists(spec)) return load_world_file(spec);
  const fs::path named = fs::path(data_dir) / "worlds" / (spec + ".world");
  if (fs::exists(named)) return load_world_file(named.string());
  throw Error("unknown world '" + spec + "'");
}

EngineOptions engine_options(const ScriptHeader& header, const RunOverrides& o) {
  EngineOptions opts;
  opts.policy = load_policy(o.policy.value_or(header.policy.value_or("cooperative")));
  if (auto seed = o.seed ? o.seed : header.seed) opts.policy.seed = *seed;
  if (auto k = o.pause_ticks ? o.pause_ticks : header.pause_ticks) {
    if (*k < 1) throw DecodeError("pause_ticks", "must be at least 1");
    opts.policy.pause_threshold = static_cast<int>(*k);
  }
  opts.world = resolve_world(o.world.value_or(header.world.value_or("default")), o.data_dir);
  if (o.rules) opts.rules = load_rules_file(*o.rules);
  return opts;
}

json protocol_record(std::string kind, json payload, std::int64_t tick) {
  return {{"kind", std::move(kind)}, {"payload", std::move(payload)}, {"tick", tick}};
}

json utterance_payload(const UtteranceEvent& ev) {
  json acts = json::array();
  for (const auto& a : ev.acts)
    acts.push_back({{"id", a.id()}, {"type", to_string(a.type)}, {"content", a.content.str()}});
  return {{"utt", ev.utt_id},
          {"speaker", to_string(ev.speaker)},
          {"acts", std::move(acts)},
          {"turn", to_string(ev.turn_effect)},
          {"text", ev.text}};
}

namespace {

json snapshot_payload(const std::string& label, int step, const DiscourseContext& c) {
  return {{"utt", label}, {"step", step}, {"context", c.to_json()}};
}

json error_payload(const std::exception& e) {
  json p = {{"message", e.what()}};
  if (const auto* d = dynamic_cast<const DecodeError*>(&e)) p["field"] = d->field();
  return p;
}

}  // namespace

ProtocolSession::ProtocolSession(EngineOptions opts) : engine_(std::move(opts)) {
  engine_.set_observer([this](const std::string& label, int step, const ActorDecision* d,
                              const DiscourseState& s) { observe(label, step, d, s); });
  const DiscourseContext initial = engine_.context();
  contexts_[{"initial", 0}] = initial;
  snapshot_marks_.emplace_back(0, snapshot_payload("initial", 0, initial));
}

void ProtocolSession::observe(const std::string& label, int step, const ActorDecision* d,
                              const DiscourseState& s) {
  if (d) {
    if (sink_)
      sink_->push_back(protocol_record("decision",
                                       {{"utt", label},
                                        {"step", step},
                                        {"decision", to_string(d->kind)},
                                        {"tier", static_cast<int>(tier_of(d->kind))},
                                        {"note", d->note}},
                                       s.tick));
    for (const auto& u : d->utterances) {
      turns_.push_back({label, u});
      if (sink_) {
        json p = utterance_payload(u);
        p["after"] = label;
        sink_->push_back(protocol_record("utterance", std::move(p), s.tick));
      }
    }
  }
  const DiscourseContext c = snapshot(s);
  json p = snapshot_payload(label, step, c);
  contexts_[{label, step}] = c;
  snapshot_marks_.emplace_back(s.trace().size(), p);
  if (sink_) sink_->push_back(protocol_record("snapshot", std::move(p), s.tick));
}

std::vector<json> ProtocolSession::hello() const {
  const auto it = contexts_.find({"initial", 0});
  return {protocol_record("hello",
                          {{"protocol", 1}, {"policy", engine_.policy().to_json()}}, 0),
          protocol_record("snapshot", snapshot_payload("initial", 0, it->second), 0)};
}

std::vector<json> ProtocolSession::dispatch(const json& m) {
  std::vector<json> out;
  if (!m.is_object()) throw DecodeError("message", "expected an object");
  if (!m.contains("kind") || !m.at("kind").is_string())
    throw DecodeError("kind", "missing or not a string");
  const std::string kind = m.at("kind").get<std::string>();
  const json payload = m.value("payload", json::object());
  if (ended_) throw Error("session has ended");
  sink_ = &out;
  struct Unset {
    std::vector<json>*& p;
    ~Unset() { p = nullptr; }
  } unset{sink_};
  if (kind == "user-event") {
    if (!payload.is_object()) throw DecodeError("payload", "expected a script record");
    json record = payload;
    if (!record.contains("tick") && m.contains("tick")) record["tick"] = m.at("tick");
    engine_.ingest_record(record);
  } else if (kind == "pause") {
    const json& t = m.contains("tick") ? m.at("tick") : payload.value("tick", json());
    if (!t.is_number_integer()) throw DecodeError("tick", "missing or not an integer");
    engine_.advance_to(t.get<std::int64_t>());
  } else if (kind == "finish") {
    engine_.finish();
    ended_ = true;
    std::size_t violations = 0;
    for (const auto& r : engine_.trace()) violations += r.value("type", "") == "violation";
    out.push_back(protocol_record("end",
                                  {{"violations", violations},
                                   {"context", engine_.context().to_json()}},
                                  engine_.tick()));
  } else if (kind == "snapshot") {
    out.push_back(protocol_record(
        "snapshot", snapshot_payload("current", 0, engine_.context()), engine_.tick()));
  } else {
    throw DecodeError("kind", "unknown message kind '" + kind + "'");
  }
  return out;
}

std::vector<json> ProtocolSession::handle(const json& message) {
  try {
    return dispatch(message);
  } catch (const std::exception& e) {
    return {protocol_record("error", error_payload(e), engine_.tick())};
  }
}

std::vector<json> ProtocolSession::handle_line(std::string_view line) {
  json m;
  try {
    m = json::parse(line);
  } catch (const json::parse_error& e) {
    return {protocol_record("error", {{"message", std::string("malformed record: ") + e.what()}},
                            engine_.tick())};
  }
  return handle(m);
}

std::vector<json> ProtocolSession::merged_trace() const {
  const auto engine_trace = engine_.trace();
  std::vector<json> out;
  std::size_t next = 0;
  for (const auto& [pos, snap] : snapshot_marks_) {
    for (; next < pos && next < engine_trace.size(); ++next) out.push_back(engine_trace[next]);
    json r = {{"type", "snapshot"}};
    r.update(snap);
    out.push_back(std::move(r));
  }
  for (; next < engine_trace.size(); ++next) out.push_back(engine_trace[next]);
  return out;
}

ReplayResult replay(const DialogueScript& script, const EngineOptions& opts,
                    const GoldenTrace* golden) {
  const auto start = std::chrono::steady_clock::now();
  ReplayResult r;
  ProtocolSession session(opts);
  r.transcript = session.hello();
  auto send = [&](const json& m) {
    for (auto& rec : session.handle(m)) {
      if (rec.at("kind") == "error")
        throw Error("replay failed: " + rec.at("payload").at("message").get<std::string>());
      r.transcript.push_back(std::move(rec));
    }
  };
  for (const auto& e : script.entries) {
    if (e.pause)
      send(protocol_record("pause", json::object(), e.tick));
    else
      send(protocol_record("user-event", e.record, e.tick));
  }
  send(protocol_record("finish", json::object(), session.engine().tick()));
  r.system_turns = session.system_turns();
  r.contexts = session.contexts();
  r.trace = session.merged_trace();
  r.final_world = session.engine().world().kb;
  r.final_context = session.engine().context();
  if (golden) r.diffs = diff_against_golden(r, *golden);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

json parse_command(std::string_view line, const std::string& utt, std::int64_t tick) {
  std::string text(line);
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
  };
  text = trim(text);
  if (text.empty()) throw ParseError("empty command");
  std::string turn = "release";
  const auto last_space = text.find_last_of(" \t");
  if (last_space != std::string::npos) {
    const std::string tail = upper(text.substr(last_space + 1));
    if (tail == "KEEP" || tail == "RELEASE") {
      turn = tail == "KEEP" ? "keep" : "release";
      text = trim(text.substr(0, last_space));
    }
  }
  // getline yields no token after a trailing separator.
  if (text.back() == '|') throw ParseError("empty act between '|'");
  json acts = json::array();
  std::stringstream parts(text);
  std::string part;
  while (std::getline(parts, part, '|')) {
    part = trim(part);
    if (part.empty()) throw ParseError("empty act between '|'");
    const auto sp = part.find_first_of(" \t");
    std::string head = part.substr(0, sp);
    const std::string content = sp == std::string::npos ? "" : trim(part.substr(sp));
    json marks = json::array();
    for (;;) {
      if (head.size() > 1 && head.back() == '!') {
        marks.push_back("imperative");
        head.pop_back();
      } else if (head.size() > 5 && upper(head.substr(head.size() - 5)) == "+GOAL") {
        marks.push_back("goal-stating");
        head.resize(head.size() - 5);
      } else {
        break;
      }
    }
    head = upper(head);
    if (head == "RELEASE") head = "RELEASE-TURN";
    const ActType type = parse_act_type(head);
    json act = {{"type", to_string(type)}};
    if (!content.empty()) {
      if (content.front() != '@') Term::parse(content);  // reject malformed terms up front
      act["content"] = content;
    }
    if (!marks.empty()) act["marks"] = std::move(marks);
    acts.push_back(std::move(act));
  }
  return {{"utt", utt}, {"speaker", "USER"}, {"tick", tick}, {"turn", turn}, {"acts", acts}};
}

std::string command_help() {
  return "Enter one utterance per line as acts separated by '|':\n"
         "  TYPE[!][+goal] [content] [| TYPE ...] [keep|release]\n"
         "  TYPE      act token, e.g. inform, ynq, whq, check, request, suggest,\n"
         "            accept, reject, ack, release\n"
         "  !         imperative mood (an INFORM of an action becomes a REQUEST)\n"
         "  +goal     goal-stating (an INFORM of a goal becomes a SUGGEST)\n"
         "  content   a term such as (:AT ORANGES CORNING), or @N for the content\n"
         "            of your utterance N; omit it on ack/accept/reject to refer to\n"
         "            whatever the system last said\n"
         "  keep      hold the turn (default is release)\n"
         "Examples:\n"
         "  inform+goal (MUST (MOVE-COMMODITY ORANGES BATH))\n"
         "  inform (:AT ORANGES CORNING) keep\n"
         "  check @2\n"
         "  inform! (LOAD ORANGES BOXCAR-B1 CORNING)\n"
         "  ack | accept\n"
         "Commands: :state  :help  :quit\n";
}

void append_jsonl(const std::string& path, const std::vector<json>& records) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for appending");
  for (const auto& r : records) out << r.dump() << '\n';
}

}  // namespace discourse
