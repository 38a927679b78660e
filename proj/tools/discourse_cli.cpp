#include <poll.h>
#include <unistd.h>

#include <chrono>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>

#include "discourse/errors.hpp"
#include "discourse/harness.hpp"

using namespace discourse;
using nlohmann::json;

namespace {

struct Flags {
  std::string script;
  std::string golden;
  std::string trace;
  std::string listen;
  bool jsonl = false;
  bool panel = false;
  RunOverrides overrides;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--policy", f.overrides.policy,
                  "cooperative, guarded, adversarial, permissive, or a policy JSON file");
  cmd->add_option("--seed", f.overrides.seed, "RNG seed for randomized choice modes");
  cmd->add_option("--pause-ticks", f.overrides.pause_ticks,
                  "Ticks of silence that count as a long pause")
      ->check(CLI::Range(std::int64_t{1}, std::numeric_limits<std::int64_t>::max()));
  cmd->add_option("--world", f.overrides.world, "World name under data/worlds or a world file");
  cmd->add_option("--rules", f.overrides.rules, "Obligation rule file (default: built-in table)");
  cmd->add_option("--trace", f.trace, "Append the trace to this JSONL file");
}

void write_trace(const Flags& f, const std::string& name, const std::vector<json>& trace) {
  if (f.trace.empty()) return;
  std::vector<json> records{{{"trace", 1}, {"script", name}}};
  records.insert(records.end(), trace.begin(), trace.end());
  append_jsonl(f.trace, records);
}

std::string render_acts(const UtteranceEvent& ev) {
  std::string out;
  for (const auto& a : ev.acts) out += (out.empty() ? "" : " ") + a.render();
  return out;
}

void print_turn(const UtteranceEvent& ev) {
  std::cout << "SYSTEM [" << ev.utt_id << "] " << (ev.text.empty() ? "-" : ev.text) << "\n    "
            << render_acts(ev) << (ev.turn_effect == TurnEffect::Keep ? "  (keeps turn)" : "")
            << "\n";
}

int run_replay(const Flags& f) {
  const DialogueScript script = load_script(f.script);
  const EngineOptions opts = engine_options(script.header, f.overrides);
  std::optional<GoldenTrace> golden;
  if (!f.golden.empty()) golden = load_golden(f.golden);
  const ReplayResult r = replay(script, opts, golden ? &*golden : nullptr);
  write_trace(f, script.header.name, r.trace);
  if (f.jsonl) {
    for (const auto& rec : r.transcript) std::cout << rec.dump() << "\n";
  } else {
    for (const auto& t : r.system_turns) {
      std::cout << "(after " << t.after << ") ";
      print_turn(t.event);
    }
  }
  if (!golden) return 0;
  if (r.matched()) {
    std::cerr << "golden: match, " << r.system_turns.size() << " system utterances, "
              << golden->anchors.size() << " snapshots\n";
    return 0;
  }
  std::cerr << "golden: " << r.diffs.size() << " difference(s); first divergence:\n  "
            << r.diffs.front() << "\n";
  for (std::size_t i = 1; i < r.diffs.size(); ++i) std::cerr << "  " << r.diffs[i] << "\n";
  return 1;
}

void print_records(const std::vector<json>& records, bool panel) {
  for (const auto& r : records) {
    const std::string kind = r.at("kind");
    const json& p = r.at("payload");
    if (kind == "utterance") {
      std::string acts;
      for (const auto& a : p.at("acts"))
        acts += (acts.empty() ? "" : " ") + render_act(parse_act_type(a.at("type").get<std::string>()),
                                                       Term::parse(a.at("content").get<std::string>()));
      std::cout << "SYSTEM [" << p.at("utt").get<std::string>() << "] "
                << p.at("text").get<std::string>() << "\n    " << acts << "\n";
    } else if (kind == "error") {
      std::cout << "error: " << p.at("message").get<std::string>() << "\n" << command_help();
    } else if (kind == "end") {
      std::cout << "-- dialogue ended, " << p.at("violations") << " violation(s)\n";
    }
  }
  if (panel) {
    for (auto it = records.rbegin(); it != records.rend(); ++it)
      if (it->at("kind") == "snapshot") {
        std::cout << DiscourseContext::from_json(it->at("payload").at("context")).pretty();
        break;
      }
  }
}

int run_interact(const Flags& f) {
  DialogueScript script;
  if (!f.script.empty()) script = load_script(f.script);
  ProtocolSession session(engine_options(script.header, f.overrides));
  const auto start = std::chrono::steady_clock::now();
  std::int64_t tick = 0;
  // One tick per wall-clock second, never repeating.
  auto next_tick = [&] {
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    tick = std::max<std::int64_t>(tick + 1, secs + 1);
    return tick;
  };
  for (const auto& e : script.entries) {
    tick = std::max(tick, e.tick);
    json m = protocol_record(e.pause ? "pause" : "user-event",
                             e.pause ? json::object() : e.record, e.tick);
    print_records(session.handle(m), false);
  }
  std::cout << "Act-level conversation. Type :help for the syntax.\n" << std::flush;
  int utt = 0;
  std::string line;
  std::int64_t last_wall_tick = tick;
  for (;;) {
    pollfd pfd{STDIN_FILENO, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 1000);
    if (ready == 0) {
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
      if (secs + 1 > last_wall_tick && !session.ended()) {
        last_wall_tick = secs + 1;
        if (last_wall_tick > tick) {
          tick = last_wall_tick;
          print_records(session.handle(protocol_record("pause", json::object(), tick)), false);
          std::cout << std::flush;
        }
      }
      continue;
    }
    if (!std::getline(std::cin, line)) break;
    if (line == ":quit") break;
    if (line == ":help") {
      std::cout << command_help();
      continue;
    }
    if (line == ":state") {
      std::cout << session.engine().context().pretty();
      continue;
    }
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json record;
    try {
      record = parse_command(line, "u" + std::to_string(utt + 1), next_tick());
    } catch (const Error& e) {
      std::cout << "error: " << e.what() << "\n" << command_help();
      continue;
    }
    const auto out = session.handle(protocol_record("user-event", record, tick));
    if (out.empty() || out.front().at("kind") != "error") ++utt;
    print_records(out, f.panel);
    std::cout << std::flush;
  }
  if (!session.ended())
    print_records(session.handle(protocol_record("finish", json::object(), tick)), f.panel);
  write_trace(f, script.header.name.empty() ? "interactive" : script.header.name,
              session.merged_trace());
  return 0;
}

int run_serve(const Flags& f) {
  DialogueScript script;
  if (!f.script.empty()) script = load_script(f.script);
  ProtocolServer server(engine_options(script.header, f.overrides), f.listen);
  std::cerr << "listening on port " << server.port() << "\n";
  const auto trace = server.serve_one();
  write_trace(f, "serve", trace);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Obligation-driven discourse engine"};
  app.require_subcommand(1);
  Flags f;

  auto* rep = app.add_subcommand("replay", "Replay a dialogue script, optionally against a golden trace");
  rep->add_option("--script", f.script, "Script JSONL file")->required()->check(CLI::ExistingFile);
  rep->add_option("--golden", f.golden, "Golden trace JSONL file")->check(CLI::ExistingFile);
  rep->add_flag("--jsonl", f.jsonl, "Print protocol records instead of a readable transcript");
  add_common(rep, f);

  auto* inter = app.add_subcommand("interact", "Converse at the act level on the terminal");
  inter->add_option("--script", f.script, "Script to play before going live")->check(CLI::ExistingFile);
  inter->add_flag("--panel", f.panel, "Print the discourse context after every turn");
  add_common(inter, f);

  auto* srv = app.add_subcommand("serve", "Serve one protocol client over TCP");
  srv->add_option("--listen", f.listen, "host:port, :port or port")->required();
  srv->add_option("--script", f.script, "Script whose header configures the engine")
      ->check(CLI::ExistingFile);
  add_common(srv, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version exit 0; usage errors share the generic failure code.
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    if (rep->parsed()) return run_replay(f);
    if (inter->parsed()) return run_interact(f);
    return run_serve(f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
