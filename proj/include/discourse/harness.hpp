#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "discourse/engine.hpp"

#ifndef DISCOURSE_DATA_DIR
#define DISCOURSE_DATA_DIR "data"
#endif

namespace discourse {

struct ScriptHeader {
  int version = 1;
  std::string name;
  std::optional<std::string> world;   ///< "default", a data/worlds name, or a path
  std::optional<std::string> policy;  ///< preset name or path
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> pause_ticks;
};

struct ScriptEntry {
  bool pause = false;
  std::int64_t tick = 0;
  std::string utt;  ///< empty for pauses
  nlohmann::json record;
};

struct DialogueScript {
  ScriptHeader header;
  std::vector<ScriptEntry> entries;
};

/// JSONL with an optional `{"script":1,...}` header line. Blank lines and
/// lines starting with `#` are skipped. Ticks must strictly increase and utt
/// ids must be unique.
DialogueScript parse_script(std::string_view text);
DialogueScript load_script(const std::string& path);

struct GoldenUtterance {
  std::string after;  ///< user utt (or pause label) the system was responding to
  std::vector<std::pair<ActType, Term>> acts;
};

struct GoldenAnchor {
  std::string anchor;
  std::string utt;
  int step = 0;
  DiscourseContext context;
};

struct GoldenTrace {
  std::vector<GoldenUtterance> utterances;
  std::vector<GoldenAnchor> anchors;
};

GoldenTrace parse_golden(std::string_view text);
GoldenTrace load_golden(const std::string& path);

/// Structural term equality where act ids correspond one-to-one (same type,
/// any number) and a trailing `...` in `expected` matches any remainder.
class IdCorrespondence {
 public:
  bool match(const Term& expected, const Term& actual);

 private:
  bool bind(const std::string& expected_id, const std::string& actual_id);
  std::map<std::string, std::string> forward_;
  std::map<std::string, std::string> backward_;
};

/// Field-by-field comparison; empty when equal. Turn holder and goal tokens
/// compare case-insensitively.
std::vector<std::string> diff_contexts(const DiscourseContext& expected,
                                       const DiscourseContext& actual);

struct SystemTurn {
  std::string after;
  UtteranceEvent event;
};

struct ReplayResult {
  std::vector<SystemTurn> system_turns;
  std::vector<nlohmann::json> transcript;  ///< protocol records, in emission order
  std::map<std::pair<std::string, int>, DiscourseContext> contexts;  ///< (label, step)
  std::vector<nlohmann::json> trace;
  std::vector<std::string> diffs;
  WorldKB final_world;
  DiscourseContext final_context;
  double seconds = 0;

  bool matched() const { return diffs.empty(); }
};

/// Resolves `default`, a bare name under the data directory, or a path.
World resolve_world(const std::string& spec, const std::string& data_dir);

/// Effective engine options: header values, then explicit overrides.
struct RunOverrides {
  std::optional<std::string> world;
  std::optional<std::string> policy;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> pause_ticks;
  std::optional<std::string> rules;
  std::string data_dir = DISCOURSE_DATA_DIR;
};
EngineOptions engine_options(const ScriptHeader& header, const RunOverrides& o);

ReplayResult replay(const DialogueScript& script, const EngineOptions& opts,
                    const GoldenTrace* golden = nullptr);

/// Compares a finished run against the golden trace.
std::vector<std::string> diff_against_golden(const ReplayResult& run, const GoldenTrace& golden);

/// One protocol conversation. Both serve mode and replay drive the engine
/// through this, so they emit identical records for identical input.
class ProtocolSession {
 public:
  explicit ProtocolSession(EngineOptions opts);

  /// Handles one client record `{kind, payload, tick}`; returns engine records.
  std::vector<nlohmann::json> handle(const nlohmann::json& message);
  /// Parses and handles one line. Malformed input yields an error record.
  std::vector<nlohmann::json> handle_line(std::string_view line);

  std::vector<nlohmann::json> hello() const;
  Engine& engine() { return engine_; }
  const std::vector<SystemTurn>& system_turns() const { return turns_; }
  const std::map<std::pair<std::string, int>, DiscourseContext>& contexts() const {
    return contexts_;
  }
  bool ended() const { return ended_; }

  /// Engine trace with snapshot records spliced in where they were taken.
  std::vector<nlohmann::json> merged_trace() const;

 private:
  void observe(const std::string& label, int step, const ActorDecision* d,
               const DiscourseState& s);
  std::vector<nlohmann::json> dispatch(const nlohmann::json& message);

  Engine engine_;
  std::vector<nlohmann::json>* sink_ = nullptr;
  std::vector<SystemTurn> turns_;
  std::map<std::pair<std::string, int>, DiscourseContext> contexts_;
  std::vector<std::pair<std::size_t, nlohmann::json>> snapshot_marks_;
  bool ended_ = false;
};

nlohmann::json protocol_record(std::string kind, nlohmann::json payload, std::int64_t tick);

/// Listens on `host:port`, `:port` or `port` (port 0 picks a free one) and
/// serves exactly one client per call to serve_one().
class ProtocolServer {
 public:
  ProtocolServer(EngineOptions opts, const std::string& address);
  ~ProtocolServer();
  ProtocolServer(const ProtocolServer&) = delete;
  ProtocolServer& operator=(const ProtocolServer&) = delete;

  std::uint16_t port() const { return port_; }
  /// Blocks until a client connects, then runs its session until it hangs up.
  /// Returns the session's merged trace.
  std::vector<nlohmann::json> serve_one();

 private:
  EngineOptions opts_;
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

nlohmann::json utterance_payload(const UtteranceEvent& ev);

/// Parses the interactive act mini-syntax into a script record, e.g.
/// `check (:AT ORANGES CORNING)`, `inform+goal (MUST (X)) keep`,
/// `inform! (LOAD ...) | ynq @3`, `ack`, `release`.
nlohmann::json parse_command(std::string_view line, const std::string& utt, std::int64_t tick);

std::string command_help();

/// Appends records to a JSONL file.
void append_jsonl(const std::string& path, const std::vector<nlohmann::json>& records);

}  // namespace discourse
