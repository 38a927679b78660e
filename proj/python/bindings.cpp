// Python bindings. Records cross the boundary as JSON text; the package's
// __init__ decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "discourse/errors.hpp"
#include "discourse/harness.hpp"

namespace py = pybind11;
using namespace discourse;

namespace {

RunOverrides overrides(std::optional<std::string> policy, std::optional<std::string> world,
                       std::optional<std::uint64_t> seed, std::optional<std::int64_t> pause_ticks) {
  RunOverrides o;
  o.policy = std::move(policy);
  o.world = std::move(world);
  o.seed = seed;
  o.pause_ticks = pause_ticks;
  return o;
}

std::vector<std::string> dump_all(const std::vector<nlohmann::json>& records) {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.dump());
  return out;
}

class Session {
 public:
  Session(std::optional<std::string> policy, std::optional<std::string> world,
          std::optional<std::uint64_t> seed, std::optional<std::int64_t> pause_ticks)
      : session_(engine_options(ScriptHeader{}, overrides(std::move(policy), std::move(world),
                                                          seed, pause_ticks))) {}

  std::vector<std::string> hello() const { return dump_all(session_.hello()); }
  std::vector<std::string> handle_line(const std::string& line) {
    return dump_all(session_.handle_line(line));
  }
  bool ended() const { return session_.ended(); }
  std::vector<std::string> trace() const { return dump_all(session_.merged_trace()); }
  std::string context() { return session_.engine().context().to_json().dump(); }

 private:
  ProtocolSession session_;
};

std::string run_replay(const std::string& script_path, std::optional<std::string> golden_path,
                       std::optional<std::string> policy, std::optional<std::string> world,
                       std::optional<std::uint64_t> seed, std::optional<std::int64_t> pause_ticks) {
  const auto script = load_script(script_path);
  const auto opts = engine_options(script.header, overrides(std::move(policy), std::move(world),
                                                            seed, pause_ticks));
  std::optional<GoldenTrace> golden;
  if (golden_path) golden = load_golden(*golden_path);
  const auto r = replay(script, opts, golden ? &*golden : nullptr);
  nlohmann::json out = {{"transcript", r.transcript},
                        {"diffs", r.diffs},
                        {"system_turns", r.system_turns.size()},
                        {"seconds", r.seconds},
                        {"final_context", r.final_context.to_json()}};
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Obligation-driven discourse engine";

  auto base = py::register_exception<Error>(m, "DiscourseError", PyExc_ValueError);
  py::register_exception<DecodeError>(m, "DecodeError", base.ptr());

  py::class_<Session>(m, "Session")
      .def(py::init<std::optional<std::string>, std::optional<std::string>,
                    std::optional<std::uint64_t>, std::optional<std::int64_t>>(),
           py::arg("policy") = py::none(), py::arg("world") = py::none(),
           py::arg("seed") = py::none(), py::arg("pause_ticks") = py::none())
      .def("hello", &Session::hello)
      .def("handle_line", &Session::handle_line, py::arg("line"))
      .def("trace", &Session::trace)
      .def("context", &Session::context)
      .def_property_readonly("ended", &Session::ended);

  m.def("replay", &run_replay, py::arg("script"), py::arg("golden") = py::none(),
        py::arg("policy") = py::none(), py::arg("world") = py::none(),
        py::arg("seed") = py::none(), py::arg("pause_ticks") = py::none());

  m.def(
      "kb_query",
      [](const std::string& proposition, const std::string& world) {
        const World w = resolve_world(world, DISCOURSE_DATA_DIR);
        return std::string(to_string(kb_query(w.kb, Term::parse(proposition))));
      },
      py::arg("proposition"), py::arg("world") = "default");

  m.def("parse_term", [](const std::string& text) { return Term::parse(text).str(); });

  m.def(
      "parse_command",
      [](const std::string& line, const std::string& utt, std::int64_t tick) {
        return parse_command(line, utt, tick).dump();
      },
      py::arg("line"), py::arg("utt"), py::arg("tick"));

  m.attr("DATA_DIR") = DISCOURSE_DATA_DIR;
}
