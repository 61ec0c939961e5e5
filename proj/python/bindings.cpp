#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slewshape/batch.hpp"
#include "slewshape/config.hpp"
#include "slewshape/session.hpp"
#include "slewshape/shaper.hpp"
#include "slewshape/stability.hpp"

namespace py = pybind11;
using namespace slewshape;
using nlohmann::json;

namespace {

std::string state_json(const SimState& s) {
  return json{{"t", s.time},
              {"alpha", s.slew.alpha},
              {"alpha_dot", s.slew.rate},
              {"theta1", s.swing.theta1},
              {"theta2", s.swing.theta2},
              {"tip_margin", s.tip_margin},
              {"payload_x", s.payload_xy[0]},
              {"payload_y", s.payload_xy[1]},
              {"tipped", s.tipped}}
      .dump();
}

std::vector<std::pair<double, double>> impulses(const ShaperSpec& s) {
  std::vector<std::pair<double, double>> out;
  for (const auto& i : s.impulses) out.emplace_back(i.time, i.amplitude);
  return out;
}

ShaperSpec spec_from(const std::vector<std::pair<double, double>>& pairs) {
  ShaperSpec s;
  for (const auto& [t, a] : pairs) s.impulses.push_back({t, a});
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Crane slewing simulator and input-shaping toolkit";

  m.def("natural_frequency", &natural_frequency, py::arg("rope_length"), py::arg("gravity") = 9.81);
  m.def(
      "design_mumzv", [](double omega, double d) { return impulses(design_mumzv(omega, d)); }, py::arg("omega"),
      py::arg("deflection_ratio"), "(time, amplitude) pairs of the three-impulse shaper");
  m.def(
      "residual_vibration",
      [](const std::vector<std::pair<double, double>>& imp, double omega) {
        return residual_vibration(spec_from(imp), omega);
      },
      py::arg("impulses"), py::arg("omega"));
  m.def("speed_scaling", &speed_scaling, py::arg("full_scale_rate"), py::arg("full_scale_frequency"),
        py::arg("model_frequency"));

  m.def("default_config", [] { return to_json(AnalysisConfig{}).dump(); });
  m.def(
      "normalize_config", [](const std::string& text) { return to_json(analysis_from_json(json::parse(text))).dump(); },
      py::arg("config_json"));
  m.def(
      "fingerprint", [](const std::string& text) { return fingerprint(analysis_from_json(json::parse(text))); },
      py::arg("config_json"));
  m.def(
      "static_load_limit",
      [](double radius, double boom_length, const std::string& crane) {
        return static_load_limit(radius, boom_length, crane_from_json(json::parse(crane)));
      },
      py::arg("radius"), py::arg("boom_length"), py::arg("crane_json") = "{}");
  m.def(
      "run_analysis",
      [](const std::string& kind, const std::string& config) {
        const auto k = parse_analysis_kind(kind);
        const auto cfg = analysis_from_json(json::parse(config));
        std::vector<Artifact> out;
        {
          py::gil_scoped_release release;
          out = run_analysis(k, cfg);
        }
        std::vector<std::tuple<std::string, std::size_t, std::string>> rows;
        for (auto& a : out) rows.emplace_back(a.name, a.rows, std::move(a.content));
        return rows;
      },
      py::arg("kind"), py::arg("config_json") = "{}");

  m.def(
      "run_trial",
      [](const std::string& scenario, double rate, bool shaped) {
        const Scenario sc = scenario_from_json(json::parse(scenario));
        const TrialRecord rec = run_automated_trial(sc, rate, shaped);
        json j = to_json(rec.metrics);
        j["outcome"] = to_string(rec.outcome);
        std::ostringstream states;
        write_state_csv(states, rec.states);
        j["states_csv"] = states.str();
        return j.dump();
      },
      py::arg("scenario_json"), py::arg("rate"), py::arg("shaped"));

  py::class_<LiveSession>(m, "LiveSession")
      .def(py::init([](const std::string& scenario, bool shaped) {
             return LiveSession(scenario_from_json(json::parse(scenario)), shaped);
           }),
           py::arg("scenario_json"), py::arg("shaped"))
      .def(
          "step", [](LiveSession& s, double joystick, double now) { return state_json(s.step_interactive(joystick, now)); },
          py::arg("joystick"), py::arg("now"))
      .def("abort", &LiveSession::abort)
      .def_property_readonly("phase", [](const LiveSession& s) { return to_string(s.phase()); })
      .def_property_readonly("terminal", &LiveSession::terminal)
      .def_property_readonly("shaped", &LiveSession::shaped)
      .def_property_readonly("commanded_rate", &LiveSession::commanded_rate)
      .def_property_readonly("dropped_time", &LiveSession::dropped_time)
      .def("state", [](const LiveSession& s) { return state_json(s.state()); })
      .def("metrics", [](const LiveSession& s) { return to_json(s.metrics()).dump(); });
}
