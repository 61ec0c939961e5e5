#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <pthread.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "slewshape/batch.hpp"
#include "slewshape/config.hpp"
#include "slewshape/service.hpp"
#include "slewshape/session.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slewshape;

namespace {

struct BatchArgs {
  std::string config;
  std::string out = "out";
  std::vector<std::string> overrides;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

AnalysisConfig effective_config(const BatchArgs& a, std::string& used_path) {
  used_path = a.config;
  if (used_path.empty() && fs::exists(SLEWSHAPE_DEFAULT_CONFIG)) used_path = SLEWSHAPE_DEFAULT_CONFIG;
  const AnalysisConfig base = used_path.empty() ? AnalysisConfig{} : load_analysis_config(used_path);
  return apply_overrides(base, a.overrides);
}

int run_batch(const std::vector<AnalysisKind>& kinds, const std::string& command, const BatchArgs& a) {
  std::string config_path;
  const AnalysisConfig cfg = effective_config(a, config_path);
  fs::create_directories(a.out);
  json artifacts = json::array();
  for (AnalysisKind k : kinds) {
    for (const auto& art : run_analysis(k, cfg)) {
      write_file(fs::path(a.out) / art.name, art.content);
      artifacts.push_back({{"name", art.name}, {"rows", art.rows}});
      std::cout << (fs::path(a.out) / art.name).string() << ": " << art.rows << " rows\n";
    }
  }
  const json manifest{{"command", command},
                      {"config_path", config_path},
                      {"output_dir", a.out},
                      {"overrides", a.overrides},
                      {"config_fingerprint", fingerprint(cfg)},
                      {"config", to_json(cfg)},
                      {"artifacts", artifacts}};
  write_file(fs::path(a.out) / "manifest.json", manifest.dump(2) + "\n");
  return 0;
}

struct TrialArgs {
  std::string scenario;
  std::string out = "out";
  bool shaped = false;
  std::optional<double> rate_deg_s;
};

int run_trial(const TrialArgs& a) {
  const Scenario sc = load_scenario(a.scenario);
  const double rate = a.rate_deg_s ? *a.rate_deg_s * kDegree : sc.cfg.speed_limit;
  if (!(rate >= 0.0) || rate > sc.cfg.speed_limit * (1.0 + 1e-12)) {
    throw ConfigError("rate-deg-s", "must lie in [0, " + std::to_string(sc.cfg.speed_limit / kDegree) + "]");
  }
  const TrialRecord rec = run_automated_trial(sc, rate, a.shaped);
  fs::create_directories(a.out);
  std::ostringstream commands, states;
  write_commands_csv(commands, rec);
  write_state_csv(states, rec.states);
  write_file(fs::path(a.out) / "commands.csv", commands.str());
  write_file(fs::path(a.out) / "states.csv", states.str());
  json metrics = to_json(rec.metrics);
  metrics["outcome"] = to_string(rec.outcome);
  metrics["scenario"] = sc.id;
  metrics["shaped"] = a.shaped;
  metrics["rate_deg_s"] = rate / kDegree;
  write_file(fs::path(a.out) / "metrics.json", metrics.dump(2) + "\n");
  const json manifest{{"command", "trial"},
                      {"scenario_path", a.scenario},
                      {"output_dir", a.out},
                      {"shaped", a.shaped},
                      {"rate_deg_s", rate / kDegree},
                      {"config_fingerprint", fingerprint(to_json(sc))},
                      {"artifacts", {"commands.csv", "states.csv", "metrics.json"}}};
  write_file(fs::path(a.out) / "manifest.json", manifest.dump(2) + "\n");

  std::printf("scenario %s, %s, %.4g deg/s: %s\n", sc.id.c_str(), a.shaped ? "shaped" : "unshaped", rate / kDegree,
              to_string(rec.outcome).c_str());
  std::printf("MS = %.3f deg  CR = %d  CT = %s  tipped = %s\n", rec.metrics.max_swing_deg, rec.metrics.collisions,
              rec.metrics.completion_time ? (std::to_string(*rec.metrics.completion_time) + " s").c_str() : "n/a",
              rec.metrics.tipped ? "yes" : "no");
  return 0;
}

int run_serve(ServiceOptions opts) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service svc(opts);
  const unsigned short port = svc.start();
  std::cout << "listening on http://" << opts.address << ":" << port << " (" << svc.scenario_count()
            << " scenarios from " << opts.scenario_dir << ")" << std::endl;
  std::thread worker([&] { svc.run(); });
  int sig = 0;
  sigwait(&signals, &sig);
  svc.stop();
  worker.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crane slewing simulator and input-shaping toolkit"};
  app.require_subcommand(1);

  BatchArgs batch;
  const std::vector<std::pair<std::string, std::string>> batch_cmds{
      {"loadchart", "Static load chart over the radius and boom-length grids"},
      {"failmap", "Dynamic failure map, unshaped and shaped"},
      {"speedlimits", "Maximum safe slew speed per (R, m_max) pair"},
      {"compare", "Shaped vs unshaped completion time at the maximum safe speeds"},
      {"all", "Run all four batch analyses"}};
  std::map<std::string, CLI::App*> batch_apps;
  for (const auto& [name, help] : batch_cmds) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", batch.config, "Analysis config (JSON)")->envname("SLEWSHAPE_CONFIG");
    sub->add_option("--out", batch.out, "Output directory")->capture_default_str();
    sub->add_option("--set", batch.overrides, "Override a config field, e.g. crane.payload_mass=0.4");
    batch_apps[name] = sub;
  }

  TrialArgs trial;
  double rate = 0.0;
  auto* trial_app = app.add_subcommand("trial", "Automated trial on a scenario file");
  trial_app->add_option("scenario", trial.scenario, "Scenario file (JSON)")->required();
  trial_app->add_flag("--shaped", trial.shaped, "Plan a shaped rest-to-rest maneuver");
  auto* rate_opt = trial_app->add_option("--rate-deg-s", rate, "Slew rate in deg/s (default: speed limit)");
  trial_app->add_option("--out", trial.out, "Output directory")->capture_default_str();

  ServiceOptions serve;
  serve.scenario_dir = SLEWSHAPE_DEFAULT_SCENARIOS;
  int port = serve.port;
  auto* serve_app = app.add_subcommand("serve", "Serve live sessions and analyses over HTTP and WebSocket");
  serve_app->add_option("--port", port, "TCP port (0 picks a free one)")->envname("SLEWSHAPE_PORT")->capture_default_str();
  serve_app->add_option("--scenarios", serve.scenario_dir, "Scenario directory")
      ->envname("SLEWSHAPE_SCENARIOS")
      ->capture_default_str();
  serve_app->add_option("--address", serve.address, "Bind address")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [name, sub] : batch_apps) {
      if (!sub->parsed()) continue;
      if (name == "all") {
        return run_batch({AnalysisKind::LoadChart, AnalysisKind::FailMap, AnalysisKind::SpeedLimits,
                          AnalysisKind::Compare},
                         name, batch);
      }
      return run_batch({parse_analysis_kind(name)}, name, batch);
    }
    if (trial_app->parsed()) {
      if (rate_opt->count()) trial.rate_deg_s = rate;
      return run_trial(trial);
    }
    if (serve_app->parsed()) {
      if (port < 0 || port > 65535) throw std::runtime_error("port " + std::to_string(port) + " is out of range");
      serve.port = static_cast<unsigned short>(port);
      return run_serve(serve);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: invalid config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
