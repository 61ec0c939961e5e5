#include "slewshape/session.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "internal/util.hpp"
#include "slewshape/config.hpp"
#include "slewshape/log.hpp"

namespace slewshape {

using nlohmann::json;
using detail::fmt9;

namespace {

constexpr double kSettledRate = 1.0 * kDegree;  // |alpha_dot| below this counts as stopped

bool settled(const SimState& s, const Scenario& sc) {
  return std::abs(s.slew.alpha - sc.goal_angle) <= sc.goal_tolerance && std::abs(s.slew.rate) < kSettledRate;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

std::string level_name(ObstacleLevel l) { return l == ObstacleLevel::Boom ? "boom" : "payload"; }

}  // namespace

void Scenario::validate() const {
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("crane." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
  }
  if (!(goal_tolerance > 0.0)) throw ConfigError("goal_tolerance", "must be > 0");
  if (!(time_limit > 0.0)) throw ConfigError("time_limit", "must be > 0");
  if (!(settle_time >= 0.0)) throw ConfigError("settle_time", "must be >= 0");
  if (!(sample_period > 0.0)) throw ConfigError("sample_period", "must be > 0");
  if (!(deflection_ratio > 0.0 && deflection_ratio <= 0.5)) {
    throw ConfigError("deflection_ratio", "must lie in (0, 0.5]");
  }
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    if (!(obstacles[i].radius > 0.0)) {
      throw ConfigError("obstacles[" + std::to_string(i) + "].radius", "must be > 0");
    }
  }
}

json to_json(const Scenario& s) {
  json obstacles = json::array();
  for (const auto& o : s.obstacles) {
    obstacles.push_back({{"x", o.x}, {"y", o.y}, {"radius", o.radius}, {"level", level_name(o.level)}});
  }
  return {{"id", s.id},
          {"crane", to_json(s.cfg)},
          {"start_angle", s.start_angle},
          {"goal_angle", s.goal_angle},
          {"goal_tolerance", s.goal_tolerance},
          {"time_limit", s.time_limit},
          {"settle_time", s.settle_time},
          {"deflection_ratio", s.deflection_ratio},
          {"sample_period", s.sample_period},
          {"obstacles", obstacles}};
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "expected an object");
  Scenario s;
  for (const auto& [key, value] : j.items()) {
    if (key == "id") {
      if (!value.is_string()) throw ConfigError("id", "expected a string");
      s.id = value.get<std::string>();
    } else if (key == "crane") {
      s.cfg = crane_from_json(value, s.cfg, "crane");
    } else if (key == "start_angle") {
      s.start_angle = number(value, key);
    } else if (key == "goal_angle") {
      s.goal_angle = number(value, key);
    } else if (key == "goal_tolerance") {
      s.goal_tolerance = number(value, key);
    } else if (key == "time_limit") {
      s.time_limit = number(value, key);
    } else if (key == "settle_time") {
      s.settle_time = number(value, key);
    } else if (key == "deflection_ratio") {
      s.deflection_ratio = number(value, key);
    } else if (key == "sample_period") {
      s.sample_period = number(value, key);
    } else if (key == "obstacles") {
      if (!value.is_array()) throw ConfigError("obstacles", "expected an array");
      for (std::size_t i = 0; i < value.size(); ++i) {
        const std::string base = "obstacles[" + std::to_string(i) + "]";
        const json& o = value[i];
        if (!o.is_object()) throw ConfigError(base, "expected an object");
        Obstacle ob;
        for (const auto& [ok, ov] : o.items()) {
          if (ok == "x") ob.x = number(ov, base + ".x");
          else if (ok == "y") ob.y = number(ov, base + ".y");
          else if (ok == "radius") ob.radius = number(ov, base + ".radius");
          else if (ok == "level") {
            const std::string lv = ov.is_string() ? ov.get<std::string>() : "";
            if (lv == "payload") ob.level = ObstacleLevel::Payload;
            else if (lv == "boom") ob.level = ObstacleLevel::Boom;
            else throw ConfigError(base + ".level", "expected \"payload\" or \"boom\"");
          } else {
            throw ConfigError(base + "." + ok, "unknown field");
          }
        }
        s.obstacles.push_back(ob);
      }
    } else {
      throw ConfigError(key, "unknown field");
    }
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("scenario file '" + path + "' is not valid JSON: " + e.what());
  }
  Scenario s = scenario_from_json(j);
  if (s.id.empty()) s.id = std::filesystem::path(path).stem().string();
  return s;
}

std::string to_string(TrialOutcome o) {
  switch (o) {
    case TrialOutcome::Running: return "running";
    case TrialOutcome::Completed: return "completed";
    case TrialOutcome::Tipped: return "tipped";
    case TrialOutcome::TimedOut: return "timed_out";
    case TrialOutcome::Aborted: return "aborted";
  }
  return "unknown";
}

std::string to_string(SessionPhase p) {
  switch (p) {
    case SessionPhase::Ready: return "ready";
    case SessionPhase::Running: return "running";
    case SessionPhase::Tipped: return "tipped";
    case SessionPhase::Completed: return "completed";
    case SessionPhase::Aborted: return "aborted";
  }
  return "unknown";
}

json to_json(const TrialMetrics& m) {
  return {{"max_swing_deg", m.max_swing_deg},
          {"collisions", m.collisions},
          {"completion_time", m.completion_time ? json(*m.completion_time) : json(nullptr)},
          {"tipped", m.tipped},
          {"completed", m.completed}};
}

int collision_events(const std::vector<SimState>& states, const std::vector<Obstacle>& obstacles,
                     double boom_radius) {
  int events = 0;
  for (const auto& o : obstacles) {
    bool inside = false;
    for (const auto& s : states) {
      double px = s.payload_xy[0];
      double py = s.payload_xy[1];
      if (o.level == ObstacleLevel::Boom) {
        px = boom_radius * std::cos(s.slew.alpha);
        py = boom_radius * std::sin(s.slew.alpha);
      }
      const bool now = std::hypot(px - o.x, py - o.y) < o.radius;
      if (now && !inside) ++events;
      inside = now;
    }
  }
  return events;
}

TrialMetrics trial_metrics(const TrialRecord& record, const Scenario& scenario) {
  TrialMetrics m;
  double peak = 0.0;
  for (const auto& s : record.states) {
    peak = std::max(peak, swing_magnitude(s.swing));
    m.tipped = m.tipped || s.tipped;
  }
  m.max_swing_deg = peak / kDegree;
  m.collisions = collision_events(record.states, scenario.obstacles, scenario.cfg.radius);

  double origin = record.states.empty() ? 0.0 : record.states.front().time;
  for (const auto& c : record.commands) {
    if (c.value != 0.0) {
      origin = c.time;
      break;
    }
  }
  if (!m.tipped) {
    for (const auto& s : record.states) {
      if (settled(s, scenario)) {
        m.completion_time = std::max(0.0, s.time - origin);
        break;
      }
    }
  }
  m.completed = m.completion_time.has_value();
  return m;
}

TrialRunner::TrialRunner(Scenario scenario, bool shaped, CommandKind kind) : scenario_(std::move(scenario)) {
  scenario_.validate();
  record_.scenario_id = scenario_.id;
  record_.shaped = shaped;
  record_.kind = kind;
  if (kind == CommandKind::Joystick) {
    std::optional<ShaperSpec> spec;
    if (shaped) {
      spec = design_mumzv(natural_frequency(scenario_.cfg.rope_length, scenario_.cfg.gravity),
                          scenario_.deflection_ratio);
    }
    pipeline_.emplace(spec, scenario_.sample_period, scenario_.cfg.eta(), scenario_.cfg.speed_limit);
  }
  record_.states.push_back(initial_state(scenario_.start_angle, scenario_.cfg));
  if (state().tipped) {
    finish(TrialOutcome::Tipped);
  } else if (settled(state(), scenario_)) {
    settled_at_ = state().time;
  }
}

bool TrialRunner::step(double value) {
  if (finished()) throw std::logic_error("trial is over; start a new trial");
  const SimState& current = state();
  record_.commands.push_back({current.time, value});
  rate_ = pipeline_ ? pipeline_->push(value) : value;
  record_.states.push_back(slewshape::step(current, rate_, scenario_.sample_period, scenario_.cfg));
  const SimState& s = state();
  if (s.tipped) {
    finish(TrialOutcome::Tipped);
  } else {
    if (!settled_at_ && settled(s, scenario_)) settled_at_ = s.time;
    if (settled_at_ && s.time >= *settled_at_ + scenario_.settle_time) {
      finish(TrialOutcome::Completed);
    } else if (s.time >= scenario_.time_limit) {
      finish(settled_at_ ? TrialOutcome::Completed : TrialOutcome::TimedOut);
    }
  }
  return !finished();
}

void TrialRunner::finish(TrialOutcome outcome) {
  if (finished()) return;
  record_.outcome = outcome;
  record_.metrics = trial_metrics(record_, scenario_);
  if (outcome != TrialOutcome::Completed) {
    record_.metrics.completed = false;
    record_.metrics.completion_time.reset();
  }
}

TrialRecord run_automated_trial(const Scenario& scenario, double rate, bool shaped) {
  const double span = scenario.goal_angle - scenario.start_angle;
  const double sign = span < 0.0 ? -1.0 : 1.0;
  if (shaped && rate > 0.0 && span != 0.0) {
    const double omega = natural_frequency(scenario.cfg.rope_length, scenario.cfg.gravity);
    auto ref = plan_slew_command(std::abs(span), rate, scenario.cfg.eta(),
                                 design_mumzv(omega, scenario.deflection_ratio), scenario.sample_period);
    for (auto& v : ref.samples) v *= sign;
    return run_automated_trial(scenario, ref, true);
  }
  TrialRunner runner(scenario, shaped, CommandKind::Rate);
  bool stopped = false;
  while (!runner.finished()) {
    stopped = stopped || sign * (runner.state().slew.alpha - scenario.start_angle) >= std::abs(span);
    runner.step(stopped ? 0.0 : sign * rate);
  }
  return runner.record();
}

TrialRecord run_automated_trial(const Scenario& scenario, const VelocityReference& reference, bool shaped) {
  TrialRunner runner(scenario, shaped, CommandKind::Rate);
  for (std::size_t k = 0; !runner.finished(); ++k) {
    runner.step(k < reference.samples.size() ? reference.samples[k] : 0.0);
  }
  return runner.record();
}

TrialRecord replay_trial(const Scenario& scenario, const TrialRecord& recorded) {
  TrialRunner runner(scenario, recorded.shaped, recorded.kind);
  for (const auto& c : recorded.commands) {
    if (runner.finished()) break;
    runner.step(c.value);
  }
  if (!runner.finished()) runner.finish(recorded.outcome == TrialOutcome::Running ? TrialOutcome::Aborted
                                                                                  : recorded.outcome);
  return runner.record();
}

void write_commands_csv(std::ostream& out, const TrialRecord& record) {
  out << "time," << (record.kind == CommandKind::Joystick ? "joystick" : "rate") << '\n';
  for (const auto& c : record.commands) out << fmt9(c.time) << ',' << fmt9(c.value) << '\n';
}

LiveSession::LiveSession(Scenario scenario, bool shaped)
    : runner_(std::move(scenario), shaped, CommandKind::Joystick) {
  sync_phase();
}

const SimState& LiveSession::step_interactive(double joystick, double now) {
  if (terminal()) throw std::logic_error("session is " + to_string(phase_) + "; start a new trial");
  if (!std::isfinite(joystick)) throw std::invalid_argument("joystick value must be finite");
  joystick = std::clamp(joystick, -1.0, 1.0);
  phase_ = SessionPhase::Running;

  const double dt = runner_.scenario().sample_period;
  double target = now - dropped_;
  const double lag = target - state().time;
  if (lag > kMaxCatchUp) {
    const double excess = lag - kMaxCatchUp;
    dropped_ += excess;
    target -= excess;
    warn("session " + runner_.scenario().id + ": dropped " + fmt9(excess) + " s of catch-up");
  }
  while (!runner_.finished() && state().time + dt <= target + 1e-9 * dt) runner_.step(joystick);
  sync_phase();
  return state();
}

void LiveSession::abort() {
  if (terminal()) return;
  runner_.finish(TrialOutcome::Aborted);
  sync_phase();
}

TrialMetrics LiveSession::metrics() const {
  if (!terminal()) throw std::logic_error("session is still " + to_string(phase_));
  return runner_.record().metrics;
}

void LiveSession::sync_phase() {
  switch (runner_.record().outcome) {
    case TrialOutcome::Running: break;
    case TrialOutcome::Completed: phase_ = SessionPhase::Completed; break;
    case TrialOutcome::Tipped: phase_ = SessionPhase::Tipped; break;
    case TrialOutcome::TimedOut:
    case TrialOutcome::Aborted: phase_ = SessionPhase::Aborted; break;
  }
}

}  // namespace slewshape
