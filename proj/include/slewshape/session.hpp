#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slewshape/dynamics.hpp"
#include "slewshape/shaper.hpp"

namespace slewshape {

enum class ObstacleLevel { Payload, Boom };

struct Obstacle {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
  ObstacleLevel level = ObstacleLevel::Payload;
};

struct Scenario {
  std::string id;
  CraneConfig cfg;
  double start_angle = std::numbers::pi / 2.0;  // rad
  double goal_angle = std::numbers::pi;          // rad
  double goal_tolerance = 2.0 * kDegree;         // rad
  std::vector<Obstacle> obstacles;
  double time_limit = 120.0;                     // s
  double settle_time = 2.0;                      // s held after CT before the trial closes
  double deflection_ratio = 0.3;
  double sample_period = 1.0 / 240.0;

  void validate() const;
};

nlohmann::json to_json(const Scenario& s);
/// Crane fields default to CraneConfig{}; errors name the offending field.
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);

enum class CommandKind { Joystick, Rate };

/// Value applied over the step starting at `time`.
struct CommandSample {
  double time = 0.0;
  double value = 0.0;
};

enum class TrialOutcome { Running, Completed, Tipped, TimedOut, Aborted };
std::string to_string(TrialOutcome o);

struct TrialMetrics {
  double max_swing_deg = 0.0;
  int collisions = 0;
  std::optional<double> completion_time;
  bool tipped = false;
  bool completed = false;
};

nlohmann::json to_json(const TrialMetrics& m);

struct TrialRecord {
  std::string scenario_id;
  bool shaped = false;
  CommandKind kind = CommandKind::Rate;
  std::vector<CommandSample> commands;
  std::vector<SimState> states;  // states[0] is the initial state
  TrialOutcome outcome = TrialOutcome::Running;
  TrialMetrics metrics;
};

int collision_events(const std::vector<SimState>& states, const std::vector<Obstacle>& obstacles,
                     double boom_radius);

/// MS, CR and CT computed from the logs alone.
TrialMetrics trial_metrics(const TrialRecord& record, const Scenario& scenario);

/// Unshaped: constant rate until the goal is crossed, then zero. Shaped: a
/// planned rest-to-rest maneuver from start to goal at `rate`.
TrialRecord run_automated_trial(const Scenario& scenario, double rate, bool shaped);
TrialRecord run_automated_trial(const Scenario& scenario, const VelocityReference& reference, bool shaped);
/// Re-runs the command log of `recorded` through the same pipeline.
TrialRecord replay_trial(const Scenario& scenario, const TrialRecord& recorded);

void write_commands_csv(std::ostream& out, const TrialRecord& record);

/// Fixed-step trial driver shared by automated runs, replays and live sessions.
/// Joystick samples pass through the shaper pipeline; rate samples drive the
/// actuator directly.
class TrialRunner {
 public:
  TrialRunner(Scenario scenario, bool shaped, CommandKind kind);

  /// Applies one command sample over one step. Returns false once the trial has ended.
  bool step(double value);
  bool finished() const { return record_.outcome != TrialOutcome::Running; }
  /// Ends a running trial with `outcome` and fills in the metrics.
  void finish(TrialOutcome outcome);

  const Scenario& scenario() const { return scenario_; }
  const TrialRecord& record() const { return record_; }
  const SimState& state() const { return record_.states.back(); }
  double commanded_rate() const { return rate_; }

 private:
  Scenario scenario_;
  std::optional<RateCommandPipeline> pipeline_;
  TrialRecord record_;
  double rate_ = 0.0;
  std::optional<double> first_command_;
  std::optional<double> settled_at_;
};

enum class SessionPhase { Ready, Running, Tipped, Completed, Aborted };
std::string to_string(SessionPhase p);

/// Operator-driven trial. The joystick is an acceleration reference.
class LiveSession {
 public:
  static constexpr double kMaxCatchUp = 0.25;  // s

  LiveSession(Scenario scenario, bool shaped);

  /// Advances the simulation to `now` (s since session start) holding `joystick`.
  /// Throws std::logic_error once the trial is over.
  const SimState& step_interactive(double joystick, double now);
  void abort();

  SessionPhase phase() const { return phase_; }
  bool terminal() const { return phase_ != SessionPhase::Ready && phase_ != SessionPhase::Running; }
  bool shaped() const { return runner_.record().shaped; }
  const Scenario& scenario() const { return runner_.scenario(); }
  const SimState& state() const { return runner_.state(); }
  double commanded_rate() const { return runner_.commanded_rate(); }
  const TrialRecord& record() const { return runner_.record(); }
  /// Throws std::logic_error while the trial is not terminal.
  TrialMetrics metrics() const;
  double dropped_time() const { return dropped_; }

 private:
  void sync_phase();

  TrialRunner runner_;
  SessionPhase phase_ = SessionPhase::Ready;
  double dropped_ = 0.0;
};

}  // namespace slewshape
