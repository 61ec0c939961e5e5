#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "slewshape/dynamics.hpp"

namespace slewshape {

/// Settings shared by the automated slew maneuvers.
struct ManeuverSettings {
  double angle = std::numbers::pi / 2.0;  // swept angle, rad
  double start_angle = 0.0;
  double deflection_ratio = 0.3;
  double settle_periods = 3.0;           // swing periods observed after the slew stops
  double sample_period = 1.0 / 240.0;
};

struct ManeuverResult {
  bool tipped = false;
  bool invalid = false;
  double peak_swing = 0.0;   // rad
  double min_margin = 0.0;   // N m
  std::optional<double> completion_time;  // s, only for stable runs that moved
};

/// 90 degree test slew at `rate`. Unshaped: constant commanded rate, zero at the
/// crossing. Shaped: plan_slew_command through the MUMZV shaper designed at
/// sqrt(g/l). The run continues for the settle window after the crane stops.
ManeuverResult run_maneuver(const CraneConfig& cfg, double rate, bool shaped, const ManeuverSettings& settings,
                            std::vector<SimState>* log = nullptr);

double static_load_limit(double radius, double boom_length, const CraneConfig& cfg);

struct DynamicResult {
  double speed_fraction = 0.0;
  bool shaped = false;
  bool tipped = false;
  double peak_swing = 0.0;  // rad
  std::optional<double> completion_time;
};

struct StabilityCell {
  double radius = 0.0;
  double boom_length = 0.0;
  double static_limit = 0.0;  // kg
  std::vector<DynamicResult> dynamic_results;
};

std::vector<StabilityCell> build_load_chart(const std::vector<double>& radii, const std::vector<double>& boom_lengths,
                                            const CraneConfig& cfg);

/// Appends one result per fraction to every cell, cells loaded to their static limit.
void dynamic_failure_map(std::vector<StabilityCell>& chart, const std::vector<double>& speed_fractions, bool shaped,
                         const CraneConfig& cfg, const ManeuverSettings& settings = {});

struct SpeedLimitResult {
  double radius = 0.0;
  double payload_mass = 0.0;
  bool shaped = false;
  double max_safe_speed = 0.0;  // rad/s
  bool capped = false;
  double peak_swing_at_max = 0.0;  // rad
  std::optional<double> maneuver_time;  // s
};

SpeedLimitResult max_safe_speed(double radius, double payload_mass, bool shaped, const CraneConfig& cfg,
                                double resolution = 0.1 * kDegree, const ManeuverSettings& settings = {});

double speed_scaling(double full_scale_rate, double full_natural_frequency, double model_natural_frequency);

enum class CompareClass { Capped, EqualTime, Faster, Slower, Infeasible };
std::string to_string(CompareClass c);

struct CompareRow {
  double radius = 0.0;
  double payload_mass = 0.0;
  SpeedLimitResult unshaped;
  SpeedLimitResult shaped;
  std::optional<double> reduction_pct;
  bool unshaped_tips_at_shaped_speed = false;
  CompareClass classification = CompareClass::Slower;
};

struct RadiusMass {
  double radius = 0.0;
  double payload_mass = 0.0;
};

std::vector<CompareRow> compare_shaped_unshaped(const std::vector<RadiusMass>& pairs, const CraneConfig& cfg,
                                                double resolution = 0.1 * kDegree,
                                                const ManeuverSettings& settings = {});

/// CSV writers. The first line records the config fingerprint.
void write_loadchart_csv(std::ostream& out, const std::vector<StabilityCell>& chart, const std::string& fingerprint);
void write_failmap_csv(std::ostream& out, const std::vector<StabilityCell>& chart, const std::string& fingerprint);
void write_speedlimits_csv(std::ostream& out, const std::vector<SpeedLimitResult>& rows,
                           const std::string& fingerprint);
void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows, const std::string& fingerprint);

}  // namespace slewshape
