#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slewshape/dynamics.hpp"
#include "slewshape/stability.hpp"

namespace slewshape {

/// Everything a batch analysis depends on. Serialises to one JSON document.
struct AnalysisConfig {
  CraneConfig crane;
  ManeuverSettings maneuver;
  std::vector<double> radius_grid{0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  std::vector<double> boom_length_grid{0.6096, 0.762, 0.9144, 1.0668};
  std::vector<double> speed_fractions{0.5, 0.75, 1.0};
  double sweep_boom_length = 0.9144;  // L_b row used by speedlimits and compare
  double resolution = 0.1 * kDegree;  // bisection resolution, rad/s

  void validate() const;
};

nlohmann::json to_json(const CraneConfig& cfg);
nlohmann::json to_json(const AnalysisConfig& cfg);

/// Reads fields present in `j` over `base`. Unknown keys and bad values raise
/// ConfigError naming the field path (for example "crane.payload_mass").
CraneConfig crane_from_json(const nlohmann::json& j, const CraneConfig& base = {}, const std::string& prefix = "crane");
AnalysisConfig analysis_from_json(const nlohmann::json& j, const AnalysisConfig& base = {});

AnalysisConfig load_analysis_config(const std::string& path);

/// Applies "dotted.key=value" overrides; values are parsed as JSON.
AnalysisConfig apply_overrides(const AnalysisConfig& cfg, const std::vector<std::string>& overrides);

/// FNV-1a 64 of the canonical (sorted-key, compact) serialisation, as 16 hex digits.
std::string fingerprint(const nlohmann::json& canonical);
std::string fingerprint(const AnalysisConfig& cfg);

}  // namespace slewshape
