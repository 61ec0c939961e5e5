#include "slewshape/batch.hpp"

#include <algorithm>
#include <sstream>

namespace slewshape {

namespace {

Artifact make_artifact(std::string name, const std::string& content) {
  const auto lines = static_cast<std::size_t>(std::count(content.begin(), content.end(), '\n'));
  return {std::move(name), lines >= 2 ? lines - 2 : 0, content};
}

}  // namespace

AnalysisKind parse_analysis_kind(const std::string& name) {
  if (name == "loadchart") return AnalysisKind::LoadChart;
  if (name == "failmap") return AnalysisKind::FailMap;
  if (name == "speedlimits") return AnalysisKind::SpeedLimits;
  if (name == "compare") return AnalysisKind::Compare;
  throw std::invalid_argument("unknown analysis kind '" + name +
                              "' (expected loadchart, failmap, speedlimits or compare)");
}

std::string to_string(AnalysisKind kind) {
  switch (kind) {
    case AnalysisKind::LoadChart: return "loadchart";
    case AnalysisKind::FailMap: return "failmap";
    case AnalysisKind::SpeedLimits: return "speedlimits";
    case AnalysisKind::Compare: return "compare";
  }
  return "unknown";
}

std::vector<RadiusMass> sweep_pairs(const AnalysisConfig& cfg) {
  std::vector<RadiusMass> pairs;
  for (double r : cfg.radius_grid) {
    pairs.push_back({r, static_load_limit(r, cfg.sweep_boom_length, cfg.crane)});
  }
  return pairs;
}

std::vector<Artifact> run_analysis(AnalysisKind kind, const AnalysisConfig& cfg) {
  cfg.validate();
  const std::string fp = fingerprint(cfg);
  std::ostringstream out;
  CraneConfig crane = cfg.crane;
  crane.boom_length = cfg.sweep_boom_length;
  switch (kind) {
    case AnalysisKind::LoadChart: {
      write_loadchart_csv(out, build_load_chart(cfg.radius_grid, cfg.boom_length_grid, cfg.crane), fp);
      return {make_artifact("loadchart.csv", out.str())};
    }
    case AnalysisKind::FailMap: {
      auto chart = build_load_chart(cfg.radius_grid, cfg.boom_length_grid, cfg.crane);
      dynamic_failure_map(chart, cfg.speed_fractions, false, cfg.crane, cfg.maneuver);
      dynamic_failure_map(chart, cfg.speed_fractions, true, cfg.crane, cfg.maneuver);
      write_failmap_csv(out, chart, fp);
      return {make_artifact("failmap.csv", out.str())};
    }
    case AnalysisKind::SpeedLimits: {
      std::vector<SpeedLimitResult> rows;
      for (const auto& p : sweep_pairs(cfg)) {
        for (bool shaped : {false, true}) {
          rows.push_back(max_safe_speed(p.radius, p.payload_mass, shaped, crane, cfg.resolution, cfg.maneuver));
        }
      }
      write_speedlimits_csv(out, rows, fp);
      return {make_artifact("speedlimits.csv", out.str())};
    }
    case AnalysisKind::Compare: {
      write_compare_csv(out, compare_shaped_unshaped(sweep_pairs(cfg), crane, cfg.resolution, cfg.maneuver), fp);
      return {make_artifact("compare.csv", out.str())};
    }
  }
  return {};
}

}  // namespace slewshape
