#pragma once

#include <string>
#include <vector>

#include "slewshape/config.hpp"

namespace slewshape {

enum class AnalysisKind { LoadChart, FailMap, SpeedLimits, Compare };

AnalysisKind parse_analysis_kind(const std::string& name);
std::string to_string(AnalysisKind kind);

struct Artifact {
  std::string name;     // file name, e.g. "loadchart.csv"
  std::size_t rows = 0; // data rows, excluding the fingerprint and header lines
  std::string content;
};

/// (R, m_max) pairs on the sweep boom length used by speedlimits and compare.
std::vector<RadiusMass> sweep_pairs(const AnalysisConfig& cfg);

std::vector<Artifact> run_analysis(AnalysisKind kind, const AnalysisConfig& cfg);

}  // namespace slewshape
