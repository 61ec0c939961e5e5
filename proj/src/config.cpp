#include "slewshape/config.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

namespace slewshape {

using nlohmann::json;

namespace {

using CraneField = std::pair<const char*, double CraneConfig::*>;

constexpr CraneField kCraneFields[] = {
    {"structure_mass", &CraneConfig::structure_mass},
    {"boom_mass", &CraneConfig::boom_mass},
    {"payload_mass", &CraneConfig::payload_mass},
    {"boom_length", &CraneConfig::boom_length},
    {"radius", &CraneConfig::radius},
    {"rope_length", &CraneConfig::rope_length},
    {"boom_com_fraction", &CraneConfig::boom_com_fraction},
    {"footprint_half_width", &CraneConfig::footprint_half_width},
    {"counterweight_offset", &CraneConfig::counterweight_offset},
    {"carrier_offset", &CraneConfig::carrier_offset},
    {"gravity", &CraneConfig::gravity},
    {"max_torque", &CraneConfig::max_torque},
    {"slew_inertia", &CraneConfig::slew_inertia},
    {"speed_limit", &CraneConfig::speed_limit},
    {"bending_moment_max", &CraneConfig::bending_moment_max},
};

using ManeuverField = std::pair<const char*, double ManeuverSettings::*>;

constexpr ManeuverField kManeuverFields[] = {
    {"angle", &ManeuverSettings::angle},
    {"start_angle", &ManeuverSettings::start_angle},
    {"deflection_ratio", &ManeuverSettings::deflection_ratio},
    {"settle_periods", &ManeuverSettings::settle_periods},
    {"sample_period", &ManeuverSettings::sample_period},
};

std::string join(const std::string& prefix, const std::string& key) { return prefix.empty() ? key : prefix + "." + key; }

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

std::vector<double> number_list(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

void expect_object(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field.empty() ? "<root>" : field, "expected an object");
}

template <typename T, std::size_t N>
void read_fields(const json& j, T& target, const std::pair<const char*, double T::*> (&fields)[N],
                 const std::string& prefix) {
  expect_object(j, prefix);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto& [name, member] : fields) {
      if (key == name) {
        target.*member = number(value, join(prefix, key));
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError(join(prefix, key), "unknown field");
  }
}

json set_path(json doc, const std::string& dotted, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty() || !node->is_object()) throw ConfigError(dotted, "invalid override path");
    if (dot == std::string::npos) {
      if (!node->contains(key)) throw ConfigError(dotted, "unknown field");
      (*node)[key] = value;
      return doc;
    }
    if (!node->contains(key)) throw ConfigError(dotted, "unknown field");
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace

void AnalysisConfig::validate() const {
  try {
    crane.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("crane." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
  }
  auto require = [](bool ok, const char* field, const char* message) {
    if (!ok) throw ConfigError(field, message);
  };
  require(maneuver.angle > 0.0, "maneuver.angle", "must be > 0");
  require(maneuver.deflection_ratio > 0.0 && maneuver.deflection_ratio <= 0.5, "maneuver.deflection_ratio",
          "must lie in (0, 0.5]");
  require(maneuver.settle_periods >= 0.0, "maneuver.settle_periods", "must be >= 0");
  require(maneuver.sample_period > 0.0, "maneuver.sample_period", "must be > 0");
  require(!radius_grid.empty(), "grids.radius", "must not be empty");
  require(!boom_length_grid.empty(), "grids.boom_length", "must not be empty");
  for (double r : radius_grid) require(r > 0.0, "grids.radius", "entries must be > 0");
  for (double l : boom_length_grid) require(l > 0.0, "grids.boom_length", "entries must be > 0");
  for (double f : speed_fractions) require(f >= 0.0 && f <= 1.0, "grids.speed_fractions", "entries must lie in [0, 1]");
  require(sweep_boom_length > 0.0, "sweep.boom_length", "must be > 0");
  for (double r : radius_grid) {
    require(r <= sweep_boom_length, "grids.radius", "sweep row needs every radius <= sweep.boom_length");
  }
  require(resolution > 0.0, "sweep.resolution", "must be > 0");
}

json to_json(const CraneConfig& cfg) {
  json j = json::object();
  for (const auto& [name, member] : kCraneFields) j[name] = cfg.*member;
  return j;
}

json to_json(const AnalysisConfig& cfg) {
  json maneuver = json::object();
  for (const auto& [name, member] : kManeuverFields) maneuver[name] = cfg.maneuver.*member;
  return {
      {"crane", to_json(cfg.crane)},
      {"maneuver", maneuver},
      {"grids", {{"radius", cfg.radius_grid}, {"boom_length", cfg.boom_length_grid}, {"speed_fractions", cfg.speed_fractions}}},
      {"sweep", {{"boom_length", cfg.sweep_boom_length}, {"resolution", cfg.resolution}}},
  };
}

CraneConfig crane_from_json(const json& j, const CraneConfig& base, const std::string& prefix) {
  CraneConfig cfg = base;
  read_fields(j, cfg, kCraneFields, prefix);
  return cfg;
}

AnalysisConfig analysis_from_json(const json& j, const AnalysisConfig& base) {
  AnalysisConfig cfg = base;
  expect_object(j, "");
  for (const auto& [key, value] : j.items()) {
    if (key == "crane") {
      cfg.crane = crane_from_json(value, cfg.crane, "crane");
    } else if (key == "maneuver") {
      read_fields(value, cfg.maneuver, kManeuverFields, "maneuver");
    } else if (key == "grids") {
      expect_object(value, "grids");
      for (const auto& [gk, gv] : value.items()) {
        if (gk == "radius") cfg.radius_grid = number_list(gv, "grids.radius");
        else if (gk == "boom_length") cfg.boom_length_grid = number_list(gv, "grids.boom_length");
        else if (gk == "speed_fractions") cfg.speed_fractions = number_list(gv, "grids.speed_fractions");
        else throw ConfigError("grids." + gk, "unknown field");
      }
    } else if (key == "sweep") {
      expect_object(value, "sweep");
      for (const auto& [sk, sv] : value.items()) {
        if (sk == "boom_length") cfg.sweep_boom_length = number(sv, "sweep.boom_length");
        else if (sk == "resolution") cfg.resolution = number(sv, "sweep.resolution");
        else throw ConfigError("sweep." + sk, "unknown field");
      }
    } else {
      throw ConfigError(key, "unknown field");
    }
  }
  cfg.validate();
  return cfg;
}

AnalysisConfig load_analysis_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return analysis_from_json(j);
}

AnalysisConfig apply_overrides(const AnalysisConfig& cfg, const std::vector<std::string>& overrides) {
  json doc = to_json(cfg);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError(o, "override must look like key=value");
    const std::string key = o.substr(0, eq);
    json value;
    try {
      value = json::parse(o.substr(eq + 1));
    } catch (const json::parse_error&) {
      throw ConfigError(key, "override value is not valid JSON");
    }
    doc = set_path(std::move(doc), key, value);
  }
  return analysis_from_json(doc);
}

std::string fingerprint(const json& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fingerprint(const AnalysisConfig& cfg) { return fingerprint(to_json(cfg)); }

}  // namespace slewshape
