#include "slewshape/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "internal/util.hpp"
#include "slewshape/log.hpp"
#include "slewshape/shaper.hpp"

namespace slewshape {

using detail::fmt9;

namespace {

constexpr double kRestRate = 1e-9;
constexpr double kMaxExtraTime = 60.0;

CraneConfig with_geometry(const CraneConfig& cfg, double radius, double boom_length) {
  CraneConfig c = cfg;
  c.radius = radius;
  c.boom_length = boom_length;
  return c;
}

std::string outcome(bool tipped) { return tipped ? "tipped" : "stable"; }

}  // namespace

ManeuverResult run_maneuver(const CraneConfig& cfg, double rate, bool shaped, const ManeuverSettings& settings,
                            std::vector<SimState>* log) {
  ManeuverResult result;
  SimState state = initial_state(settings.start_angle, cfg);
  result.min_margin = state.tip_margin;
  if (log) log->push_back(state);
  if (state.tipped) {
    result.tipped = true;
    return result;
  }
  if (!(rate > 0.0)) return result;

  const double dt = settings.sample_period;
  const double omega = natural_frequency(cfg.rope_length, cfg.gravity);
  const double settle = settings.settle_periods * 2.0 * std::numbers::pi / omega;

  VelocityReference plan;
  if (shaped) {
    plan = plan_slew_command(settings.angle, rate, cfg.eta(), design_mumzv(omega, settings.deflection_ratio), dt);
  }

  const double time_limit = settings.angle / rate + settle + kMaxExtraTime;
  bool commanding = true;
  std::optional<double> rest_time;
  for (std::size_t k = 0; state.time < time_limit; ++k) {
    double cmd = 0.0;
    if (commanding) {
      if (shaped) {
        if (k < plan.samples.size()) {
          cmd = plan.samples[k];
        } else {
          commanding = false;
        }
      } else if (state.slew.alpha - settings.start_angle >= settings.angle) {
        commanding = false;
      } else {
        cmd = rate;
      }
    }
    state = step(state, cmd, dt, cfg);
    if (log) log->push_back(state);
    result.peak_swing = std::max(result.peak_swing, swing_magnitude(state.swing));
    result.min_margin = std::min(result.min_margin, state.tip_margin);
    if (state.tipped) {
      result.tipped = true;
      result.invalid = state.invalid;
      return result;
    }
    if (!commanding && !rest_time && std::abs(state.slew.rate) < kRestRate) rest_time = state.time;
    if (rest_time && state.time >= *rest_time + settle) break;
  }
  result.completion_time = rest_time;
  return result;
}

double static_load_limit(double radius, double boom_length, const CraneConfig& cfg) {
  if (radius > boom_length) {
    throw std::invalid_argument("static_load_limit: radius " + fmt9(radius) + " exceeds boom length " +
                                fmt9(boom_length));
  }
  const double w = cfg.footprint_half_width;
  double limit = std::numeric_limits<double>::infinity();
  for (int deg = 0; deg < 360; ++deg) {
    const double alpha = deg * kDegree;
    const double bx = std::cos(alpha);
    const double by = std::sin(alpha);
    const double sx = -cfg.counterweight_offset * bx - cfg.carrier_offset;
    const double sy = -cfg.counterweight_offset * by;
    const double normals[4][2] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
    for (const auto& n : normals) {
      const double reach = radius * (bx * n[0] + by * n[1]);
      const double x_s = w - (sx * n[0] + sy * n[1]);
      // margin/g = a - m * b
      const double a = cfg.structure_mass * x_s - cfg.boom_mass * (cfg.boom_com_fraction * reach - w);
      const double b = reach - w;
      if (b > 0.0) {
        limit = std::min(limit, std::max(a / b, 0.0));
      } else if (a < 0.0) {
        limit = 0.0;
      }
    }
  }
  if (cfg.bending_moment_max > 0.0) {
    limit = std::min(limit, cfg.bending_moment_max / (cfg.gravity * radius));
  }
  return limit;
}

std::vector<StabilityCell> build_load_chart(const std::vector<double>& radii, const std::vector<double>& boom_lengths,
                                            const CraneConfig& cfg) {
  if (radii.empty() || boom_lengths.empty()) throw std::invalid_argument("build_load_chart: empty grid");
  std::vector<StabilityCell> chart;
  for (double lb : boom_lengths) {
    for (double r : radii) {
      if (r > lb) continue;
      chart.push_back({r, lb, static_load_limit(r, lb, cfg), {}});
    }
  }
  if (chart.empty()) warn("load chart is empty: every radius exceeds every boom length");
  return chart;
}

void dynamic_failure_map(std::vector<StabilityCell>& chart, const std::vector<double>& speed_fractions, bool shaped,
                         const CraneConfig& cfg, const ManeuverSettings& settings) {
  const std::size_t nf = speed_fractions.size();
  std::vector<DynamicResult> results(chart.size() * nf);
  detail::parallel_for(results.size(), [&](std::size_t i) {
    const auto& cell = chart[i / nf];
    const double fraction = speed_fractions[i % nf];
    DynamicResult& out = results[i];
    out.speed_fraction = fraction;
    out.shaped = shaped;
    CraneConfig c = with_geometry(cfg, cell.radius, cell.boom_length);
    c.payload_mass = std::isfinite(cell.static_limit) ? cell.static_limit : 0.0;
    try {
      const auto r = run_maneuver(c, fraction * cfg.speed_limit, shaped, settings);
      out.tipped = r.tipped;
      out.peak_swing = r.peak_swing;
      out.completion_time = r.completion_time;
    } catch (const std::exception& e) {
      warn("failure map cell R=" + fmt9(cell.radius) + " L_b=" + fmt9(cell.boom_length) + " fraction " +
           fmt9(fraction) + ": " + e.what());
      out.tipped = true;
    }
  });
  for (std::size_t i = 0; i < results.size(); ++i) chart[i / nf].dynamic_results.push_back(results[i]);
}

SpeedLimitResult max_safe_speed(double radius, double payload_mass, bool shaped, const CraneConfig& cfg,
                                double resolution, const ManeuverSettings& settings) {
  if (!(resolution > 0.0)) throw std::invalid_argument("max_safe_speed: resolution must be > 0");
  SpeedLimitResult out;
  out.radius = radius;
  out.payload_mass = payload_mass;
  out.shaped = shaped;
  if (payload_mass > static_load_limit(radius, cfg.boom_length, cfg)) return out;

  CraneConfig c = cfg;
  c.radius = radius;
  c.payload_mass = payload_mass;
  auto record = [&](double rate, const ManeuverResult& r) {
    out.max_safe_speed = rate;
    out.peak_swing_at_max = r.peak_swing;
    out.maneuver_time = r.completion_time;
  };

  const double vmax = cfg.speed_limit;
  if (const auto top = run_maneuver(c, vmax, shaped, settings); !top.tipped) {
    out.capped = true;
    record(vmax, top);
    return out;
  }
  double lo = 0.0;
  double hi = vmax;
  std::optional<ManeuverResult> best;
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    const auto r = run_maneuver(c, mid, shaped, settings);
    if (r.tipped) {
      hi = mid;
    } else {
      lo = mid;
      best = r;
    }
  }
  if (best) record(lo, *best);
  return out;
}

double speed_scaling(double full_scale_rate, double full_natural_frequency, double model_natural_frequency) {
  if (!(full_scale_rate > 0.0 && full_natural_frequency > 0.0 && model_natural_frequency > 0.0)) {
    throw std::invalid_argument("speed_scaling: all arguments must be > 0");
  }
  return full_scale_rate * (model_natural_frequency / full_natural_frequency);
}

std::string to_string(CompareClass c) {
  switch (c) {
    case CompareClass::Capped: return "capped";
    case CompareClass::EqualTime: return "equal-time";
    case CompareClass::Faster: return "faster";
    case CompareClass::Slower: return "slower";
    case CompareClass::Infeasible: return "infeasible";
  }
  return "unknown";
}

std::vector<CompareRow> compare_shaped_unshaped(const std::vector<RadiusMass>& pairs, const CraneConfig& cfg,
                                                double resolution, const ManeuverSettings& settings) {
  std::vector<CompareRow> rows(pairs.size());
  detail::parallel_for(2 * pairs.size(), [&](std::size_t i) {
    const auto& p = pairs[i / 2];
    const bool shaped = i % 2 == 1;
    auto r = max_safe_speed(p.radius, p.payload_mass, shaped, cfg, resolution, settings);
    (shaped ? rows[i / 2].shaped : rows[i / 2].unshaped) = r;
  });
  detail::parallel_for(rows.size(), [&](std::size_t i) {
    CompareRow& row = rows[i];
    row.radius = pairs[i].radius;
    row.payload_mass = pairs[i].payload_mass;
    if (row.shaped.max_safe_speed > 0.0) {
      CraneConfig c = cfg;
      c.radius = row.radius;
      c.payload_mass = row.payload_mass;
      row.unshaped_tips_at_shaped_speed = run_maneuver(c, row.shaped.max_safe_speed, false, settings).tipped;
    }
    if (row.unshaped.maneuver_time && row.shaped.maneuver_time) {
      row.reduction_pct = 100.0 * (1.0 - *row.shaped.maneuver_time / *row.unshaped.maneuver_time);
    }
    if (row.unshaped.capped) {
      row.classification = CompareClass::Capped;
    } else if (!row.reduction_pct) {
      row.classification = CompareClass::Infeasible;
    } else if (std::abs(*row.reduction_pct) <= 5.0) {
      row.classification = CompareClass::EqualTime;
    } else {
      row.classification = *row.reduction_pct > 0.0 ? CompareClass::Faster : CompareClass::Slower;
    }
  });
  return rows;
}

void write_loadchart_csv(std::ostream& out, const std::vector<StabilityCell>& chart, const std::string& fingerprint) {
  out << "# config_fingerprint=" << fingerprint << '\n';
  out << "R,L_b,m_max\n";
  for (const auto& c : chart) out << fmt9(c.radius) << ',' << fmt9(c.boom_length) << ',' << fmt9(c.static_limit) << '\n';
}

void write_failmap_csv(std::ostream& out, const std::vector<StabilityCell>& chart, const std::string& fingerprint) {
  out << "# config_fingerprint=" << fingerprint << '\n';
  out << "R,L_b,m_max,fraction,shaped,outcome,peak_swing_deg,time_s\n";
  for (const auto& c : chart) {
    for (const auto& d : c.dynamic_results) {
      out << fmt9(c.radius) << ',' << fmt9(c.boom_length) << ',' << fmt9(c.static_limit) << ','
          << fmt9(d.speed_fraction) << ',' << (d.shaped ? 1 : 0) << ',' << outcome(d.tipped) << ','
          << fmt9(d.peak_swing / kDegree) << ',' << fmt9(d.completion_time) << '\n';
    }
  }
}

void write_speedlimits_csv(std::ostream& out, const std::vector<SpeedLimitResult>& rows,
                           const std::string& fingerprint) {
  out << "# config_fingerprint=" << fingerprint << '\n';
  out << "R,m,shaped,max_safe_speed_deg_s,capped,peak_swing_deg,maneuver_time_s\n";
  for (const auto& r : rows) {
    out << fmt9(r.radius) << ',' << fmt9(r.payload_mass) << ',' << (r.shaped ? 1 : 0) << ','
        << fmt9(r.max_safe_speed / kDegree) << ',' << (r.capped ? 1 : 0) << ',' << fmt9(r.peak_swing_at_max / kDegree)
        << ',' << fmt9(r.maneuver_time) << '\n';
  }
}

void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows, const std::string& fingerprint) {
  out << "# config_fingerprint=" << fingerprint << '\n';
  out << "R,m,unshaped_speed_deg_s,shaped_speed_deg_s,unshaped_time_s,shaped_time_s,reduction_pct,"
         "unshaped_peak_swing_deg,shaped_peak_swing_deg,unshaped_tips_at_shaped_speed,class\n";
  for (const auto& r : rows) {
    out << fmt9(r.radius) << ',' << fmt9(r.payload_mass) << ',' << fmt9(r.unshaped.max_safe_speed / kDegree) << ','
        << fmt9(r.shaped.max_safe_speed / kDegree) << ',' << fmt9(r.unshaped.maneuver_time) << ','
        << fmt9(r.shaped.maneuver_time) << ',' << fmt9(r.reduction_pct) << ','
        << fmt9(r.unshaped.peak_swing_at_max / kDegree) << ',' << fmt9(r.shaped.peak_swing_at_max / kDegree) << ','
        << (r.unshaped_tips_at_shaped_speed ? 1 : 0) << ',' << to_string(r.classification) << '\n';
  }
}

}  // namespace slewshape
