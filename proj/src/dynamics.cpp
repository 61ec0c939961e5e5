#include "slewshape/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "slewshape/shaper.hpp"

namespace slewshape {

namespace {

constexpr std::array<std::array<double, 2>, 4> kEdgeNormals{{{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}}};

void require(bool ok, const char* field, const char* message) {
  if (!ok) throw ConfigError(field, message);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

// Plan-view swing offset l sin|theta| along the deflection direction.
std::array<double, 2> swing_offset(double alpha, const SwingState& s, double rope_length) {
  const double mag = swing_magnitude(s);
  if (mag == 0.0) return {0.0, 0.0};
  const double ca = std::cos(alpha);
  const double sa = std::sin(alpha);
  const double k = rope_length * std::sin(mag) / mag;
  return {k * (s.theta2 * ca - s.theta1 * sa), k * (s.theta2 * sa + s.theta1 * ca)};
}

}  // namespace

double CraneConfig::elevation() const { return std::acos(std::clamp(radius / boom_length, -1.0, 1.0)); }

double CraneConfig::equivalent_inertia() const {
  return slew_inertia > 0.0 ? slew_inertia : slewshape::equivalent_inertia(payload_mass, boom_mass, radius);
}

void CraneConfig::validate() const {
  require(finite_positive(structure_mass), "structure_mass", "must be > 0");
  require(finite_positive(boom_mass), "boom_mass", "must be > 0");
  require(std::isfinite(payload_mass) && payload_mass >= 0.0, "payload_mass", "must be >= 0");
  require(finite_positive(boom_length), "boom_length", "must be > 0");
  require(finite_positive(radius), "radius", "must be > 0");
  require(radius <= boom_length, "radius", "must not exceed boom_length");
  require(finite_positive(rope_length), "rope_length", "must be > 0");
  require(std::isfinite(boom_com_fraction) && boom_com_fraction > 0.0 && boom_com_fraction <= 1.0,
          "boom_com_fraction", "must lie in (0, 1]");
  require(finite_positive(footprint_half_width), "footprint_half_width", "must be > 0");
  require(std::isfinite(counterweight_offset), "counterweight_offset", "must be finite");
  require(std::isfinite(carrier_offset), "carrier_offset", "must be finite");
  require(finite_positive(gravity), "gravity", "must be > 0");
  require(finite_positive(max_torque), "max_torque", "must be > 0");
  require(std::isfinite(slew_inertia), "slew_inertia", "must be finite");
  require(equivalent_inertia() > 0.0, "slew_inertia", "derived inertia is zero");
  require(finite_positive(speed_limit), "speed_limit", "must be > 0");
  require(std::isfinite(bending_moment_max) && bending_moment_max >= 0.0, "bending_moment_max", "must be >= 0");
}

double natural_frequency(double rope_length, double gravity) {
  if (!(rope_length > 0.0)) throw std::domain_error("natural_frequency: rope length must be > 0");
  return std::sqrt(gravity / rope_length);
}

double swing_magnitude(const SwingState& s) { return std::hypot(s.theta1, s.theta2); }

std::array<double, 2> swing_derivatives(const SwingState& s, const SlewState& slew, const CraneConfig& cfg) {
  const double l = cfg.rope_length;
  const double ad = slew.rate;
  const double add = slew.accel;
  const double k = (cfg.gravity - l * ad * ad) / l;
  const double r = cfg.radius;
  return {-2.0 * ad * s.rate2 - k * s.theta1 - add * s.theta2 - r * add / l,
          2.0 * ad * s.rate1 - k * s.theta2 + add * s.theta1 + r * ad * ad / l};
}

double tip_over_margin(double alpha, const SwingState& swing, const CraneConfig& cfg) {
  const double bx = std::cos(alpha);
  const double by = std::sin(alpha);
  const auto off = swing_offset(alpha, swing, cfg.rope_length);
  const double sx = -cfg.counterweight_offset * bx - cfg.carrier_offset;
  const double sy = -cfg.counterweight_offset * by;
  const double w = cfg.footprint_half_width;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& n : kEdgeNormals) {
    const double reach = cfg.radius * (bx * n[0] + by * n[1]);
    const double x_s = w - (sx * n[0] + sy * n[1]);
    const double x_e = off[0] * n[0] + off[1] * n[1];
    const double moment = cfg.structure_mass * x_s - cfg.boom_mass * (cfg.boom_com_fraction * reach - w) -
                          cfg.payload_mass * (reach - w) - cfg.payload_mass * x_e;
    best = std::min(best, cfg.gravity * moment);
  }
  return best;
}

double tip_over_margin(const SimState& state, const CraneConfig& cfg) {
  return tip_over_margin(state.slew.alpha, state.swing, cfg);
}

std::array<double, 2> boom_tip_xy(double alpha, const CraneConfig& cfg) {
  return {cfg.radius * std::cos(alpha), cfg.radius * std::sin(alpha)};
}

std::array<double, 2> payload_xy(double alpha, const SwingState& swing, const CraneConfig& cfg) {
  const double ca = std::cos(alpha);
  const double sa = std::sin(alpha);
  const double l = cfg.rope_length;
  return {cfg.radius * ca + l * (swing.theta2 * ca - swing.theta1 * sa),
          cfg.radius * sa + l * (swing.theta2 * sa + swing.theta1 * ca)};
}

SimState initial_state(double alpha, const CraneConfig& cfg) {
  SimState s;
  s.slew.alpha = alpha;
  s.tip_margin = tip_over_margin(s, cfg);
  s.tipped = s.tip_margin <= 0.0;
  s.payload_xy = payload_xy(alpha, s.swing, cfg);
  return s;
}

SimState step(const SimState& state, double commanded_rate, double dt, const CraneConfig& cfg) {
  if (state.tipped) throw std::logic_error("step: state has tipped; reset the simulation");
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");

  const double eta = cfg.eta();
  const double ad0 = state.slew.rate;
  const double add = std::clamp((commanded_rate - ad0) / dt, -eta, eta);

  // The actuator holds alpha_ddot over the step, so alpha_dot is linear in time.
  auto f = [&](double tau, const SwingState& y) {
    const auto acc = swing_derivatives(y, {0.0, ad0 + add * tau, add}, cfg);
    return SwingState{y.rate1, y.rate2, acc[0], acc[1]};
  };
  auto axpy = [](const SwingState& y, double h, const SwingState& k) {
    return SwingState{y.theta1 + h * k.theta1, y.theta2 + h * k.theta2, y.rate1 + h * k.rate1,
                      y.rate2 + h * k.rate2};
  };
  const SwingState& y = state.swing;
  const SwingState k1 = f(0.0, y);
  const SwingState k2 = f(0.5 * dt, axpy(y, 0.5 * dt, k1));
  const SwingState k3 = f(0.5 * dt, axpy(y, 0.5 * dt, k2));
  const SwingState k4 = f(dt, axpy(y, dt, k3));
  const double h = dt / 6.0;

  SimState next = state;
  next.swing = {y.theta1 + h * (k1.theta1 + 2.0 * k2.theta1 + 2.0 * k3.theta1 + k4.theta1),
                y.theta2 + h * (k1.theta2 + 2.0 * k2.theta2 + 2.0 * k3.theta2 + k4.theta2),
                y.rate1 + h * (k1.rate1 + 2.0 * k2.rate1 + 2.0 * k3.rate1 + k4.rate1),
                y.rate2 + h * (k1.rate2 + 2.0 * k2.rate2 + 2.0 * k3.rate2 + k4.rate2)};
  next.slew.alpha = state.slew.alpha + ad0 * dt + 0.5 * add * dt * dt;
  next.slew.rate = ad0 + add * dt;
  next.slew.accel = add;
  next.time = state.time + dt;
  next.tip_margin = tip_over_margin(next, cfg);
  next.invalid = state.invalid || !(swing_magnitude(next.swing) < 0.5 * std::numbers::pi);
  next.tipped = next.invalid || next.tip_margin <= 0.0;
  next.payload_xy = payload_xy(next.slew.alpha, next.swing, cfg);
  return next;
}

void write_state_csv(std::ostream& out, const std::vector<SimState>& states) {
  out << "time,alpha,alpha_dot,theta1,theta2,tip_margin,payload_x,payload_y\n";
  char buf[256];
  for (const auto& s : states) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", s.time, s.slew.alpha,
                  s.slew.rate, s.swing.theta1, s.swing.theta2, s.tip_margin, s.payload_xy[0], s.payload_xy[1]);
    out << buf;
  }
}

}  // namespace slewshape
