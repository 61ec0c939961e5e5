#pragma once

#include <array>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace slewshape {

inline constexpr double kDegree = std::numbers::pi / 180.0;

/// Raised for invalid configuration values; `field()` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct CraneConfig {
  double structure_mass = 7.24;           // M_s, kg (lower structure incl. counterweight)
  double boom_mass = 2.93;                // M_b, kg
  double payload_mass = 0.5;              // m, kg
  double boom_length = 0.9144;            // L_b, m
  double radius = 0.7;                    // R = L_b cos(beta), m
  double rope_length = 0.5715;            // l, m
  double boom_com_fraction = 0.5;         // c
  double footprint_half_width = 0.12;     // w, m
  double counterweight_offset = 0.018;    // d_s, m; rotates with the upper structure, opposite the boom
  double carrier_offset = 0.002;          // m; fixed offset of the carrier CoM along world -x
  double gravity = 9.81;                  // m/s^2
  double max_torque = 7.2;                // tau_max, N m
  double slew_inertia = 0.72;             // J_eq, kg m^2; <= 0 derives it from the masses
  double speed_limit = 32.51 * kDegree;    // V_L, rad/s
  double bending_moment_max = 0.0;        // N m; 0 disables the turntable cap

  double elevation() const;  // beta
  double equivalent_inertia() const;
  double eta() const { return max_torque / equivalent_inertia(); }
  void validate() const;
};

struct SwingState {
  double theta1 = 0.0;  // tangential, rad
  double theta2 = 0.0;  // radial, rad
  double rate1 = 0.0;
  double rate2 = 0.0;
};

struct SlewState {
  double alpha = 0.0;
  double rate = 0.0;
  double accel = 0.0;
};

struct SimState {
  double time = 0.0;
  SlewState slew;
  SwingState swing;
  double tip_margin = 0.0;  // N m, minimum over footprint edges
  bool tipped = false;      // latched
  bool invalid = false;     // |theta| reached pi/2
  std::array<double, 2> payload_xy{0.0, 0.0};
};

double natural_frequency(double rope_length, double gravity = 9.81);

double swing_magnitude(const SwingState& s);

/// (theta1_ddot, theta2_ddot) of the linearised slewing pendulum.
std::array<double, 2> swing_derivatives(const SwingState& state, const SlewState& slew, const CraneConfig& cfg);

/// Stabilising minus overturning moment about the binding footprint edge.
double tip_over_margin(double alpha, const SwingState& swing, const CraneConfig& cfg);
double tip_over_margin(const SimState& state, const CraneConfig& cfg);

std::array<double, 2> boom_tip_xy(double alpha, const CraneConfig& cfg);
std::array<double, 2> payload_xy(double alpha, const SwingState& swing, const CraneConfig& cfg);

SimState initial_state(double alpha, const CraneConfig& cfg);

/// One fixed step under velocity control. Throws std::logic_error on a tipped state.
SimState step(const SimState& state, double commanded_rate, double dt, const CraneConfig& cfg);

void write_state_csv(std::ostream& out, const std::vector<SimState>& states);

}  // namespace slewshape
