#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slewshape {

struct Impulse {
  double time = 0.0;       // s
  double amplitude = 0.0;  // dimensionless
};

/// Impulse sequence of an input shaper. For the MUMZV family the sequence has
/// three impulses with amplitudes (1, -1, 2*D_L) placed so that
/// sum A_i exp(j*omega_n*t_i) vanishes.
struct ShaperSpec {
  std::vector<Impulse> impulses;
  double natural_frequency = 0.0;  // rad/s
  double deflection_ratio = 0.0;

  double duration() const { return impulses.empty() ? 0.0 : impulses.back().time; }
  double amplitude_sum() const;
};

/// Uniformly sampled normalized acceleration reference. Unshaped commands lie in
/// [-1, 1]; shaped outputs may leave that range and carry `shaped = true`.
struct AccelCommand {
  std::vector<double> samples;
  double sample_period = 0.0;
  bool shaped = false;
};

/// Slewing-rate reference. Sample k is the rate commanded over sim step k.
struct VelocityReference {
  std::vector<double> samples;  // rad/s
  double sample_period = 0.0;   // s
  double speed_limit = 0.0;     // V_L, rad/s
  double gain = 0.0;            // eta, rad/s^2

  double duration() const { return static_cast<double>(samples.size()) * sample_period; }
  /// Slew angle swept when the reference is tracked exactly (trapezoidal).
  double displacement() const;
};

ShaperSpec design_mumzv(double natural_frequency, double deflection_ratio);

/// |sum A_i exp(j*omega*t_i)|.
double residual_vibration(const ShaperSpec& spec, double frequency);

/// Fractional-delay realisation of one impulse on a sample grid: the amplitude
/// is split linearly between samples `delay` and `delay + 1`.
struct DelayTap {
  long delay = 0;
  double weight_lo = 1.0;
  double weight_hi = 0.0;
  double amplitude = 0.0;
};

/// Maps impulse times onto the grid. Throws std::invalid_argument when the
/// shaper is too short for the grid (t_3 < 2*dt) or the realised residual at
/// omega_n reaches 1e-3.
std::vector<DelayTap> quantize(const ShaperSpec& spec, double sample_period);

/// Residual of the grid-realised shaper at `frequency`.
double quantized_residual(const std::vector<DelayTap>& taps, double sample_period, double frequency);

/// u[k] = sum_i A_i r[k - t_i/dt]; output is longer than the input by the
/// shaper length in samples. Not re-clamped.
AccelCommand convolve(const AccelCommand& reference, const ShaperSpec& spec);

/// Cumulative trapezoidal integral of gain*u from initial_rate, with the running
/// value clamped to [-V_L, V_L] after every sample.
VelocityReference integrate_to_velocity(const AccelCommand& shaped, double gain, double speed_limit,
                                        double initial_rate = 0.0);

/// Rest-to-rest bang-coast-bang maneuver through `target_angle`, optionally
/// shaped. Throws std::invalid_argument if the target is shorter than the
/// shortest maneuver that reaches `speed_limit`.
VelocityReference plan_slew_command(double target_angle, double speed_limit, double gain,
                                    const std::optional<ShaperSpec>& spec, double sample_period);

/// Width of the acceleration pulse used by plan_slew_command.
double shaped_pulse_width(const ShaperSpec& spec, double speed_limit, double gain);

/// J_eq = m R^2 + M_b R^2 / 3 (point payload, boom as a uniform rod).
double equivalent_inertia(double payload_mass, double boom_mass, double radius);

std::string to_record(const ShaperSpec& spec);
ShaperSpec parse_record(std::string_view text);

/// Streaming form of convolve + integrate_to_velocity used by live sessions.
/// Each call consumes one reference sample and returns the rate command for
/// that sample.
class RateCommandPipeline {
 public:
  RateCommandPipeline(std::optional<ShaperSpec> spec, double sample_period, double gain,
                      double speed_limit, double initial_rate = 0.0);

  double push(double reference);
  double last_shaped() const { return last_u_; }
  double rate() const { return rate_; }
  bool shaped() const { return !taps_.empty(); }

 private:
  double sample_period_;
  double gain_;
  double speed_limit_;
  std::vector<DelayTap> taps_;
  std::vector<double> history_;  // ring buffer of past references
  std::size_t head_ = 0;
  double last_u_ = 0.0;
  double rate_ = 0.0;
  bool started_ = false;
};

}  // namespace slewshape
