#include "slewshape/shaper.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace slewshape {

namespace {

constexpr double kGridSnap = 1e-9;
constexpr double kMaxQuantizedResidual = 1e-3;

double clamp_rate(double v, double limit) { return std::clamp(v, -limit, limit); }

std::string format9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

double ShaperSpec::amplitude_sum() const {
  return std::accumulate(impulses.begin(), impulses.end(), 0.0,
                         [](double acc, const Impulse& i) { return acc + i.amplitude; });
}

double VelocityReference::displacement() const {
  // Step k drives the rate from samples[k-1] to samples[k].
  double sum = 0.0;
  double prev = 0.0;
  for (double v : samples) {
    sum += 0.5 * (prev + v);
    prev = v;
  }
  return sum * sample_period;
}

ShaperSpec design_mumzv(double natural_frequency, double deflection_ratio) {
  if (!(natural_frequency > 0.0) || !std::isfinite(natural_frequency)) {
    throw std::domain_error("design_mumzv: natural frequency must be > 0");
  }
  if (!(deflection_ratio > 0.0 && deflection_ratio <= 0.5)) {
    throw std::domain_error("design_mumzv: deflection ratio must lie in (0, 0.5]");
  }
  const double d = deflection_ratio;
  // Amplitudes (1, -1, 2D). Zeroing the real and imaginary parts of the
  // residual gives cos(w t3) = -D and cos(w t2) = 1 - 2 D^2.
  ShaperSpec spec;
  spec.natural_frequency = natural_frequency;
  spec.deflection_ratio = d;
  spec.impulses = {
      {0.0, 1.0},
      {std::acos(1.0 - 2.0 * d * d) / natural_frequency, -1.0},
      {std::acos(-d) / natural_frequency, 2.0 * d},
  };
  return spec;
}

double residual_vibration(const ShaperSpec& spec, double frequency) {
  std::complex<double> sum{0.0, 0.0};
  for (const auto& imp : spec.impulses) {
    sum += imp.amplitude * std::polar(1.0, frequency * imp.time);
  }
  return std::abs(sum);
}

std::vector<DelayTap> quantize(const ShaperSpec& spec, double sample_period) {
  if (!(sample_period > 0.0)) {
    throw std::invalid_argument("quantize: sample period must be > 0");
  }
  if (spec.duration() < 2.0 * sample_period) {
    throw std::invalid_argument("quantize: shaper duration is shorter than two samples");
  }
  std::vector<DelayTap> taps;
  taps.reserve(spec.impulses.size());
  for (const auto& imp : spec.impulses) {
    const double pos = imp.time / sample_period;
    double base = std::floor(pos);
    double frac = pos - base;
    if (frac < kGridSnap) {
      frac = 0.0;
    } else if (frac > 1.0 - kGridSnap) {
      base += 1.0;
      frac = 0.0;
    }
    taps.push_back({static_cast<long>(base), 1.0 - frac, frac, imp.amplitude});
  }
  const double residual = quantized_residual(taps, sample_period, spec.natural_frequency);
  if (residual >= kMaxQuantizedResidual) {
    throw std::invalid_argument("quantize: sample period too coarse for this shaper (residual " +
                                format9(residual) + ")");
  }
  return taps;
}

double quantized_residual(const std::vector<DelayTap>& taps, double sample_period, double frequency) {
  std::complex<double> sum{0.0, 0.0};
  for (const auto& t : taps) {
    const double lo = static_cast<double>(t.delay) * sample_period;
    sum += t.amplitude * (t.weight_lo * std::polar(1.0, frequency * lo) +
                          t.weight_hi * std::polar(1.0, frequency * (lo + sample_period)));
  }
  return std::abs(sum);
}

namespace {

long tap_span(const std::vector<DelayTap>& taps) {
  long span = 0;
  for (const auto& t : taps) {
    span = std::max(span, t.delay + (t.weight_hi > 0.0 ? 1 : 0));
  }
  return span;
}

}  // namespace

AccelCommand convolve(const AccelCommand& reference, const ShaperSpec& spec) {
  if (reference.samples.empty()) {
    throw std::invalid_argument("convolve: empty reference");
  }
  const auto taps = quantize(spec, reference.sample_period);
  const std::size_t n = reference.samples.size();
  AccelCommand out;
  out.sample_period = reference.sample_period;
  out.shaped = true;
  const auto len = n + static_cast<std::size_t>(tap_span(taps));
  out.samples.assign(len, 0.0);
  auto r = [&](long k) { return k >= 0 && k < static_cast<long>(n) ? reference.samples[static_cast<std::size_t>(k)] : 0.0; };
  for (std::size_t j = 0; j < len; ++j) {
    const long jj = static_cast<long>(j);
    double u = 0.0;
    for (const auto& t : taps) {
      u += t.amplitude * t.weight_lo * r(jj - t.delay);
      if (t.weight_hi != 0.0) u += t.amplitude * t.weight_hi * r(jj - t.delay - 1);
    }
    out.samples[j] = u;
  }
  return out;
}

VelocityReference integrate_to_velocity(const AccelCommand& shaped, double gain, double speed_limit,
                                        double initial_rate) {
  if (!(gain > 0.0)) throw std::invalid_argument("integrate_to_velocity: gain must be > 0");
  if (!(speed_limit > 0.0)) throw std::invalid_argument("integrate_to_velocity: speed limit must be > 0");
  if (std::abs(initial_rate) > speed_limit) {
    throw std::invalid_argument("integrate_to_velocity: |initial rate| exceeds the speed limit");
  }
  VelocityReference ref;
  ref.sample_period = shaped.sample_period;
  ref.speed_limit = speed_limit;
  ref.gain = gain;
  ref.samples.reserve(shaped.samples.size());
  const double half_step = 0.5 * gain * shaped.sample_period;
  double v = initial_rate;
  for (std::size_t k = 0; k < shaped.samples.size(); ++k) {
    if (k > 0) {
      v = clamp_rate(v + half_step * (shaped.samples[k - 1] + shaped.samples[k]), speed_limit);
    }
    ref.samples.push_back(v);
  }
  return ref;
}

double shaped_pulse_width(const ShaperSpec& spec, double speed_limit, double gain) {
  if (spec.impulses.size() != 3) {
    throw std::invalid_argument("shaped_pulse_width: expects a three-impulse shaper");
  }
  const double t2 = spec.impulses[1].time;
  const double t3 = spec.impulses[2].time;
  const double sum = spec.amplitude_sum();
  // Narrower pulses either overshoot speed_limit between impulses or reverse
  // the slew direction; speed_limit/(gain*sum) keeps the amplitude <= 1.
  return std::max({t2 / sum, t3 - t2, speed_limit / (gain * sum)});
}

VelocityReference plan_slew_command(double target_angle, double speed_limit, double gain,
                                    const std::optional<ShaperSpec>& spec, double sample_period) {
  if (!(sample_period > 0.0)) throw std::invalid_argument("plan_slew_command: sample period must be > 0");
  if (!(speed_limit > 0.0)) throw std::invalid_argument("plan_slew_command: speed limit must be > 0");
  if (!(gain > 0.0)) throw std::invalid_argument("plan_slew_command: gain must be > 0");
  if (target_angle < 0.0) throw std::invalid_argument("plan_slew_command: target angle must be >= 0");

  VelocityReference empty{{}, sample_period, speed_limit, gain};
  if (target_angle == 0.0) return empty;

  const double sum = spec ? spec->amplitude_sum() : 1.0;
  const double width = spec ? shaped_pulse_width(*spec, speed_limit, gain) : speed_limit / gain;
  const auto pulse = static_cast<std::size_t>(std::ceil(width / sample_period - kGridSnap));
  const double amplitude = speed_limit / (gain * sum * static_cast<double>(pulse) * sample_period);

  auto build = [&](std::size_t coast) {
    AccelCommand r;
    r.sample_period = sample_period;
    r.samples.reserve(2 * pulse + coast + 2);
    r.samples.push_back(0.0);
    r.samples.insert(r.samples.end(), pulse, amplitude);
    r.samples.insert(r.samples.end(), coast, 0.0);
    r.samples.insert(r.samples.end(), pulse, -amplitude);
    r.samples.push_back(0.0);
    const AccelCommand u = spec ? convolve(r, *spec) : r;
    auto v = integrate_to_velocity(u, gain, speed_limit, 0.0);
    for (auto& s : v.samples) {
      if (std::abs(s) < 1e-12) s = 0.0;
    }
    return v;
  };

  const auto shortest = build(0);
  const double d0 = shortest.displacement();
  const double per_sample = speed_limit * sample_period;
  if (target_angle < d0 - 0.5 * per_sample) {
    throw std::invalid_argument("plan_slew_command: target angle " + format9(target_angle) +
                                " rad is below the minimum maneuver displacement " + format9(d0) + " rad");
  }
  const auto coast = static_cast<std::size_t>(std::max(0.0, std::round((target_angle - d0) / per_sample)));
  return coast == 0 ? shortest : build(coast);
}

double equivalent_inertia(double payload_mass, double boom_mass, double radius) {
  return payload_mass * radius * radius + boom_mass * radius * radius / 3.0;
}

std::string to_record(const ShaperSpec& spec) {
  std::ostringstream os;
  os << "natural_frequency = " << format9(spec.natural_frequency) << '\n';
  os << "deflection_ratio = " << format9(spec.deflection_ratio) << '\n';
  for (std::size_t i = 0; i < spec.impulses.size(); ++i) {
    os << 't' << (i + 1) << " = " << format9(spec.impulses[i].time) << '\n';
    os << 'A' << (i + 1) << " = " << format9(spec.impulses[i].amplitude) << '\n';
  }
  return os.str();
}

ShaperSpec parse_record(std::string_view text) {
  std::map<std::string, double> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      std::size_t used = 0;
      kv[key] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw std::invalid_argument("parse_record: bad value for '" + key + "'");
    }
  }
  auto need = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument("parse_record: missing '" + key + "'");
    return it->second;
  };
  ShaperSpec spec;
  spec.natural_frequency = need("natural_frequency");
  spec.deflection_ratio = need("deflection_ratio");
  for (int i = 1; kv.count("t" + std::to_string(i)); ++i) {
    spec.impulses.push_back({need("t" + std::to_string(i)), need("A" + std::to_string(i))});
  }
  if (spec.impulses.empty()) throw std::invalid_argument("parse_record: no impulses");
  return spec;
}

RateCommandPipeline::RateCommandPipeline(std::optional<ShaperSpec> spec, double sample_period, double gain,
                                         double speed_limit, double initial_rate)
    : sample_period_(sample_period), gain_(gain), speed_limit_(speed_limit), rate_(initial_rate) {
  if (!(gain > 0.0) || !(speed_limit > 0.0) || !(sample_period > 0.0)) {
    throw std::invalid_argument("RateCommandPipeline: gain, speed limit and sample period must be > 0");
  }
  if (std::abs(initial_rate) > speed_limit) {
    throw std::invalid_argument("RateCommandPipeline: |initial rate| exceeds the speed limit");
  }
  if (spec) {
    taps_ = quantize(*spec, sample_period);
    history_.assign(static_cast<std::size_t>(tap_span(taps_)) + 1, 0.0);
  }
}

double RateCommandPipeline::push(double reference) {
  double u = reference;
  if (!taps_.empty()) {
    const std::size_t n = history_.size();
    head_ = (head_ + 1) % n;
    history_[head_] = reference;
    auto past = [&](long lag) { return history_[(head_ + n - static_cast<std::size_t>(lag)) % n]; };
    u = 0.0;
    for (const auto& t : taps_) {
      u += t.amplitude * t.weight_lo * past(t.delay);
      if (t.weight_hi != 0.0) u += t.amplitude * t.weight_hi * past(t.delay + 1);
    }
  }
  if (started_) {
    rate_ = clamp_rate(rate_ + 0.5 * gain_ * sample_period_ * (last_u_ + u), speed_limit_);
  }
  started_ = true;
  last_u_ = u;
  return rate_;
}

}  // namespace slewshape
