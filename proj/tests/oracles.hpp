#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

// Residual (real, imaginary) of amplitudes (1, -1, 2D) at times (0, t2, t3).
inline std::pair<double, double> mumzv_residual(double w, double d, double t2, double t3) {
  return {1.0 - std::cos(w * t2) + 2.0 * d * std::cos(w * t3), -std::sin(w * t2) + 2.0 * d * std::sin(w * t3)};
}

// Grid search over (t2, t3) in (0, T)^2 followed by Newton polishing from the
// best grid cells. Returns the shortest root with t2 < t3.
inline std::optional<std::pair<double, double>> mumzv_root_search(double w, double d, int grid = 240) {
  const double period = 2.0 * std::numbers::pi / w;
  const double h = period / grid;
  std::vector<double> mag(static_cast<std::size_t>(grid * grid));
  auto at = [&](int i, int j) -> double& { return mag[static_cast<std::size_t>(i * grid + j)]; };
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const auto [re, im] = mumzv_residual(w, d, i * h, j * h);
      at(i, j) = std::hypot(re, im);
    }
  }
  std::optional<std::pair<double, double>> best;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      bool local_min = true;
      for (int di = -1; di <= 1 && local_min; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          const int ni = i + di;
          const int nj = j + dj;
          if (ni < 0 || nj < 0 || ni >= grid || nj >= grid || !(di || dj)) continue;
          if (at(ni, nj) < at(i, j)) {
            local_min = false;
            break;
          }
        }
      }
      if (!local_min) continue;
      double t2 = i * h;
      double t3 = j * h;
      double re = 0.0, im = 0.0;
      for (int it = 0; it < 60; ++it) {
        std::tie(re, im) = mumzv_residual(w, d, t2, t3);
        // Finite-difference Jacobian keeps the search independent of any closed form.
        const double e = 1e-7 * period;
        const auto [r2, i2] = mumzv_residual(w, d, t2 + e, t3);
        const auto [r3, i3] = mumzv_residual(w, d, t2, t3 + e);
        const double a = (r2 - re) / e, b = (r3 - re) / e, c = (i2 - im) / e, dd = (i3 - im) / e;
        const double det = a * dd - b * c;
        if (std::abs(det) < 1e-300) break;
        const double dx = (dd * re - b * im) / det;
        const double dy = (a * im - c * re) / det;
        t2 -= dx;
        t3 -= dy;
        if (std::abs(dx) + std::abs(dy) < 1e-15 * period) break;
      }
      std::tie(re, im) = mumzv_residual(w, d, t2, t3);
      if (std::hypot(re, im) > 1e-12 || !(t2 > 0.0 && t2 < t3 && t3 < period)) continue;
      if (!best || t3 < best->second - 1e-9) best = {{t2, t3}};
    }
  }
  return best;
}

// Undamped linear pendulum x'' + w^2 x = -a(t) driven by piecewise-constant
// acceleration with sample period dt, integrated exactly between samples.
struct PendulumTrace {
  double peak = 0.0;      // max |x| while forced
  double residual = 0.0;  // amplitude after the command ends
};

inline PendulumTrace exact_pendulum(const std::vector<double>& accel, double dt, double w) {
  double x = 0.0;
  double v = 0.0;
  PendulumTrace out;
  const double c = std::cos(w * dt);
  const double s = std::sin(w * dt);
  for (double a : accel) {
    const double xs = -a / (w * w);  // particular solution
    const double x0 = x - xs;
    x = xs + x0 * c + v / w * s;
    v = -x0 * w * s + v * c;
    out.peak = std::max(out.peak, std::abs(x));
  }
  out.residual = std::hypot(x, v / w);
  return out;
}

// Same pendulum under a continuous-time acceleration that is constant between
// arbitrary breakpoints: segments are (duration, acceleration). The peak is
// sampled `probes` times per segment in closed form.
inline PendulumTrace exact_pendulum_segments(const std::vector<std::pair<double, double>>& segments, double w,
                                             int probes = 200) {
  double x = 0.0;
  double v = 0.0;
  PendulumTrace out;
  for (const auto& [len, a] : segments) {
    const double xs = -a / (w * w);
    const double x0 = x - xs;
    for (int k = 1; k <= probes; ++k) {
      const double t = len * k / probes;
      out.peak = std::max(out.peak, std::abs(xs + x0 * std::cos(w * t) + v / w * std::sin(w * t)));
    }
    const double c = std::cos(w * len);
    const double s = std::sin(w * len);
    x = xs + x0 * c + v / w * s;
    v = -x0 * w * s + v * c;
  }
  out.residual = std::hypot(x, v / w);
  return out;
}

// Times at which x crosses zero upward, linearly interpolated.
inline std::vector<double> upward_crossings(const std::vector<double>& t, const std::vector<double>& x) {
  std::vector<double> out;
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (x[k - 1] < 0.0 && x[k] >= 0.0) out.push_back(t[k - 1] + (t[k] - t[k - 1]) * (-x[k - 1]) / (x[k] - x[k - 1]));
  }
  return out;
}

}  // namespace oracle
