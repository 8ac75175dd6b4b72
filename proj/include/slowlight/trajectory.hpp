#pragma once

// Soliton-centre tracking on gridded fields: sub-grid peak position per tau,
// windowed least-squares velocity and travel distance.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "slowlight/error.hpp"
#include "slowlight/solver.hpp"

namespace slowlight {

struct TrajectoryOptions {
  /// Half-width of the least-squares velocity window in tau units.
  double velocity_half_window = 0.25;
  /// Travel distance is centre(tau_end) - centre(tau_start); defaults are 0
  /// (clamped into the grid) and tau_max.
  std::optional<double> tau_start;
  std::optional<double> tau_end;
};

struct TrajectoryEstimate {
  std::vector<double> tau;
  std::vector<double> center;    // NaN where the peak sits on the zeta boundary
  std::vector<bool> interior;
  std::vector<double> velocity;  // NaN where the window holds < 3 interior samples
  double tau_start = 0.0;
  double tau_end = 0.0;
  double travel_distance = std::numeric_limits<double>::quiet_NaN();
  double travel_uncertainty = std::numeric_limits<double>::quiet_NaN();
  /// The peak left the zeta window somewhere in [tau_start, tau_end].
  bool truncated = false;
};

namespace detail {

/// Peak of |Omega_a| along zeta at tau index it, using every `step`-th row.
inline std::optional<double> peak_center(const SolutionGrids& g, std::size_t it, std::size_t step) {
  const std::size_t rows = (g.grid.n_zeta() - 1) / step + 1;
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double v = std::abs(g.omega_a(r * step, it));
    if (v > best_val) {
      best_val = v;
      best = r;
    }
  }
  if (best == 0 || best + 1 == rows || !(best_val > 0.0)) return std::nullopt;
  const double ym = std::abs(g.omega_a((best - 1) * step, it));
  const double y0 = best_val;
  const double yp = std::abs(g.omega_a((best + 1) * step, it));
  const double curv = ym - 2.0 * y0 + yp;
  const double offset = curv < 0.0 ? 0.5 * (ym - yp) / curv : 0.0;
  const double h = g.grid.h_zeta() * static_cast<double>(step);
  return (static_cast<double>(best) + offset) * h;
}

inline std::size_t nearest_tau_index(const SimulationGrid& grid, double tau) {
  const double x = (tau - grid.tau_min()) / grid.h_tau();
  const double c = std::clamp(std::round(x), 0.0, static_cast<double>(grid.n_tau() - 1));
  return static_cast<std::size_t>(c);
}

}  // namespace detail

/// Centre trajectory of |Omega_a|. The travel-distance uncertainty is the gap
/// to the same estimate made from every other zeta row.
inline TrajectoryEstimate measure_trajectory(const SolutionGrids& g, const TrajectoryOptions& opt = {}) {
  const std::size_t nt = g.grid.n_tau();
  require(g.grid.n_zeta() >= 3, ErrorCode::kGridTooSmall, "trajectory needs at least 3 zeta rows");
  TrajectoryEstimate out;
  out.tau.resize(nt);
  out.center.assign(nt, std::numeric_limits<double>::quiet_NaN());
  out.interior.assign(nt, false);
  out.velocity.assign(nt, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t it = 0; it < nt; ++it) {
    out.tau[it] = g.grid.tau(it);
    if (const auto c = detail::peak_center(g, it, 1)) {
      out.center[it] = *c;
      out.interior[it] = true;
    }
  }
  std::size_t n_interior = 0;
  for (bool b : out.interior) n_interior += b ? 1 : 0;
  require(n_interior > 0, ErrorCode::kDomain, "the soliton peak never lies inside the zeta window");

  const double ht = g.grid.h_tau();
  const auto w = static_cast<std::size_t>(std::max(1.0, std::round(opt.velocity_half_window / ht)));
  for (std::size_t it = 0; it < nt; ++it) {
    const std::size_t lo = it >= w ? it - w : 0;
    const std::size_t hi = std::min(nt - 1, it + w);
    double st = 0.0;
    double sz = 0.0;
    double stt = 0.0;
    double stz = 0.0;
    std::size_t n = 0;
    for (std::size_t j = lo; j <= hi; ++j) {
      if (!out.interior[j]) continue;
      const double t = out.tau[j] - out.tau[it];
      st += t;
      sz += out.center[j];
      stt += t * t;
      stz += t * out.center[j];
      ++n;
    }
    if (n < 3) continue;
    const double dn = static_cast<double>(n);
    const double denom = dn * stt - st * st;
    if (denom > 0.0) out.velocity[it] = (dn * stz - st * sz) / denom;
  }

  out.tau_start = std::clamp(opt.tau_start.value_or(0.0), g.grid.tau_min(), g.grid.tau_max());
  out.tau_end = std::clamp(opt.tau_end.value_or(g.grid.tau_max()), g.grid.tau_min(), g.grid.tau_max());
  const std::size_t i0 = detail::nearest_tau_index(g.grid, out.tau_start);
  const std::size_t i1 = detail::nearest_tau_index(g.grid, out.tau_end);
  for (std::size_t it = std::min(i0, i1); it <= std::max(i0, i1); ++it) {
    if (!out.interior[it]) out.truncated = true;
  }
  if (out.interior[i0] && out.interior[i1]) {
    out.travel_distance = out.center[i1] - out.center[i0];
    if (g.grid.n_zeta() >= 5) {
      const auto c0 = detail::peak_center(g, i0, 2);
      const auto c1 = detail::peak_center(g, i1, 2);
      if (c0 && c1) out.travel_uncertainty = std::abs(out.travel_distance - (*c1 - *c0));
    }
  }
  return out;
}

/// Mean of the finite velocity estimates with tau in [t0, t1].
inline double mean_velocity(const TrajectoryEstimate& t, double t0, double t1) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.tau.size(); ++i) {
    if (t.tau[i] < t0 || t.tau[i] > t1 || !std::isfinite(t.velocity[i])) continue;
    s += t.velocity[i];
    ++n;
  }
  require(n > 0, ErrorCode::kEmptyMask, "no velocity samples in the requested tau range");
  return s / static_cast<double>(n);
}

}  // namespace slowlight
