#pragma once

// Small numerical building blocks: adaptive Simpson quadrature, uniform-grid
// cubic interpolation, cubic Hermite segments and overflow-safe helpers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <utility>

#include "slowlight/error.hpp"

namespace slowlight {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

namespace detail {

template <class F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                       int depth, double& err_acc, bool& converged) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) {
    err_acc += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  if (depth <= 0) {
    converged = false;
    err_acc += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err_acc, converged) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err_acc, converged);
}

}  // namespace detail

/// Adaptive Simpson on [a, b]. The tolerance is relative to a coarse
/// 9-point estimate of the integral, floored at `abs_floor`.
template <class F>
QuadratureResult adaptive_simpson(const F& f, double a, double b, double rel_tol = 1e-10, int max_depth = 40,
                                  double abs_floor = 1e-300) {
  QuadratureResult out;
  if (a == b) return out;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  // Coarse estimate on eight panels sets the absolute scale.
  double coarse = 0.0;
  const int panels = 8;
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double x0 = a + p * w;
    coarse += w / 6.0 * (f(x0) + 4.0 * f(x0 + 0.5 * w) + f(x0 + w));
  }
  const double tol = std::max(rel_tol * std::abs(coarse), abs_floor);
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double x0 = a + p * w;
    const double x1 = (p + 1 == panels) ? b : x0 + w;
    const double f0 = f(x0);
    const double fm = f(0.5 * (x0 + x1));
    const double f1 = f(x1);
    const double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
    total += detail::simpson_recurse(f, x0, x1, f0, fm, f1, whole, tol / panels, max_depth, out.error_estimate,
                                     out.converged);
  }
  out.value = sign * total;
  return out;
}

/// adaptive_simpson that throws a numeric error on non-convergence.
template <class F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-10, int max_depth = 40) {
  const QuadratureResult r = adaptive_simpson(f, a, b, rel_tol, max_depth);
  if (!r.converged) {
    std::ostringstream msg;
    msg << "quadrature on [" << a << ", " << b << "] did not converge; achieved error estimate "
        << r.error_estimate << " (relative " << r.error_estimate / std::max(std::abs(r.value), 1e-300) << ")";
    fail(ErrorCode::kNumeric, msg.str());
  }
  return r.value;
}

/// Value halfway between samples i and i+1 of a uniform sequence, from the
/// four nearest samples (shifted one-sided stencil at the ends).
template <class T>
T cubic_midpoint(std::span<const T> v, std::size_t i) {
  const std::size_t n = v.size();
  if (n < 4) return (v[i] + v[i + 1]) * 0.5;
  if (i == 0) return (5.0 * v[0] + 15.0 * v[1] - 5.0 * v[2] + v[3]) * (1.0 / 16.0);
  if (i + 2 >= n) return (v[n - 4] - 5.0 * v[n - 3] + 15.0 * v[n - 2] + 5.0 * v[n - 1]) * (1.0 / 16.0);
  return (-v[i - 1] + 9.0 * v[i] + 9.0 * v[i + 1] - v[i + 2]) * (1.0 / 16.0);
}

/// Four-point Lagrange interpolation at fractional index x in [0, n-1].
template <class T>
T cubic_at(std::span<const T> v, double x) {
  const std::size_t n = v.size();
  if (n == 1) return v[0];
  if (n < 4) {
    const auto i = static_cast<std::size_t>(std::min(std::floor(x), static_cast<double>(n - 2)));
    const double t = x - static_cast<double>(i);
    return v[i] * (1.0 - t) + v[i + 1] * t;
  }
  auto base = static_cast<long>(std::floor(x)) - 1;
  base = std::max(0L, std::min(base, static_cast<long>(n) - 4));
  const double t = x - static_cast<double>(base);
  const double l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
  const double l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
  const double l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
  const double l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
  const auto b = static_cast<std::size_t>(base);
  return v[b] * l0 + v[b + 1] * l1 + v[b + 2] * l2 + v[b + 3] * l3;
}

struct HermiteValue {
  double value;
  double derivative;
};

/// Cubic Hermite segment on [x0, x0 + h] through (y0, d0), (y1, d1).
inline HermiteValue hermite(double x0, double h, double y0, double d0, double y1, double d1, double x) {
  const double t = (x - x0) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  const double value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
  const double dh00 = (6.0 * t2 - 6.0 * t) / h;
  const double dh10 = 3.0 * t2 - 4.0 * t + 1.0;
  const double dh01 = (-6.0 * t2 + 6.0 * t) / h;
  const double dh11 = 3.0 * t2 - 2.0 * t;
  return {value, dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1};
}

/// log(1 + e^x) without overflow.
inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

/// 1 / (1 + m^2), m / (1 + m^2) without overflow for large |m|.
inline double inv_one_plus_sq(double m) {
  if (std::abs(m) > 1e150) return 0.0;
  return 1.0 / (1.0 + m * m);
}
inline double m_over_one_plus_sq(double m) {
  if (std::abs(m) > 1.0) return 1.0 / (m + 1.0 / m);
  return m / (1.0 + m * m);
}

inline double sech(double x) {
  const double ax = std::abs(x);
  if (ax > 700.0) return 0.0;
  const double e = std::exp(-ax);
  return 2.0 * e / (1.0 + e * e);
}

}  // namespace slowlight
