#pragma once

// Physical parameters, unit normalization, lattice geometry and the small
// state types shared by every other header. Quantities are dimensionless:
// tau in pulse-length units, Rabi frequencies on the MHz scale, zeta in units
// of l_p / c.

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>

#include "slowlight/error.hpp"

namespace slowlight {

using cplx = std::complex<double>;

/// Constraint constant of a soliton with amplitude eps0 at detuning delta:
/// k = nu0 / (8 (eps0^2 + delta^2)).
inline double k_from_amplitude(double nu0, double eps0, double delta = 0.0) {
  require(std::isfinite(nu0) && nu0 > 0.0, ErrorCode::kInvalidParameter, "nu0 must be positive");
  require(std::isfinite(eps0) && std::isfinite(delta), ErrorCode::kInvalidParameter,
          "eps0 and delta must be finite");
  const double denom = 8.0 * (eps0 * eps0 + delta * delta);
  require(denom > 0.0, ErrorCode::kSingularity, "k_from_amplitude: eps0 = delta = 0 divides by zero");
  return nu0 / denom;
}

class PhysicalParams {
 public:
  /// Representative set: nu0 = 4.5, eps0 = 3, gamma = 0, delta = 0, k = 0.0625.
  PhysicalParams() : PhysicalParams(from_amplitude(4.5, 3.0)) {}

  static PhysicalParams from_amplitude(double nu0, double eps0, double gamma = 0.0, double delta = 0.0) {
    return PhysicalParams(nu0, gamma, eps0, k_from_amplitude(nu0, eps0, delta), delta, false);
  }

  /// Arbitrary k (pure Liouville mode). The override flag is set whenever k
  /// differs from the amplitude relation.
  static PhysicalParams with_explicit_k(double nu0, double eps0, double k, double gamma = 0.0,
                                        double delta = 0.0) {
    PhysicalParams p(nu0, gamma, eps0, k, delta, false);
    p.k_overridden_ = (k != k_from_amplitude(nu0, eps0, delta));
    return p;
  }

  double nu0() const { return nu0_; }
  double gamma() const { return gamma_; }
  double eps0() const { return eps0_; }
  double k() const { return k_; }
  double delta() const { return delta_; }
  bool k_overridden() const { return k_overridden_; }

  PhysicalParams with_k(double k) const { return with_explicit_k(nu0_, eps0_, k, gamma_, delta_); }
  PhysicalParams with_gamma(double gamma) const {
    PhysicalParams p(nu0_, gamma, eps0_, k_, delta_, k_overridden_);
    return p;
  }

  friend bool operator==(const PhysicalParams&, const PhysicalParams&) = default;

 private:
  PhysicalParams(double nu0, double gamma, double eps0, double k, double delta, bool overridden)
      : nu0_(nu0), gamma_(gamma), eps0_(eps0), k_(k), delta_(delta), k_overridden_(overridden) {
    require(std::isfinite(nu0_) && nu0_ > 0.0, ErrorCode::kInvalidParameter, "nu0 must be positive");
    require(std::isfinite(gamma_) && gamma_ >= 0.0, ErrorCode::kInvalidParameter, "gamma must be >= 0");
    require(std::isfinite(eps0_) && eps0_ != 0.0, ErrorCode::kInvalidParameter, "eps0 must be nonzero");
    require(std::isfinite(k_) && k_ > 0.0, ErrorCode::kInvalidParameter, "k must be positive");
    require(std::isfinite(delta_), ErrorCode::kInvalidParameter, "delta must be finite");
  }

  double nu0_;
  double gamma_;
  double eps0_;
  double k_;
  double delta_;
  bool k_overridden_;
};

/// Result of mapping laboratory scales onto the dimensionless model.
struct UnitNormalization {
  double omega0 = 0.0;  // control magnitude [MHz]
  double nu0 = 0.0;     // omega0^2 / 2
  bool degenerate = false;
  // SI metadata. The reference slow-light speed is 1e-7 c.
  double time_unit_s = 0.0;       // t_p
  double velocity_unit_m_s = 0.0;  // v_g
  double length_unit_m = 0.0;     // l_p = v_g t_p
  double zeta_unit_s = 0.0;       // l_p / c

  /// Parameter set for the normalized coupling; throws when degenerate.
  PhysicalParams params(double eps0 = 3.0, double gamma = 0.0) const {
    require(!degenerate, ErrorCode::kDegenerate, "zero control magnitude gives nu0 = 0; cannot drive dynamics");
    return PhysicalParams::from_amplitude(nu0, eps0, gamma, 0.0);
  }
};

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kReferenceSlowdown = 1e-7;

inline UnitNormalization normalize_units(double omega0_mhz, double pulse_length_us) {
  require(std::isfinite(pulse_length_us) && pulse_length_us > 0.0, ErrorCode::kInvalidParameter,
          "pulse length must be positive");
  require(std::isfinite(omega0_mhz) && omega0_mhz >= 0.0, ErrorCode::kInvalidParameter,
          "control magnitude must be >= 0");
  UnitNormalization u;
  u.omega0 = omega0_mhz;
  u.nu0 = 0.5 * omega0_mhz * omega0_mhz;
  u.degenerate = !(u.nu0 > 0.0);
  u.time_unit_s = pulse_length_us * 1e-6;
  u.velocity_unit_m_s = kReferenceSlowdown * kSpeedOfLight;
  u.length_unit_m = u.velocity_unit_m_s * u.time_unit_s;
  u.zeta_unit_s = u.length_unit_m / kSpeedOfLight;
  return u;
}

/// Uniform (zeta, tau) lattice. zeta starts at the medium entrance, zeta = 0.
class SimulationGrid {
 public:
  SimulationGrid(double tau_min, double tau_max, std::size_t n_tau, double zeta_max, std::size_t n_zeta)
      : tau_min_(tau_min), tau_max_(tau_max), zeta_max_(zeta_max), n_tau_(n_tau), n_zeta_(n_zeta) {
    require(std::isfinite(tau_min) && std::isfinite(tau_max) && tau_min < tau_max,
            ErrorCode::kInvalidParameter, "grid needs tau_min < tau_max");
    require(std::isfinite(zeta_max) && zeta_max > 0.0, ErrorCode::kInvalidParameter, "grid needs zeta_max > 0");
    require(n_tau >= 2 && n_zeta >= 2, ErrorCode::kInvalidParameter, "grid needs at least 2 points per axis");
  }

  double tau_min() const { return tau_min_; }
  double tau_max() const { return tau_max_; }
  double zeta_max() const { return zeta_max_; }
  std::size_t n_tau() const { return n_tau_; }
  std::size_t n_zeta() const { return n_zeta_; }

  double h_tau() const { return (tau_max_ - tau_min_) / static_cast<double>(n_tau_ - 1); }
  double h_zeta() const { return zeta_max_ / static_cast<double>(n_zeta_ - 1); }

  double tau(std::size_t i) const {
    return i + 1 == n_tau_ ? tau_max_ : tau_min_ + static_cast<double>(i) * h_tau();
  }
  double zeta(std::size_t j) const {
    return j + 1 == n_zeta_ ? zeta_max_ : static_cast<double>(j) * h_zeta();
  }

  /// Same window with both spacings divided by `factor`.
  SimulationGrid refined(std::size_t factor) const {
    return {tau_min_, tau_max_, (n_tau_ - 1) * factor + 1, zeta_max_, (n_zeta_ - 1) * factor + 1};
  }

  friend bool operator==(const SimulationGrid&, const SimulationGrid&) = default;

 private:
  double tau_min_;
  double tau_max_;
  double zeta_max_;
  std::size_t n_tau_;
  std::size_t n_zeta_;
};

struct AtomState {
  cplx psi1{1.0, 0.0};
  cplx psi2{0.0, 0.0};
  cplx psi3{0.0, 0.0};

  double norm2() const { return std::norm(psi1) + std::norm(psi2) + std::norm(psi3); }
  static AtomState dark() { return {}; }
  friend bool operator==(const AtomState&, const AtomState&) = default;
};

struct FieldPair {
  cplx omega_a{0.0, 0.0};
  cplx omega_b{0.0, 0.0};
  friend bool operator==(const FieldPair&, const FieldPair&) = default;
};

}  // namespace slowlight
