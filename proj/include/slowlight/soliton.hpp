#pragma once

// Exact slow-light soliton family: fields, Liouville representation, atomic
// amplitudes, group velocity and stopping distance.

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "slowlight/error.hpp"
#include "slowlight/modulation.hpp"
#include "slowlight/numerics.hpp"
#include "slowlight/params.hpp"

namespace slowlight {

/// Two algebraic routes to the channel-b field eta = Omega_b.
enum class EtaForm {
  /// eta = 2 (dm - m d_tau rho), rho = -ln|Omega_a|; expands to
  /// (2 dm - 2 eps0 m tanh(phi)) / (m^2 + 1).
  kGradient,
  /// eta = (2 eps0 m tanh(phi) + dm / 2) / (m^2 + 1).
  kTanh,
};

/// One reading of the published solution. `tanh_sign` flips the tanh term of
/// eta relative to the form as written; `psi3_sign` flips the excited-state
/// amplitude relative to psi3 = -Omega_a / (2 |eps0|).
struct ConventionVariant {
  EtaForm eta_form = EtaForm::kGradient;
  int tanh_sign = +1;
  int psi3_sign = +1;

  std::string label() const {
    std::string s = eta_form == EtaForm::kGradient ? "gradient" : "tanh";
    s += tanh_sign > 0 ? "/tanh+" : "/tanh-";
    s += psi3_sign > 0 ? "/psi3+" : "/psi3-";
    return s;
  }

  static ConventionVariant from_label(const std::string& label) {
    for (const auto& v : all()) {
      if (v.label() == label) return v;
    }
    fail(ErrorCode::kInvalidParameter, "unknown convention variant '" + label + "'");
  }

  /// The eight enumerated variants in adjudication priority order.
  static std::array<ConventionVariant, 8> all() {
    std::array<ConventionVariant, 8> out{};
    std::size_t i = 0;
    for (EtaForm f : {EtaForm::kGradient, EtaForm::kTanh}) {
      for (int t : {+1, -1}) {
        for (int p : {+1, -1}) out[i++] = {f, t, p};
      }
    }
    return out;
  }

  friend bool operator==(const ConventionVariant&, const ConventionVariant&) = default;
};

/// Variant selected by adjudicate_conventions for every tested parameter set.
inline constexpr ConventionVariant kAdjudicatedConvention{EtaForm::kGradient, +1, +1};

/// Atomic amplitudes are reported in the gauge whose dark state is (1, 0, 0).
/// Multiplying a state by this phase maps it to the gauge in which psi3 is real.
inline const cplx kRealPsi3Gauge{0.0, 1.0};

class SolitonSolution {
 public:
  SolitonSolution(PhysicalParams params, ModulationProfile profile, double phi0 = 0.0,
                  ConventionVariant convention = kAdjudicatedConvention)
      : params_(params), profile_(std::move(profile)), phi0_(phi0), convention_(convention) {
    require(std::isfinite(phi0), ErrorCode::kInvalidParameter, "phi0 must be finite");
  }

  const PhysicalParams& params() const { return params_; }
  const ModulationProfile& profile() const { return profile_; }
  double phi0() const { return phi0_; }
  const ConventionVariant& convention() const { return convention_; }
  /// Results with an overridden k are Liouville solutions only.
  bool maxwell_bloch_consistent() const { return !params_.k_overridden(); }

  SolitonSolution with_convention(ConventionVariant c) const { return {params_, profile_, phi0_, c}; }
  SolitonSolution with_phi0(double phi0) const { return {params_, profile_, phi0, convention_}; }
  SolitonSolution with_params(PhysicalParams p) const { return {p, profile_, phi0_, convention_}; }

  /// phi = -4 k eps0 zeta + eps0 F(tau) + phi0
  double phase(double zeta, double tau) const {
    return -4.0 * params_.k() * params_.eps0() * zeta + params_.eps0() * phase_integral(profile_, tau) + phi0_;
  }

  /// zeta position of the phi = 0 ridge at time tau.
  double center(double tau) const {
    const double e = params_.eps0();
    return (e * phase_integral(profile_, tau) + phi0_) / (4.0 * params_.k() * e);
  }

 private:
  PhysicalParams params_;
  ModulationProfile profile_;
  double phi0_;
  ConventionVariant convention_;
};

namespace detail {

/// eta for a given phase and modulation value.
inline double eta_value(const ConventionVariant& c, double eps0, const ModulationValue& mv, double phi) {
  const double th = c.tanh_sign * std::tanh(phi);
  const double inv = inv_one_plus_sq(mv.m);
  const double m_inv = m_over_one_plus_sq(mv.m);
  if (c.eta_form == EtaForm::kGradient) return 2.0 * mv.dm * inv - 2.0 * eps0 * th * m_inv;
  return 2.0 * eps0 * th * m_inv + 0.5 * mv.dm * inv;
}

}  // namespace detail

/// Omega_a = 2 eps0 sech(phi) / sqrt(m^2+1); Omega_b from the convention.
inline FieldPair soliton_fields(const SolitonSolution& sol, double zeta, double tau) {
  const ModulationValue mv = m_eval(sol.profile(), tau);
  const double e = sol.params().eps0();
  const double phi = sol.phase(zeta, tau);
  const double oa = 2.0 * e * sech(phi) * std::sqrt(inv_one_plus_sq(mv.m));
  return {cplx(oa, 0.0), cplx(detail::eta_value(sol.convention(), e, mv, phi), 0.0)};
}

/// Channel-b field ahead of the soliton (the tail where the atoms are dark).
inline double background_field(const SolitonSolution& sol, double tau) {
  const ModulationValue mv = m_eval(sol.profile(), tau);
  const double e = sol.params().eps0();
  // phi -> -sign(eps0) * infinity on the dark side.
  const double phi = e > 0.0 ? -1e3 : 1e3;
  return detail::eta_value(sol.convention(), e, mv, phi);
}

struct LiouvilleFields {
  double rho;      // |Omega_a| = exp(-rho)
  double eta;      // Omega_b
  double a_plus;   // chiral function of zeta
  double a_minus;  // chiral function of tau
};

/// rho from the chiral pair A+(zeta) = -exp(-8 eps0 k zeta)/k,
/// A-(tau) = exp(2 (eps0 F(tau) + phi0)), evaluated in the log domain.
inline LiouvilleFields rho_liouville(const SolitonSolution& sol, double zeta, double tau) {
  const ModulationValue mv = m_eval(sol.profile(), tau);
  const double e = sol.params().eps0();
  const double k = sol.params().k();
  const double F = phase_integral(sol.profile(), tau);
  const double log_dz_aplus = std::log(8.0 * std::abs(e)) - 8.0 * e * k * zeta;
  const double two_chi = 2.0 * (e * F + sol.phi0());
  const double log_dt_aminus = std::log(2.0 * std::abs(e)) + std::log(inv_one_plus_sq(mv.m)) + two_chi;
  // 1 - k A+ A- = 1 + exp(2 psi) with 2 psi = -8 eps0 k zeta + two_chi
  const double log_denominator = 2.0 * softplus(-8.0 * e * k * zeta + two_chi);
  const double rho = -0.5 * (log_dz_aplus + log_dt_aminus - log_denominator);
  if (!std::isfinite(rho)) {
    std::ostringstream msg;
    msg << "Liouville log argument is not positive/finite at zeta = " << zeta << ", tau = " << tau;
    fail(ErrorCode::kSingularity, msg.str());
  }
  const double phi = sol.phase(zeta, tau);
  return {rho, detail::eta_value(sol.convention(), e, mv, phi), -std::exp(-8.0 * e * k * zeta) / k,
          std::exp(two_chi)};
}

/// Excited-state amplitude in the (1,0,0) gauge: i * psi3_sign * Omega_a / (2|eps0|).
inline cplx soliton_psi3(const SolitonSolution& sol, const FieldPair& f) {
  return cplx(0.0, static_cast<double>(sol.convention().psi3_sign)) * f.omega_a / (2.0 * std::abs(sol.params().eps0()));
}

namespace detail {

/// Lowest tau (searching backwards from `tau`) where |phi| >= 25 at this
/// zeta; stops at the domain bound.
inline double dark_anchor(const SolitonSolution& sol, double zeta, double tau) {
  const Interval d = sol.profile().domain();
  const double e = sol.params().eps0();
  double step = 1.0;
  double t = tau;
  for (int it = 0; it < 400; ++it) {
    if (t <= d.lo) return d.lo;
    if (std::copysign(1.0, e) * sol.phase(zeta, t) <= -25.0) return t;
    t = std::max(d.lo, t - step);
    step *= 1.5;
  }
  return t;
}

}  // namespace detail

/// Atomic state along a tau column at fixed zeta. psi3 comes from the
/// amplitude relation; psi1 and psi2 are integrated from the dark state at
/// `tau_start` (default: automatically chosen deep in the leading tail).
/// `taus` must be ascending.
inline std::vector<AtomState> atomic_column(const SolitonSolution& sol, double zeta, std::span<const double> taus,
                                            std::optional<double> tau_start = std::nullopt) {
  require(sol.params().gamma() == 0.0, ErrorCode::kInvalidParameter, "atomic_state requires gamma = 0");
  std::vector<AtomState> out(taus.size());
  if (taus.empty()) return out;
  const double start = tau_start ? *tau_start : detail::dark_anchor(sol, zeta, taus.front());
  require(start <= taus.front(), ErrorCode::kInvalidParameter, "tau_start must not exceed the first sample");
  const double peak = 2.0 * std::abs(sol.params().eps0());
  const double edge = std::abs(soliton_fields(sol, zeta, start).omega_a);
  if (edge > 1e-8 * peak) {
    std::ostringstream msg;
    msg << "|Omega_a| = " << edge << " at the lower tau edge " << start << " exceeds 1e-8 of the peak " << peak;
    fail(ErrorCode::kInsufficientAsymptote, msg.str());
  }

  const double h_max = 0.01 / std::max(1.0, std::abs(sol.params().eps0()));
  const auto rhs = [&](double t, cplx& d1, cplx& d2) {
    const FieldPair f = soliton_fields(sol, zeta, t);
    const cplx p3 = soliton_psi3(sol, f);
    d1 = cplx(0.0, 0.5) * std::conj(f.omega_a) * p3;
    d2 = cplx(0.0, 0.5) * std::conj(f.omega_b) * p3;
  };

  cplx p1(1.0, 0.0);
  cplx p2(0.0, 0.0);
  double t = start;
  cplx a1;
  cplx a2;
  rhs(t, a1, a2);
  for (std::size_t s = 0; s < taus.size(); ++s) {
    const double target = taus[s];
    const double span = target - t;
    if (span > 0.0) {
      const auto steps = static_cast<std::size_t>(std::ceil(span / h_max));
      const double h = span / static_cast<double>(steps);
      for (std::size_t q = 0; q < steps; ++q) {
        const double t1 = (q + 1 == steps) ? target : t + h;
        const double hq = t1 - t;
        cplx m1;
        cplx m2;
        cplx b1;
        cplx b2;
        rhs(t + 0.5 * hq, m1, m2);
        rhs(t1, b1, b2);
        // RK4 on a right-hand side independent of (psi1, psi2).
        p1 += hq / 6.0 * (a1 + 4.0 * m1 + b1);
        p2 += hq / 6.0 * (a2 + 4.0 * m2 + b2);
        t = t1;
        a1 = b1;
        a2 = b2;
      }
    }
    const FieldPair f = soliton_fields(sol, zeta, target);
    out[s] = {p1, p2, soliton_psi3(sol, f)};
  }
  return out;
}

inline AtomState atomic_state(const SolitonSolution& sol, double zeta, double tau) {
  const double t[1] = {tau};
  return atomic_column(sol, zeta, t).front();
}

struct GroupVelocity {
  double characteristic;  // d zeta / d tau
  double lab_fraction_of_c;  // dz/dt in units of c: v / (1 + v)
};

inline GroupVelocity group_velocity(const SolitonSolution& sol, double tau) {
  const ModulationValue mv = m_eval(sol.profile(), tau);
  const double v = inv_one_plus_sq(mv.m) / (4.0 * sol.params().k());
  return {v, v / (1.0 + v)};
}

/// Linear-theory slow-light speed omega0^2 / (2 nu0), in units of c.
inline double eit_velocity(double omega0, double nu0) {
  require(std::isfinite(nu0) && nu0 > 0.0, ErrorCode::kInvalidParameter, "nu0 must be positive");
  return omega0 * omega0 / (2.0 * nu0);
}

/// Distance travelled after tau = 0: (1/4k) int_0^inf dtau / (m^2 + 1).
inline double stopping_distance(const ModulationProfile& profile, double k) {
  require(std::isfinite(k) && k > 0.0, ErrorCode::kInvalidParameter, "k must be positive");
  const auto& law = profile.law();
  if (const auto* e = std::get_if<ExponentialLaw>(&law)) return std::log(2.0) / (8.0 * e->alpha * k);
  if (const auto* c = std::get_if<ConstantLaw>(&law)) {
    std::ostringstream msg;
    msg << "constant modulation never stops the soliton; integrand stays at " << inv_one_plus_sq(c->m0);
    fail(ErrorCode::kNoStop, msg.str());
  }
  require_in_domain(profile, 0.0);
  const Interval d = profile.domain();
  const auto integrand = [&](double t) { return inv_one_plus_sq(m_eval(profile, t).m); };
  double sum = 0.0;
  double a = 0.0;
  double width = 1.0;
  const double limit = std::min(d.hi, 1e6);
  while (a < limit) {
    const double b = std::min(limit, a + width);
    sum += integrate(integrand, a, b, 1e-12);
    a = b;
    if (integrand(a) < 1e-14) return sum / (4.0 * k);
    width = std::min(width * 2.0, 64.0);
  }
  std::ostringstream msg;
  msg << "integrand still " << integrand(a) << " at tau = " << a << "; tail estimate >= "
      << integrand(a) / (4.0 * k) << " per unit tau";
  fail(ErrorCode::kNoStop, msg.str());
}

}  // namespace slowlight
