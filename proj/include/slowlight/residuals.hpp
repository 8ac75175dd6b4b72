#pragma once

// Finite-difference residuals of the reduced equations, the Maxwell and
// Schrodinger equations, and the central condition. Derivatives are centred
// second order; the mixed derivative uses the four-point cross.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "slowlight/error.hpp"
#include "slowlight/lattice.hpp"
#include "slowlight/params.hpp"
#include "slowlight/solver.hpp"

namespace slowlight {

enum class EquationId {
  kLiouville,
  kConstraint,
  kAuxiliary,
  kDilatonRho,
  kDilatonEta,
  kDilatonConstraint,
  kIntensityLaw,
  kPhaseLaw,
  kCentralRatio,
  kCentralAmplitude,
  kMaxwell,
  kSchrodinger,
};

inline const char* equation_name(EquationId id) {
  switch (id) {
    case EquationId::kLiouville: return "liouville";
    case EquationId::kConstraint: return "constraint";
    case EquationId::kAuxiliary: return "auxiliary";
    case EquationId::kDilatonRho: return "dilaton-rho";
    case EquationId::kDilatonEta: return "dilaton-eta";
    case EquationId::kDilatonConstraint: return "dilaton-constraint";
    case EquationId::kIntensityLaw: return "intensity-law";
    case EquationId::kPhaseLaw: return "phase-law";
    case EquationId::kCentralRatio: return "central-ratio";
    case EquationId::kCentralAmplitude: return "central-amplitude";
    case EquationId::kMaxwell: return "maxwell";
    case EquationId::kSchrodinger: return "schrodinger";
  }
  return "unknown";
}

struct ResidualEntry {
  EquationId id{};
  double max_abs = 0.0;
  double l2 = 0.0;  // root mean square over the evaluated points
  double h_zeta = 0.0;
  double h_tau = 0.0;
  std::size_t samples = 0;
};

struct ResidualReport {
  std::string convention;
  std::vector<ResidualEntry> entries;

  const ResidualEntry& get(EquationId id) const {
    for (const auto& e : entries) {
      if (e.id == id) return e;
    }
    fail(ErrorCode::kInvalidParameter, std::string("report has no entry for ") + equation_name(id));
  }
  void append(const std::vector<ResidualEntry>& more) { entries.insert(entries.end(), more.begin(), more.end()); }
};

/// Real samples on a uniform (zeta, tau) lattice.
struct ScalarGrid {
  Field2D<double> values;
  double h_zeta = 0.0;
  double h_tau = 0.0;
};

namespace detail {

inline void require_interior(std::size_t nz, std::size_t nt) {
  if (nz < 3 || nt < 3) {
    std::ostringstream msg;
    msg << "residuals need at least a 3x3 grid, got " << nz << "x" << nt;
    fail(ErrorCode::kGridTooSmall, msg.str());
  }
}

/// Accumulates max and RMS over interior points with a fixed visiting order.
class Accumulator {
 public:
  void add(double r) {
    const double a = std::abs(r);
    max_ = std::max(max_, a);
    sum_sq_ += a * a;
    ++count_;
  }
  ResidualEntry entry(EquationId id, double hz, double ht) const {
    return {id, max_, count_ ? std::sqrt(sum_sq_ / static_cast<double>(count_)) : 0.0, hz, ht, count_};
  }

 private:
  double max_ = 0.0;
  double sum_sq_ = 0.0;
  std::size_t count_ = 0;
};

template <class T>
T d_zeta(const Field2D<T>& f, std::size_t iz, std::size_t it, double hz) {
  return (f(iz + 1, it) - f(iz - 1, it)) / (2.0 * hz);
}
template <class T>
T d_tau(const Field2D<T>& f, std::size_t iz, std::size_t it, double ht) {
  return (f(iz, it + 1) - f(iz, it - 1)) / (2.0 * ht);
}
template <class T>
T d_zeta_tau(const Field2D<T>& f, std::size_t iz, std::size_t it, double hz, double ht) {
  return (f(iz + 1, it + 1) - f(iz + 1, it - 1) - f(iz - 1, it + 1) + f(iz - 1, it - 1)) / (4.0 * hz * ht);
}

/// Evaluates `pointwise(iz, it)` at every interior point, reducing per zeta
/// row in parallel and combining rows in order.
template <class Fn>
Field2D<double> interior_map(std::size_t nz, std::size_t nt, int threads, const Fn& pointwise) {
  Field2D<double> out(nz, nt, 0.0);
  parallel_for(nz - 2, threads, [&](std::size_t r) {
    const std::size_t iz = r + 1;
    for (std::size_t it = 1; it + 1 < nt; ++it) out(iz, it) = pointwise(iz, it);
  });
  return out;
}

inline ResidualEntry summarize(const Field2D<double>& r, EquationId id, double hz, double ht) {
  Accumulator acc;
  for (std::size_t iz = 1; iz + 1 < r.n_zeta(); ++iz) {
    for (std::size_t it = 1; it + 1 < r.n_tau(); ++it) acc.add(r(iz, it));
  }
  return acc.entry(id, hz, ht);
}

}  // namespace detail

/// Pointwise d_zeta_tau rho + k exp(-2 rho) on interior points (zero on the border).
inline Field2D<double> liouville_residual_field(const ScalarGrid& rho, double k, int threads = 1) {
  const auto& r = rho.values;
  detail::require_interior(r.n_zeta(), r.n_tau());
  return detail::interior_map(r.n_zeta(), r.n_tau(), threads, [&](std::size_t iz, std::size_t it) {
    return detail::d_zeta_tau(r, iz, it, rho.h_zeta, rho.h_tau) + k * std::exp(-2.0 * r(iz, it));
  });
}

inline ResidualEntry residual_liouville(const ScalarGrid& rho, double k, int threads = 1) {
  return detail::summarize(liouville_residual_field(rho, k, threads), EquationId::kLiouville, rho.h_zeta, rho.h_tau);
}

/// Pointwise (4k(d_tau + gamma) + d_zeta) exp(-2 rho) + d_zeta eta^2.
inline Field2D<double> auxiliary_residual_field(const ScalarGrid& rho, const ScalarGrid& eta, double k, double gamma,
                                                int threads = 1) {
  const auto& r = rho.values;
  detail::require_interior(r.n_zeta(), r.n_tau());
  Field2D<double> u(r.n_zeta(), r.n_tau());
  Field2D<double> e2(r.n_zeta(), r.n_tau());
  for (std::size_t i = 0; i < u.size(); ++i) {
    u.data()[i] = std::exp(-2.0 * r.data()[i]);
    e2.data()[i] = eta.values.data()[i] * eta.values.data()[i];
  }
  const double hz = rho.h_zeta;
  const double ht = rho.h_tau;
  return detail::interior_map(r.n_zeta(), r.n_tau(), threads, [&](std::size_t iz, std::size_t it) {
    return 4.0 * k * (detail::d_tau(u, iz, it, ht) + gamma * u(iz, it)) + detail::d_zeta(u, iz, it, hz) +
           detail::d_zeta(e2, iz, it, hz);
  });
}

/// Constraint, auxiliary and the three dilatonic relations with source
/// A(tau) = d_tau m sampled on the tau lattice.
inline std::vector<ResidualEntry> residual_constraints(const ScalarGrid& rho, const ScalarGrid& eta,
                                                       std::span<const double> source, double k, double gamma,
                                                       int threads = 1) {
  const auto& r = rho.values;
  const auto& e = eta.values;
  detail::require_interior(r.n_zeta(), r.n_tau());
  require(e.n_zeta() == r.n_zeta() && e.n_tau() == r.n_tau() && source.size() == r.n_tau(),
          ErrorCode::kInvalidParameter, "rho, eta and source shapes differ");
  const double hz = rho.h_zeta;
  const double ht = rho.h_tau;
  const auto constraint = detail::interior_map(r.n_zeta(), r.n_tau(), threads, [&](std::size_t iz, std::size_t it) {
    return detail::d_zeta_tau(e, iz, it, hz, ht) + detail::d_tau(r, iz, it, ht) * detail::d_zeta(e, iz, it, hz) -
           k * std::exp(-2.0 * r(iz, it)) * e(iz, it);
  });
  // V(eta) = 4k (A - eta): d_zeta_tau rho - (dV/deta / 4) e^{-2 rho} = d_zeta_tau rho + k e^{-2 rho}.
  const auto dil_rho = liouville_residual_field(rho, k, threads);
  const auto dil_eta = detail::interior_map(r.n_zeta(), r.n_tau(), threads, [&](std::size_t iz, std::size_t it) {
    const double v = 4.0 * k * (source[it] - e(iz, it));
    return detail::d_zeta_tau(e, iz, it, hz, ht) + 0.5 * v * std::exp(-2.0 * r(iz, it));
  });
  const auto dil_c = detail::interior_map(r.n_zeta(), r.n_tau(), threads, [&](std::size_t iz, std::size_t it) {
    return detail::d_zeta_tau(e, iz, it, hz, ht) +
           2.0 * detail::d_tau(r, iz, it, ht) * detail::d_zeta(e, iz, it, hz) -
           2.0 * k * source[it] * std::exp(-2.0 * r(iz, it));
  });
  const auto aux = auxiliary_residual_field(rho, eta, k, gamma, threads);
  return {detail::summarize(constraint, EquationId::kConstraint, hz, ht),
          detail::summarize(aux, EquationId::kAuxiliary, hz, ht),
          detail::summarize(dil_rho, EquationId::kDilatonRho, hz, ht),
          detail::summarize(dil_eta, EquationId::kDilatonEta, hz, ht),
          detail::summarize(dil_c, EquationId::kDilatonConstraint, hz, ht)};
}

/// Maxwell, Schrodinger (with relaxation -gamma/2 on psi3), intensity law and
/// phase law on field + atom data. Maxwell/Schrodinger entries take the max
/// over components. The phase law is evaluated where |psi3| exceeds 1e-6 of
/// its peak; it measures the phase drift left over by the real-field
/// convention.
inline std::vector<ResidualEntry> residual_mb(const SolutionGrids& g, const PhysicalParams& params,
                                              int threads = 1) {
  const std::size_t nz = g.grid.n_zeta();
  const std::size_t nt = g.grid.n_tau();
  detail::require_interior(nz, nt);
  const double hz = g.grid.h_zeta();
  const double ht = g.grid.h_tau();
  const double nu0 = params.nu0();
  const double gamma = params.gamma();
  const cplx i_nu(0.0, nu0);
  const cplx ih(0.0, 0.5);

  const auto maxwell = detail::interior_map(nz, nt, threads, [&](std::size_t iz, std::size_t it) {
    const cplx ra = detail::d_zeta(g.omega_a, iz, it, hz) - i_nu * g.psi3(iz, it) * std::conj(g.psi1(iz, it));
    const cplx rb = detail::d_zeta(g.omega_b, iz, it, hz) - i_nu * g.psi3(iz, it) * std::conj(g.psi2(iz, it));
    return std::max(std::abs(ra), std::abs(rb));
  });
  const auto schrod = detail::interior_map(nz, nt, threads, [&](std::size_t iz, std::size_t it) {
    const cplx oa = g.omega_a(iz, it);
    const cplx ob = g.omega_b(iz, it);
    const cplx p1 = g.psi1(iz, it);
    const cplx p2 = g.psi2(iz, it);
    const cplx p3 = g.psi3(iz, it);
    const cplx r1 = detail::d_tau(g.psi1, iz, it, ht) - ih * std::conj(oa) * p3;
    const cplx r2 = detail::d_tau(g.psi2, iz, it, ht) - ih * std::conj(ob) * p3;
    const cplx r3 = detail::d_tau(g.psi3, iz, it, ht) - (-0.5 * gamma * p3 + ih * (oa * p1 + ob * p2));
    return std::max({std::abs(r1), std::abs(r2), std::abs(r3)});
  });

  Field2D<double> p3sq(nz, nt);
  Field2D<double> intensity(nz, nt);
  double p3_peak = 0.0;
  for (std::size_t iz = 0; iz < nz; ++iz) {
    for (std::size_t it = 0; it < nt; ++it) {
      p3sq(iz, it) = std::norm(g.psi3(iz, it));
      intensity(iz, it) = std::norm(g.omega_a(iz, it)) + std::norm(g.omega_b(iz, it));
      p3_peak = std::max(p3_peak, std::abs(g.psi3(iz, it)));
    }
  }
  const auto law = detail::interior_map(nz, nt, threads, [&](std::size_t iz, std::size_t it) {
    return detail::d_tau(p3sq, iz, it, ht) + gamma * p3sq(iz, it) +
           detail::d_zeta(intensity, iz, it, hz) / (2.0 * nu0);
  });

  detail::Accumulator phase;
  const double mask = 1e-6 * p3_peak;
  for (std::size_t iz = 1; iz + 1 < nz; ++iz) {
    for (std::size_t it = 1; it + 1 < nt; ++it) {
      const cplx p3 = g.psi3(iz, it);
      if (!(std::abs(p3) > mask)) continue;
      // |z|^2 d(arg z) = Im(conj(z) dz)
      const double dphi3 = std::imag(std::conj(p3) * detail::d_tau(g.psi3, iz, it, ht));
      const double flux = std::imag(std::conj(g.omega_a(iz, it)) * detail::d_zeta(g.omega_a, iz, it, hz) +
                                    std::conj(g.omega_b(iz, it)) * detail::d_zeta(g.omega_b, iz, it, hz));
      phase.add((dphi3 + flux / (2.0 * nu0)) / std::norm(p3));
    }
  }
  return {detail::summarize(maxwell, EquationId::kMaxwell, hz, ht),
          detail::summarize(schrod, EquationId::kSchrodinger, hz, ht),
          detail::summarize(law, EquationId::kIntensityLaw, hz, ht), phase.entry(EquationId::kPhaseLaw, hz, ht)};
}

/// Central condition on co-located samples where |Omega_a| > 1e-6 of its
/// peak. Ratio entry: max |2k|Omega_a|^2 / (nu0 |psi3|^2) - 1|, linear in k.
/// Amplitude entry: max |i psi3 + Omega_a/(2|eps0|)| over the peak of
/// |Omega_a|/(2|eps0|); the factor i maps the dark-state gauge onto the gauge
/// in which psi3 is real.
inline std::vector<ResidualEntry> check_central(std::span<const FieldPair> fields, std::span<const AtomState> atoms,
                                                const PhysicalParams& params) {
  require(fields.size() == atoms.size(), ErrorCode::kInvalidParameter, "field and atom samples differ in count");
  double peak = 0.0;
  for (const auto& f : fields) peak = std::max(peak, std::abs(f.omega_a));
  const double scale = 2.0 * std::abs(params.eps0());
  detail::Accumulator ratio;
  detail::Accumulator amplitude;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const double a = std::abs(fields[i].omega_a);
    if (!(a > 1e-6 * peak)) continue;
    const double p3sq = std::norm(atoms[i].psi3);
    ratio.add(2.0 * params.k() * a * a / (params.nu0() * p3sq) - 1.0);
    amplitude.add(std::abs(kRealPsi3Gauge * atoms[i].psi3 + fields[i].omega_a / scale) / (peak / scale));
  }
  if (ratio.entry(EquationId::kCentralRatio, 0, 0).samples == 0) {
    fail(ErrorCode::kEmptyMask, "no sample has |Omega_a| above 1e-6 of the peak");
  }
  return {ratio.entry(EquationId::kCentralRatio, 0.0, 0.0), amplitude.entry(EquationId::kCentralAmplitude, 0.0, 0.0)};
}

inline std::vector<ResidualEntry> check_central(const SolutionGrids& g, const PhysicalParams& params) {
  std::vector<FieldPair> f;
  std::vector<AtomState> a;
  f.reserve(g.omega_a.size());
  a.reserve(g.omega_a.size());
  for (std::size_t iz = 0; iz < g.grid.n_zeta(); ++iz) {
    for (std::size_t it = 0; it < g.grid.n_tau(); ++it) {
      f.push_back(g.fields(iz, it));
      a.push_back(g.atoms(iz, it));
    }
  }
  auto out = check_central(f, a, params);
  for (auto& e : out) {
    e.h_zeta = g.grid.h_zeta();
    e.h_tau = g.grid.h_tau();
  }
  return out;
}

/// rho and eta of the analytic solution on a lattice.
inline std::pair<ScalarGrid, ScalarGrid> liouville_grids(const SolitonSolution& sol, const SimulationGrid& grid,
                                                         int threads = 1) {
  ScalarGrid rho{Field2D<double>(grid.n_zeta(), grid.n_tau()), grid.h_zeta(), grid.h_tau()};
  ScalarGrid eta{Field2D<double>(grid.n_zeta(), grid.n_tau()), grid.h_zeta(), grid.h_tau()};
  parallel_for(grid.n_zeta(), threads, [&](std::size_t iz) {
    for (std::size_t it = 0; it < grid.n_tau(); ++it) {
      const LiouvilleFields l = rho_liouville(sol, grid.zeta(iz), grid.tau(it));
      rho.values(iz, it) = l.rho;
      eta.values(iz, it) = l.eta;
    }
  });
  return {std::move(rho), std::move(eta)};
}

/// d_tau m on the tau lattice (the dilatonic source).
inline std::vector<double> source_samples(const ModulationProfile& profile, const SimulationGrid& grid) {
  std::vector<double> s(grid.n_tau());
  for (std::size_t it = 0; it < grid.n_tau(); ++it) s[it] = m_eval(profile, grid.tau(it)).dm;
  return s;
}

/// Every residual of the analytic solution on one lattice.
inline ResidualReport analytic_residuals(const SolitonSolution& sol, const SimulationGrid& grid, int threads = 1) {
  ResidualReport rep;
  rep.convention = sol.convention().label();
  const auto [rho, eta] = liouville_grids(sol, grid, threads);
  rep.entries.push_back(residual_liouville(rho, sol.params().k(), threads));
  rep.append(residual_constraints(rho, eta, source_samples(sol.profile(), grid), sol.params().k(),
                                  sol.params().gamma(), threads));
  const SolutionGrids g = analytic_grids(sol, grid, threads);
  rep.append(residual_mb(g, sol.params(), threads));
  rep.append(check_central(g, sol.params()));
  return rep;
}

}  // namespace slowlight
