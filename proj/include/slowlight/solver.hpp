#pragma once

// Direct integration of the coupled Maxwell-Schrodinger system on the
// characteristic lattice. Each zeta slice: atoms by RK4 along tau from the
// dark state at tau_min, then fields by a Heun predictor-corrector in zeta.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "slowlight/error.hpp"
#include "slowlight/lattice.hpp"
#include "slowlight/modulation.hpp"
#include "slowlight/numerics.hpp"
#include "slowlight/params.hpp"
#include "slowlight/soliton.hpp"

namespace slowlight {

inline constexpr const char* kSchemeVersion = "march-2 rk4-tau heun-zeta cubic-midpoint";

enum class FieldScheme {
  kHeun,
  /// First-order explicit Euler in zeta. Exists to validate the order
  /// measurement in convergence studies.
  kEuler,
};

struct Scenario {
  PhysicalParams params;
  SimulationGrid grid;
  /// Fields at zeta = 0 sampled on the tau lattice.
  std::vector<FieldPair> boundary;
  AtomState atom_initial = AtomState::dark();
  FieldScheme scheme = FieldScheme::kHeun;
  /// Keep every stride-th zeta / tau sample in the output. Both must divide n-1.
  std::size_t zeta_stride = 1;
  std::size_t tau_stride = 1;
  int threads = 1;
};

/// Per computed zeta slice.
struct SliceDiagnostics {
  double zeta = 0.0;
  double norm_deviation = 0.0;   // max_tau ||psi|^2 - 1|
  double norm_increase = 0.0;    // max_tau (|psi|^2(tau+h) - |psi|^2(tau)), <= 0 when monotone
  double field_imag = 0.0;       // max_tau max(|Im Omega_a|, |Im Omega_b|)
  double field_peak = 0.0;       // max_tau max(|Omega_a|, |Omega_b|)
};

struct SolutionGrids {
  SimulationGrid grid;  // stored lattice (after strides)
  Field2D<cplx> omega_a;
  Field2D<cplx> omega_b;
  Field2D<cplx> psi1;
  Field2D<cplx> psi2;
  Field2D<cplx> psi3;
  std::vector<SliceDiagnostics> diagnostics;  // every computed slice
  std::size_t zeta_slices_done = 0;           // stored rows filled

  explicit SolutionGrids(const SimulationGrid& g)
      : grid(g),
        omega_a(g.n_zeta(), g.n_tau()),
        omega_b(g.n_zeta(), g.n_tau()),
        psi1(g.n_zeta(), g.n_tau()),
        psi2(g.n_zeta(), g.n_tau()),
        psi3(g.n_zeta(), g.n_tau()) {}

  FieldPair fields(std::size_t iz, std::size_t it) const { return {omega_a(iz, it), omega_b(iz, it)}; }
  AtomState atoms(std::size_t iz, std::size_t it) const { return {psi1(iz, it), psi2(iz, it), psi3(iz, it)}; }

  double max_norm_deviation() const {
    double m = 0.0;
    for (const auto& d : diagnostics) m = std::max(m, d.norm_deviation);
    return m;
  }
  double max_norm_increase() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& d : diagnostics) m = std::max(m, d.norm_increase);
    return m;
  }
  double max_field_imag() const {
    double m = 0.0;
    for (const auto& d : diagnostics) m = std::max(m, d.field_imag);
    return m;
  }
};

/// Numerical instability; carries the slices completed before the failure.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& msg, std::shared_ptr<const SolutionGrids> partial, double last_stable_zeta)
      : Error(ErrorCode::kInstability, msg), partial_(std::move(partial)), last_stable_zeta_(last_stable_zeta) {}
  const SolutionGrids* partial() const { return partial_.get(); }
  double last_stable_zeta() const { return last_stable_zeta_; }

 private:
  std::shared_ptr<const SolutionGrids> partial_;
  double last_stable_zeta_;
};

namespace detail {

inline bool finite(const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

struct AtomDerivative {
  cplx d1, d2, d3;
};

inline AtomDerivative atom_rhs(const cplx& oa, const cplx& ob, double gamma, const cplx& p1, const cplx& p2,
                               const cplx& p3) {
  const cplx ih(0.0, 0.5);
  return {ih * std::conj(oa) * p3, ih * std::conj(ob) * p3, -0.5 * gamma * p3 + ih * (oa * p1 + ob * p2)};
}

}  // namespace detail

/// Integrates the atoms along one zeta slice from `initial` at the first
/// sample. Midpoint fields come from cubic interpolation of the slice.
inline std::vector<AtomState> advance_atoms(std::span<const FieldPair> fields, const AtomState& initial,
                                            const PhysicalParams& params, double h_tau) {
  const std::size_t n = fields.size();
  std::vector<AtomState> out(n);
  if (n == 0) return out;
  std::vector<cplx> a(n);
  std::vector<cplx> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = fields[i].omega_a;
    b[i] = fields[i].omega_b;
  }
  const std::span<const cplx> sa(a);
  const std::span<const cplx> sb(b);
  const double g = params.gamma();
  out[0] = initial;
  cplx p1 = initial.psi1;
  cplx p2 = initial.psi2;
  cplx p3 = initial.psi3;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const cplx am = cubic_midpoint(sa, i);
    const cplx bm = cubic_midpoint(sb, i);
    const auto k1 = detail::atom_rhs(a[i], b[i], g, p1, p2, p3);
    const double hh = 0.5 * h_tau;
    const auto k2 = detail::atom_rhs(am, bm, g, p1 + hh * k1.d1, p2 + hh * k1.d2, p3 + hh * k1.d3);
    const auto k3 = detail::atom_rhs(am, bm, g, p1 + hh * k2.d1, p2 + hh * k2.d2, p3 + hh * k2.d3);
    const auto k4 = detail::atom_rhs(a[i + 1], b[i + 1], g, p1 + h_tau * k3.d1, p2 + h_tau * k3.d2,
                                     p3 + h_tau * k3.d3);
    const double w = h_tau / 6.0;
    p1 += w * (k1.d1 + 2.0 * k2.d1 + 2.0 * k3.d1 + k4.d1);
    p2 += w * (k1.d2 + 2.0 * k2.d2 + 2.0 * k3.d2 + k4.d2);
    p3 += w * (k1.d3 + 2.0 * k2.d3 + 2.0 * k3.d3 + k4.d3);
    if (!detail::finite(p1) || !detail::finite(p2) || !detail::finite(p3)) {
      std::ostringstream msg;
      msg << "atom integration produced a non-finite amplitude at tau index " << (i + 1);
      fail(ErrorCode::kInstability, msg.str());
    }
    out[i + 1] = {p1, p2, p3};
  }
  return out;
}

/// Maxwell right-hand side (i nu0 psi3 conj(psi1), i nu0 psi3 conj(psi2)).
inline FieldPair maxwell_rhs(const AtomState& s, double nu0) {
  const cplx inu(0.0, nu0);
  return {inu * s.psi3 * std::conj(s.psi1), inu * s.psi3 * std::conj(s.psi2)};
}

/// One zeta step of the fields. With `atoms_predicted` (atoms re-integrated on
/// the Euler-predicted fields) this is the Heun corrector; without, Euler.
inline std::vector<FieldPair> advance_fields(std::span<const FieldPair> fields, std::span<const AtomState> atoms,
                                             std::span<const AtomState> atoms_predicted, double nu0, double h_zeta,
                                             int threads = 1) {
  const std::size_t n = fields.size();
  require(atoms.size() == n && (atoms_predicted.empty() || atoms_predicted.size() == n), ErrorCode::kInvalidParameter,
          "advance_fields: slice sizes differ");
  require(std::isfinite(nu0) && nu0 >= 0.0, ErrorCode::kInvalidParameter, "nu0 must be >= 0");
  std::vector<FieldPair> out(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const FieldPair s0 = maxwell_rhs(atoms[i], nu0);
    if (atoms_predicted.empty()) {
      out[i] = {fields[i].omega_a + h_zeta * s0.omega_a, fields[i].omega_b + h_zeta * s0.omega_b};
    } else {
      const FieldPair s1 = maxwell_rhs(atoms_predicted[i], nu0);
      out[i] = {fields[i].omega_a + 0.5 * h_zeta * (s0.omega_a + s1.omega_a),
                fields[i].omega_b + 0.5 * h_zeta * (s0.omega_b + s1.omega_b)};
    }
    if (!detail::finite(out[i].omega_a) || !detail::finite(out[i].omega_b)) {
      std::ostringstream msg;
      msg << "field update produced a non-finite value at tau index " << i;
      fail(ErrorCode::kInstability, msg.str());
    }
  });
  return out;
}

inline std::vector<FieldPair> advance_fields(std::span<const FieldPair> fields, std::span<const AtomState> atoms,
                                             std::span<const AtomState> atoms_predicted,
                                             const PhysicalParams& params, double h_zeta, int threads = 1) {
  return advance_fields(fields, atoms, atoms_predicted, params.nu0(), h_zeta, threads);
}

/// Default lattice spacings: h_tau <= 0.02 / max(|eps0|, |Omega0|, 1),
/// h_zeta <= h_tau / (4 v_max).
struct DefaultSteps {
  double h_tau;
  double h_zeta;
};
inline DefaultSteps default_steps(double eps0, double omega_max, double v_max) {
  const double ht = 0.02 / std::max({std::abs(eps0), std::abs(omega_max), 1.0});
  return {ht, ht / (4.0 * std::max(v_max, 1e-12))};
}

/// Smallest uniform grid on the window whose spacings respect `steps`.
inline SimulationGrid grid_for_steps(double tau_min, double tau_max, double zeta_max, DefaultSteps steps) {
  const auto nt = static_cast<std::size_t>(std::ceil((tau_max - tau_min) / steps.h_tau - 1e-9)) + 1;
  const auto nz = static_cast<std::size_t>(std::ceil(zeta_max / steps.h_zeta - 1e-9)) + 1;
  return {tau_min, tau_max, std::max<std::size_t>(nt, 2), zeta_max, std::max<std::size_t>(nz, 2)};
}

namespace detail {

inline void check_scenario(const Scenario& sc) {
  const SimulationGrid& g = sc.grid;
  require(sc.boundary.size() == g.n_tau(), ErrorCode::kInvalidParameter,
          "boundary samples must match the tau lattice");
  require(sc.zeta_stride >= 1 && (g.n_zeta() - 1) % sc.zeta_stride == 0, ErrorCode::kInvalidParameter,
          "zeta stride must divide n_zeta - 1");
  require(sc.tau_stride >= 1 && (g.n_tau() - 1) % sc.tau_stride == 0, ErrorCode::kInvalidParameter,
          "tau stride must divide n_tau - 1");
  double peak = 0.0;
  for (const auto& f : sc.boundary) {
    require(finite(f.omega_a) && finite(f.omega_b), ErrorCode::kInvalidParameter, "boundary fields must be finite");
    peak = std::max(peak, std::abs(f.omega_a));
  }
  const double edge = std::abs(sc.boundary.front().omega_a);
  if (edge > 1e-8 * peak) {
    std::ostringstream msg;
    msg << "|Omega_a| = " << edge << " at tau_min exceeds 1e-8 of its peak " << peak
        << "; the dark state is not compatible with this window";
    fail(ErrorCode::kInsufficientAsymptote, msg.str());
  }
  const double n2 = sc.atom_initial.norm2();
  require(std::isfinite(n2) && n2 > 0.0, ErrorCode::kInvalidParameter, "initial atom state must be nonzero");
}

inline SliceDiagnostics diagnose(double zeta, std::span<const FieldPair> f, std::span<const AtomState> a) {
  SliceDiagnostics d;
  d.zeta = zeta;
  d.norm_increase = -std::numeric_limits<double>::infinity();
  double prev = a.empty() ? 0.0 : a[0].norm2();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double n2 = a[i].norm2();
    d.norm_deviation = std::max(d.norm_deviation, std::abs(n2 - 1.0));
    if (i > 0) d.norm_increase = std::max(d.norm_increase, n2 - prev);
    prev = n2;
    d.field_imag = std::max({d.field_imag, std::abs(f[i].omega_a.imag()), std::abs(f[i].omega_b.imag())});
    d.field_peak = std::max({d.field_peak, std::abs(f[i].omega_a), std::abs(f[i].omega_b)});
  }
  return d;
}

}  // namespace detail

inline SimulationGrid stored_grid(const Scenario& sc) {
  const SimulationGrid& g = sc.grid;
  return {g.tau_min(), g.tau_max(), (g.n_tau() - 1) / sc.tau_stride + 1, g.zeta_max(),
          (g.n_zeta() - 1) / sc.zeta_stride + 1};
}

/// Deterministic zeta march; see the header comment for the scheme.
inline SolutionGrids simulate(const Scenario& sc) {
  detail::check_scenario(sc);
  const SimulationGrid& g = sc.grid;
  const double hz = g.h_zeta();
  const double ht = g.h_tau();
  auto out = std::make_shared<SolutionGrids>(stored_grid(sc));
  out->diagnostics.reserve(g.n_zeta());

  std::vector<FieldPair> fields = sc.boundary;
  std::vector<AtomState> atoms;
  const auto store = [&](std::size_t jz) {
    if (jz % sc.zeta_stride != 0) return;
    const std::size_t r = jz / sc.zeta_stride;
    for (std::size_t it = 0, s = 0; it < g.n_tau(); it += sc.tau_stride, ++s) {
      out->omega_a(r, s) = fields[it].omega_a;
      out->omega_b(r, s) = fields[it].omega_b;
      out->psi1(r, s) = atoms[it].psi1;
      out->psi2(r, s) = atoms[it].psi2;
      out->psi3(r, s) = atoms[it].psi3;
    }
    out->zeta_slices_done = r + 1;
  };

  double last_stable = 0.0;
  try {
    for (std::size_t jz = 0; jz < g.n_zeta(); ++jz) {
      atoms = advance_atoms(fields, sc.atom_initial, sc.params, ht);
      out->diagnostics.push_back(detail::diagnose(g.zeta(jz), fields, atoms));
      store(jz);
      last_stable = g.zeta(jz);
      if (jz + 1 == g.n_zeta()) break;
      if (sc.scheme == FieldScheme::kEuler) {
        fields = advance_fields(fields, atoms, {}, sc.params, hz, sc.threads);
      } else {
        const auto predicted = advance_fields(fields, atoms, {}, sc.params, hz, sc.threads);
        const auto atoms_pred = advance_atoms(predicted, sc.atom_initial, sc.params, ht);
        fields = advance_fields(fields, atoms, atoms_pred, sc.params, hz, sc.threads);
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInstability) throw;
    std::ostringstream msg;
    msg << e.what() << " (after zeta = " << last_stable << ")";
    throw InstabilityError(msg.str(), out, last_stable);
  }
  return std::move(*out);
}

/// Boundary data from the analytic soliton at zeta = 0.
inline Scenario soliton_scenario(const SolitonSolution& sol, const SimulationGrid& grid) {
  std::vector<FieldPair> b(grid.n_tau());
  for (std::size_t i = 0; i < grid.n_tau(); ++i) b[i] = soliton_fields(sol, 0.0, grid.tau(i));
  Scenario sc{sol.params(), grid, std::move(b)};
  detail::check_scenario(sc);
  return sc;
}

/// Control only: Omega_a = 0, Omega_b = control(tau).
inline Scenario control_scenario(const PhysicalParams& params, const SimulationGrid& grid,
                                 const std::function<double(double)>& control) {
  std::vector<FieldPair> b(grid.n_tau());
  for (std::size_t i = 0; i < grid.n_tau(); ++i) b[i] = {cplx(0.0, 0.0), cplx(control(grid.tau(i)), 0.0)};
  Scenario sc{params, grid, std::move(b)};
  detail::check_scenario(sc);
  return sc;
}

/// Analytic fields and atoms on a lattice, in the same layout as simulate().
inline SolutionGrids analytic_grids(const SolitonSolution& sol, const SimulationGrid& grid, int threads = 1) {
  SolutionGrids out(grid);
  std::vector<double> taus(grid.n_tau());
  for (std::size_t i = 0; i < grid.n_tau(); ++i) taus[i] = grid.tau(i);
  // Each column starts from its own dark anchor; independent across zeta.
  parallel_for(grid.n_zeta(), threads, [&](std::size_t iz) {
    const double z = grid.zeta(iz);
    const auto col = atomic_column(sol, z, taus);
    for (std::size_t it = 0; it < grid.n_tau(); ++it) {
      const FieldPair f = soliton_fields(sol, z, taus[it]);
      out.omega_a(iz, it) = f.omega_a;
      out.omega_b(iz, it) = f.omega_b;
      out.psi1(iz, it) = col[it].psi1;
      out.psi2(iz, it) = col[it].psi2;
      out.psi3(iz, it) = col[it].psi3;
    }
  });
  for (std::size_t iz = 0; iz < grid.n_zeta(); ++iz) {
    std::vector<FieldPair> f(grid.n_tau());
    std::vector<AtomState> a(grid.n_tau());
    for (std::size_t it = 0; it < grid.n_tau(); ++it) {
      f[it] = out.fields(iz, it);
      a[it] = out.atoms(iz, it);
    }
    out.diagnostics.push_back(detail::diagnose(grid.zeta(iz), f, a));
  }
  out.zeta_slices_done = grid.n_zeta();
  return out;
}

/// max |X - Y| / max |Y| over both fields, comparing `num` with `ref` on the
/// lattice of `num` (ref may be a refinement of num by an integer factor).
inline double relative_field_error(const SolutionGrids& num, const SolutionGrids& ref) {
  const auto fz = (ref.grid.n_zeta() - 1) / (num.grid.n_zeta() - 1);
  const auto ft = (ref.grid.n_tau() - 1) / (num.grid.n_tau() - 1);
  require(fz * (num.grid.n_zeta() - 1) == ref.grid.n_zeta() - 1 && ft * (num.grid.n_tau() - 1) == ref.grid.n_tau() - 1,
          ErrorCode::kInvalidParameter, "reference lattice is not an integer refinement");
  double err = 0.0;
  double scale = 0.0;
  for (std::size_t iz = 0; iz < num.grid.n_zeta(); ++iz) {
    for (std::size_t it = 0; it < num.grid.n_tau(); ++it) {
      const FieldPair a = num.fields(iz, it);
      const FieldPair b = ref.fields(iz * fz, it * ft);
      err = std::max({err, std::abs(a.omega_a - b.omega_a), std::abs(a.omega_b - b.omega_b)});
      scale = std::max({scale, std::abs(b.omega_a), std::abs(b.omega_b)});
    }
  }
  return err / std::max(scale, 1e-300);
}

}  // namespace slowlight
