#include <cfloat>
#include <cmath>
#include <cstring>
#include <vector>

#include "slowlight/solver.hpp"
#include "support.hpp"

using namespace slowlight;
using Catch::Approx;

namespace {

const PhysicalParams kDefault;

bool bitwise_equal(const Field2D<cplx>& a, const Field2D<cplx>& b) {
  return a.size() == b.size() && std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(cplx)) == 0;
}

bool bitwise_equal(const SolutionGrids& a, const SolutionGrids& b) {
  return bitwise_equal(a.omega_a, b.omega_a) && bitwise_equal(a.omega_b, b.omega_b) &&
         bitwise_equal(a.psi1, b.psi1) && bitwise_equal(a.psi2, b.psi2) && bitwise_equal(a.psi3, b.psi3);
}

// Soliton of constant background m0 = -1 inside tau in [-14, 6].
SolitonSolution background_soliton() { return {kDefault, ModulationProfile::constant(-1.0)}; }

}  // namespace

TEST_CASE("dark state is stationary when Omega_a vanishes") {
  std::vector<FieldPair> f(200);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = {cplx(0.0, 0.0), cplx(std::sin(0.1 * i) * 3.0, 0.2)};
  const auto atoms = advance_atoms(f, AtomState::dark(), kDefault, 0.01);
  for (const AtomState& a : atoms) CHECK(a == AtomState::dark());
}

TEST_CASE("atom steps conserve the norm at gamma = 0") {
  // Peak |Omega| = 4 gives the default step 0.02 / 4.
  const double h = default_steps(3.0, 4.0, 1.0).h_tau;
  std::vector<FieldPair> f(800);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double t = h * static_cast<double>(i);
    f[i] = {cplx(4.0 / std::cosh(3.0 * (t - 2.0)), 0.3 * std::sin(t)), cplx(1.5 * std::cos(2.0 * t), 0.0)};
  }
  const auto atoms = advance_atoms(f, AtomState::dark(), kDefault, h);
  for (std::size_t i = 1; i < atoms.size(); ++i) CHECK(std::abs(atoms[i].norm2() - atoms[i - 1].norm2()) <= 1e-12);
}

TEST_CASE("constant Omega_a drives a Rabi oscillation") {
  const double om = 2.0;
  const double h = 0.005;
  const std::size_t n = static_cast<std::size_t>(std::round(2.0 * M_PI / om / h)) + 1;
  std::vector<FieldPair> f(n, FieldPair{cplx(om, 0.0), cplx(0.0, 0.0)});
  const double h_exact = 2.0 * M_PI / om / static_cast<double>(n - 1);
  const auto atoms = advance_atoms(f, AtomState::dark(), kDefault, h_exact);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = h_exact * static_cast<double>(i);
    worst = std::max({worst, std::abs(atoms[i].psi1 - cplx(std::cos(om * t / 2), 0.0)),
                      std::abs(atoms[i].psi3 - cplx(0.0, std::sin(om * t / 2)))});
    CHECK(atoms[i].psi2 == cplx(0.0, 0.0));
  }
  CHECK(worst <= 1e-10);
  const std::size_t half = (n - 1) / 2;  // Omega tau = pi
  CHECK(std::abs(atoms[half].psi3) == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("relaxation drains the excited state") {
  const PhysicalParams relaxing = kDefault.with_gamma(0.4);
  std::vector<FieldPair> f(2001, FieldPair{cplx(0.0, 0.0), cplx(0.0, 0.0)});
  const auto atoms = advance_atoms(f, AtomState{cplx(0.0), cplx(0.0), cplx(1.0)}, relaxing, 0.005);
  // d psi3 = -(gamma/2) psi3, so |psi3|^2 = exp(-gamma tau).
  CHECK(std::norm(atoms.back().psi3) == Approx(std::exp(-0.4 * 10.0)).epsilon(1e-10));
}

TEST_CASE("non-finite fields are reported with their tau index") {
  std::vector<FieldPair> f(10, FieldPair{cplx(1.0, 0.0), cplx(0.0, 0.0)});
  f[6].omega_a = cplx(NAN, 0.0);
  try {
    (void)advance_atoms(f, AtomState::dark(), kDefault, 0.1);
    FAIL("expected an instability error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInstability);
    CHECK(std::string(e.what()).find("tau index") != std::string::npos);
  }
}

TEST_CASE("fields stay unchanged over dark atoms or zero coupling") {
  std::vector<FieldPair> f(50);
  std::vector<AtomState> bright(50);
  for (std::size_t i = 0; i < 50; ++i) {
    f[i] = {cplx(0.1 * i, 0.0), cplx(-0.05 * i, 0.01)};
    bright[i] = {cplx(0.6, 0.0), cplx(0.0, 0.64), cplx(0.0, 0.48)};
  }
  const std::vector<AtomState> dark(50, AtomState::dark());
  CHECK(advance_fields(f, dark, {}, kDefault, 0.1) == f);
  CHECK(advance_fields(f, dark, dark, kDefault, 0.1) == f);
  CHECK(advance_fields(f, bright, bright, 0.0, 0.1) == f);
  CHECK(advance_fields(f, bright, {}, 0.0, 0.1) == f);
  REQUIRE_ERROR_CODE(advance_fields(f, bright, {}, -1.0, 0.1), ErrorCode::kInvalidParameter);
  REQUIRE_ERROR_CODE(advance_fields(f, std::vector<AtomState>(3), {}, kDefault, 0.1), ErrorCode::kInvalidParameter);
}

TEST_CASE("one field step follows the analytic zeta derivative") {
  const SolitonSolution sol = background_soliton();
  std::vector<double> taus;
  for (double t = -14.0; t <= 1.0 + 1e-9; t += 0.01) taus.push_back(t);
  const double zeta = 0.5;
  double prev_slope = 0.0;
  double prev_incr = 0.0;
  for (double h : {0.04, 0.02, 0.01}) {
    const auto a0 = atomic_column(sol, zeta, taus, -14.0);
    const auto a1 = atomic_column(sol, zeta + h, taus, -14.0);
    std::vector<FieldPair> f(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) f[i] = soliton_fields(sol, zeta, taus[i]);
    const auto next = advance_fields(f, a0, a1, kDefault, h);
    double err_slope = 0.0;
    double err_incr = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
      const double d = 1e-5;
      const double dz = (soliton_fields(sol, zeta + d, taus[i]).omega_a.real() -
                         soliton_fields(sol, zeta - d, taus[i]).omega_a.real()) / (2 * d);
      const cplx incr = next[i].omega_a - f[i].omega_a;
      err_slope = std::max(err_slope, std::abs(incr - dz * h));
      err_incr = std::max(err_incr, std::abs(next[i].omega_a - soliton_fields(sol, zeta + h, taus[i]).omega_a));
    }
    if (prev_slope > 0.0) {
      CHECK(prev_slope / err_slope == Approx(4.0).epsilon(0.1));  // O(h^2) against the tangent
      CHECK(prev_incr / err_incr == Approx(8.0).epsilon(0.15));   // O(h^3) local error
    }
    prev_slope = err_slope;
    prev_incr = err_incr;
  }
}

TEST_CASE("default steps resolve the soliton width") {
  const DefaultSteps s = default_steps(3.0, 3.0, 2.0);
  CHECK(s.h_tau == Approx(0.02 / 3.0));
  CHECK(s.h_zeta == Approx(0.02 / 3.0 / 8.0));
  CHECK(default_steps(0.5, 0.2, 1.0).h_tau == 0.02);
  const SimulationGrid g = grid_for_steps(-14.0, 6.0, 4.0, s);
  CHECK(g.h_tau() <= s.h_tau * (1 + 1e-12));
  CHECK(g.h_zeta() <= s.h_zeta * (1 + 1e-12));
  CHECK(g.n_tau() == 3001);
  CHECK(g.n_zeta() == 4801);
}

TEST_CASE("scenario invariants") {
  const SolitonSolution sol = background_soliton();
  REQUIRE_ERROR_CODE(soliton_scenario(sol, SimulationGrid(-3.0, 3.0, 101, 1.0, 11)), ErrorCode::kInsufficientAsymptote);
  Scenario sc = soliton_scenario(sol, SimulationGrid(-14.0, 6.0, 101, 1.0, 11));
  sc.zeta_stride = 3;
  REQUIRE_ERROR_CODE(simulate(sc), ErrorCode::kInvalidParameter);
  sc.zeta_stride = 1;
  sc.boundary.pop_back();
  REQUIRE_ERROR_CODE(simulate(sc), ErrorCode::kInvalidParameter);
}

TEST_CASE("simulated soliton matches the analytic fields on a 1000x1000 lattice") {
  const SolitonSolution sol = background_soliton();
  const SimulationGrid g(-14.0, 6.0, 1000, 4.0, 1000);
  const SolutionGrids num = simulate(soliton_scenario(sol, g));
  const SolutionGrids ref = analytic_grids(sol, g);
  CHECK(relative_field_error(num, ref) <= 1e-3);
  CHECK(num.max_norm_deviation() <= 1e-9);
  double peak = 0.0;
  for (const auto& d : num.diagnostics) peak = std::max(peak, d.field_peak);
  CHECK(num.max_field_imag() <= 1e-10 * peak);
  CHECK(num.zeta_slices_done == 1000);
}

TEST_CASE("control-only boundary leaves the medium transparent") {
  const SimulationGrid g(-4.0, 4.0, 401, 2.0, 201);
  const Scenario sc = control_scenario(kDefault, g, [](double t) { return 3.0 / std::cosh(t); });
  const SolutionGrids r = simulate(sc);
  for (std::size_t iz = 0; iz < g.n_zeta(); ++iz) {
    for (std::size_t it = 0; it < g.n_tau(); ++it) {
      CHECK(r.omega_a(iz, it) == r.omega_a(0, it));
      CHECK(r.omega_b(iz, it) == r.omega_b(0, it));
      CHECK(r.atoms(iz, it) == AtomState::dark());
    }
  }
}

TEST_CASE("simulation is bitwise deterministic across runs and thread counts") {
  const SolitonSolution sol = background_soliton();
  Scenario sc = soliton_scenario(sol, SimulationGrid(-14.0, 6.0, 801, 2.0, 201));
  const SolutionGrids a = simulate(sc);
  const SolutionGrids b = simulate(sc);
  sc.threads = 4;
  const SolutionGrids c = simulate(sc);
  sc.threads = 3;
  const SolutionGrids d = simulate(sc);
  CHECK(bitwise_equal(a, b));
  CHECK(bitwise_equal(a, c));
  CHECK(bitwise_equal(a, d));
}

TEST_CASE("output strides store a subsample of the full march") {
  const SolitonSolution sol = background_soliton();
  Scenario sc = soliton_scenario(sol, SimulationGrid(-14.0, 6.0, 401, 1.0, 101));
  const SolutionGrids full = simulate(sc);
  sc.zeta_stride = 5;
  sc.tau_stride = 4;
  const SolutionGrids thin = simulate(sc);
  REQUIRE(thin.grid.n_zeta() == 21);
  REQUIRE(thin.grid.n_tau() == 101);
  for (std::size_t iz = 0; iz < 21; ++iz) {
    for (std::size_t it = 0; it < 101; ++it) {
      CHECK(thin.omega_a(iz, it) == full.omega_a(5 * iz, 4 * it));
      CHECK(thin.psi2(iz, it) == full.psi2(5 * iz, 4 * it));
    }
  }
  CHECK(thin.diagnostics.size() == 101);
}

TEST_CASE("norm is conserved at gamma = 0 and non-increasing at gamma = 0.1") {
  const SimulationGrid g(-14.0, 6.0, 1001, 2.0, 401);
  const SolutionGrids conserve = simulate(soliton_scenario(background_soliton(), g));
  CHECK(conserve.max_norm_deviation() <= 1e-9);

  const SolitonSolution relaxing(kDefault.with_gamma(0.1), ModulationProfile::constant(-1.0));
  const SolutionGrids r = simulate(soliton_scenario(relaxing, g));
  // Non-increasing up to the rounding of a unit-norm sum (a few ulp of 1).
  CHECK(r.max_norm_increase() <= 4 * DBL_EPSILON);
  for (std::size_t iz = 0; iz < g.n_zeta(); iz += 50) {
    CHECK(r.atoms(iz, g.n_tau() - 1).norm2() < r.atoms(iz, 0).norm2());
  }
}

TEST_CASE("runaway boundary data raises an instability error with the partial result") {
  const SimulationGrid g(0.0, 1.0, 11, 1.0, 11);
  std::vector<FieldPair> b(11, FieldPair{cplx(1e300, 0.0), cplx(0.0, 0.0)});
  b[0] = {};
  const Scenario sc{kDefault, g, b};
  try {
    (void)simulate(sc);
    FAIL("expected an instability error");
  } catch (const InstabilityError& e) {
    CHECK(e.code() == ErrorCode::kInstability);
    REQUIRE(e.partial() != nullptr);
    CHECK(e.partial()->zeta_slices_done == 0);
    CHECK(e.last_stable_zeta() == 0.0);
  }
}
