#include <cmath>
#include <vector>

#include "slowlight/adjudicate.hpp"
#include "slowlight/convergence.hpp"
#include "slowlight/residuals.hpp"
#include "slowlight/trajectory.hpp"
#include "support.hpp"

using namespace slowlight;
using Catch::Approx;

namespace {

const PhysicalParams kDefault;

// Exponential(alpha = 1) soliton on the lattice of configs/analytic.ini.
SolitonSolution exponential_soliton() { return {kDefault, ModulationProfile::exponential(1.0), 9.0}; }
SimulationGrid exponential_window(std::size_t n) { return {-2.0, 2.0, n, 18.666666666666668, n}; }

double order(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace

TEST_CASE("exponential window spans phi in [-10, 10]") {
  const SolitonSolution s = exponential_soliton();
  const SimulationGrid g = exponential_window(400);
  double lo = 1e300;
  double hi = -1e300;
  for (double z : {0.0, g.zeta_max()}) {
    for (double t : {g.tau_min(), g.tau_max()}) {
      lo = std::min(lo, s.phase(z, t));
      hi = std::max(hi, s.phase(z, t));
    }
  }
  CHECK(lo == Approx(-10.0).margin(0.05));
  CHECK(hi == Approx(10.0).margin(0.05));
}

TEST_CASE("Liouville residual converges at second order") {
  const SolitonSolution s = exponential_soliton();
  std::vector<double> r;
  for (std::size_t n : {101u, 201u, 401u}) {
    const auto [rho, eta] = liouville_grids(s, exponential_window(n));
    r.push_back(residual_liouville(rho, kDefault.k()).max_abs);
  }
  CHECK(order(r[0], r[1]) == Approx(2.0).margin(0.3));
  CHECK(order(r[1], r[2]) == Approx(2.0).margin(0.3));
}

TEST_CASE("Liouville residual of a constant rho is k exp(-2 rho)") {
  ScalarGrid rho{Field2D<double>(5, 6, 0.3), 0.1, 0.2};
  const ResidualEntry e = residual_liouville(rho, 0.0625);
  CHECK(e.max_abs == 0.0625 * std::exp(-0.6));
  CHECK(e.l2 == Approx(0.0625 * std::exp(-0.6)).epsilon(1e-15));
  CHECK(e.samples == 3 * 4);
  ScalarGrid tiny{Field2D<double>(2, 6, 0.3), 0.1, 0.2};
  REQUIRE_ERROR_CODE(residual_liouville(tiny, 0.0625), ErrorCode::kGridTooSmall);
}

TEST_CASE("Liouville residual on the 400x400 lattice is small next to the source") {
  const auto [rho, eta] = liouville_grids(exponential_soliton(), exponential_window(400), 4);
  double source = 0.0;
  for (double r : rho.values.data()) source = std::max(source, kDefault.k() * std::exp(-2.0 * r));
  CHECK(residual_liouville(rho, kDefault.k(), 4).max_abs <= 1e-3 * source);
}

TEST_CASE("constraint, auxiliary and dilaton residuals converge at second order") {
  const SolitonSolution s = exponential_soliton();
  std::vector<std::vector<ResidualEntry>> levels;
  for (std::size_t n : {101u, 201u, 401u}) {
    const SimulationGrid g = exponential_window(n);
    const auto [rho, eta] = liouville_grids(s, g);
    levels.push_back(residual_constraints(rho, eta, source_samples(s.profile(), g), kDefault.k(), 0.0));
  }
  for (std::size_t i = 0; i < levels[0].size(); ++i) {
    INFO(equation_name(levels[0][i].id));
    CHECK(order(levels[1][i].max_abs, levels[2][i].max_abs) == Approx(2.0).margin(0.3));
    CHECK(levels[2][i].max_abs < levels[1][i].max_abs * 1.2 / 3.5);
  }
}

TEST_CASE("relaxation shows up in the auxiliary residual as 4 k gamma exp(-2 rho)") {
  const SolitonSolution s = exponential_soliton();
  const double gamma = 0.1;
  double prev = 0.0;
  for (std::size_t n : {101u, 201u, 401u}) {
    const SimulationGrid g = exponential_window(n);
    const auto [rho, eta] = liouville_grids(s, g);
    const Field2D<double> r = auxiliary_residual_field(rho, eta, kDefault.k(), gamma);
    double injected_peak = 0.0;
    double mismatch = 0.0;
    for (std::size_t iz = 1; iz + 1 < n; ++iz) {
      for (std::size_t it = 1; it + 1 < n; ++it) {
        const double injected = 4.0 * kDefault.k() * gamma * std::exp(-2.0 * rho.values(iz, it));
        injected_peak = std::max(injected_peak, injected);
        mismatch = std::max(mismatch, std::abs(r(iz, it) - injected));
      }
    }
    // The mismatch is the gamma-free discretisation error, so it falls at
    // second order while the injected term stays put.
    if (prev > 0.0) CHECK(order(prev, mismatch) == Approx(2.0).margin(0.3));
    if (n == 401) CHECK(mismatch < 0.05 * injected_peak);
    prev = mismatch;
  }
}

TEST_CASE("zero eta satisfies the constraint identically") {
  const SimulationGrid g = exponential_window(60);
  const auto [rho, eta] = liouville_grids(exponential_soliton(), g);
  ScalarGrid zero{Field2D<double>(60, 60, 0.0), g.h_zeta(), g.h_tau()};
  const auto entries = residual_constraints(rho, zero, std::vector<double>(60, 0.0), kDefault.k(), 0.0);
  CHECK(entries[0].id == EquationId::kConstraint);
  CHECK(entries[0].max_abs == 0.0);
}

TEST_CASE("Maxwell, Schrodinger and intensity-law residuals of the exact solution converge") {
  const SolitonSolution s = exponential_soliton();
  std::vector<std::vector<ResidualEntry>> levels;
  for (std::size_t n : {101u, 201u, 401u}) levels.push_back(residual_mb(analytic_grids(s, exponential_window(n), 4), kDefault, 4));
  for (std::size_t i = 0; i < 3; ++i) {
    INFO(equation_name(levels[0][i].id));
    CHECK(order(levels[1][i].max_abs, levels[2][i].max_abs) == Approx(2.0).margin(0.3));
  }
  CHECK(levels[2][3].id == EquationId::kPhaseLaw);
  CHECK(levels[2][3].max_abs <= 1e-8);
}

TEST_CASE("dark-state data has vanishing Maxwell-Schrodinger residuals") {
  const SimulationGrid g(-1.0, 1.0, 21, 1.0, 11);
  SolutionGrids d(g);
  for (std::size_t iz = 0; iz < 11; ++iz) {
    for (std::size_t it = 0; it < 21; ++it) {
      d.omega_b(iz, it) = cplx(3.0 * std::cos(g.tau(it)), 0.0);
      d.psi1(iz, it) = 1.0;
    }
  }
  for (const ResidualEntry& e : residual_mb(d, kDefault)) CHECK(e.max_abs <= 1e-14);
  REQUIRE_ERROR_CODE(check_central(d, kDefault), ErrorCode::kEmptyMask);
}

TEST_CASE("solver output has second-order Maxwell-Schrodinger residuals") {
  const SolitonSolution sol(kDefault, ModulationProfile::constant(-1.0));
  std::vector<double> mx;
  for (std::size_t f : {1u, 2u, 4u}) {
    const SimulationGrid g(-14.0, 6.0, 200 * f + 1, 2.0, 50 * f + 1);
    mx.push_back(residual_mb(simulate(soliton_scenario(sol, g)), kDefault).front().max_abs);
  }
  CHECK(order(mx[0], mx[1]) == Approx(2.0).margin(0.3));
  CHECK(order(mx[1], mx[2]) == Approx(2.0).margin(0.3));
}

TEST_CASE("central condition holds at the amplitude k and fails linearly off it") {
  const SolutionGrids g = analytic_grids(exponential_soliton(), exponential_window(120));
  const auto at_k = check_central(g, kDefault);
  CHECK(at_k[0].id == EquationId::kCentralRatio);
  CHECK(at_k[0].max_abs <= 1e-6);
  CHECK(at_k[1].max_abs <= 1e-6);
  const auto doubled = check_central(g, kDefault.with_k(2.0 * kDefault.k()));
  CHECK(doubled[0].max_abs == Approx(1.0).margin(1e-6));
  const auto tripled = check_central(g, kDefault.with_k(3.0 * kDefault.k()));
  CHECK(tripled[0].max_abs == Approx(2.0).margin(1e-6));
}

TEST_CASE("central condition at the peak point") {
  const std::vector<FieldPair> f{{cplx(std::sqrt(18.0), 0.0), cplx(0.0, 0.0)}};
  const std::vector<AtomState> a{{cplx(std::sqrt(0.5), 0.0), cplx(0.0, 0.0), cplx(0.0, std::sqrt(0.5))}};
  const auto e = check_central(f, a, kDefault);
  CHECK(e[0].max_abs <= 1e-15);
  CHECK(e[1].max_abs <= 1e-15);
}

TEST_CASE("adjudication selects the gradient reading on the default parameters") {
  const auto p = ModulationProfile::exponential(1.0);
  const Adjudication a = adjudicate_conventions(kDefault, p, SimulationGrid(-2.0, 2.0, 61, 10.0, 41), 2.0);
  CHECK(a.selected == kAdjudicatedConvention);
  CHECK(a.report.convention == "gradient/tanh+/psi3+");
  CHECK(a.scores.size() == 8);
  CHECK(a.images.empty());
  for (const auto& s : a.scores) CHECK(s.converges == (s.variant == kAdjudicatedConvention));
}

TEST_CASE("adjudication is stable across parameter sets") {
  for (double eps0 : {1.0, 3.0}) {
    const PhysicalParams params = PhysicalParams::from_amplitude(4.5, eps0);
    const double zeta_max = 8.0 / (4.0 * params.k() * eps0);
    const SimulationGrid g(-3.0, 3.0, 61, zeta_max, 41);
    std::vector<ModulationProfile> profiles;
    for (double alpha : {0.5, 1.0, 2.0}) profiles.push_back(ModulationProfile::exponential(alpha));
    for (double m0 : {-1.0, -3.0}) profiles.push_back(ModulationProfile::constant(m0));
    for (const auto& prof : profiles) {
      INFO("eps0 = " << eps0 << ", profile = " << prof.kind());
      CHECK(adjudicate_conventions(params, prof, g, 2.0).selected == kAdjudicatedConvention);
    }
  }
}

TEST_CASE("constant backgrounds collapse equivalent readings into images") {
  const Adjudication a = adjudicate_conventions(kDefault, ModulationProfile::constant(-1.0),
                                                SimulationGrid(-3.0, 3.0, 61, 4.0, 41), 2.0);
  CHECK(a.selected == kAdjudicatedConvention);
  CHECK(a.images.size() == 3);
  for (const auto& v : a.images) CHECK(v.psi3_sign == 1);
}

TEST_CASE("tampered tanh sign leaves a residual that does not refine away") {
  const SolitonSolution s = exponential_soliton();
  ConventionVariant flipped = kAdjudicatedConvention;
  flipped.tanh_sign = -1;
  const SolitonSolution tampered = s.with_convention(flipped);
  const auto worst = [](const SolutionGrids& g) {
    const auto r = residual_mb(g, kDefault, 4);
    return std::max(r[0].max_abs, r[1].max_abs);
  };
  const double bad_coarse = worst(analytic_grids(tampered, exponential_window(101), 4));
  const double bad_fine = worst(analytic_grids(tampered, exponential_window(401), 4));
  const double good_fine = worst(analytic_grids(s, exponential_window(401), 4));
  CHECK(bad_fine > 0.5 * bad_coarse);
  CHECK(bad_fine > 100.0 * good_fine);
}

TEST_CASE("variant selection failure modes") {
  std::vector<VariantScore> scores;
  for (const auto& v : ConventionVariant::all()) scores.push_back({v, 1.0, 1.0, false});
  const auto never = [](std::size_t, std::size_t) { return false; };
  const auto always = [](std::size_t, std::size_t) { return true; };
  REQUIRE_ERROR_CODE(detail::select_variant(scores, never), ErrorCode::kInconsistency);
  scores[2].converges = true;
  scores[5].converges = true;
  try {
    (void)detail::select_variant(scores, never);
    FAIL("expected an ambiguity error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kAmbiguity);
    const std::string msg = e.what();
    CHECK(msg.find(scores[2].variant.label()) != std::string::npos);
    CHECK(msg.find(scores[5].variant.label()) != std::string::npos);
  }
  const auto [first, images] = detail::select_variant(scores, always);
  CHECK(first == 2);
  CHECK(images == std::vector<std::size_t>{5});
}

TEST_CASE("trajectory of the analytic field follows the group velocity") {
  const SolitonSolution s(kDefault, ModulationProfile::exponential(1.0), 3.0);
  const DefaultSteps st = default_steps(3.0, 3.0, 2.0);
  const SimulationGrid g = grid_for_steps(-1.0, 3.0, 6.0, st);
  SolutionGrids fields(g);
  for (std::size_t iz = 0; iz < g.n_zeta(); ++iz) {
    for (std::size_t it = 0; it < g.n_tau(); ++it) fields.omega_a(iz, it) = soliton_fields(s, g.zeta(iz), g.tau(it)).omega_a;
  }
  // A narrow fit window keeps the curvature bias of the linear fit small.
  const TrajectoryEstimate t = measure_trajectory(fields, TrajectoryOptions{0.05, std::nullopt, std::nullopt});
  std::size_t checked = 0;
  for (std::size_t it = 0; it < g.n_tau(); ++it) {
    if (!std::isfinite(t.velocity[it]) || t.tau[it] < -0.7 || t.tau[it] > 2.7) continue;
    const double v = group_velocity(s, t.tau[it]).characteristic;
    CHECK(std::abs(t.velocity[it] / v - 1.0) <= 2e-3);
    CHECK(std::abs(t.center[it] - s.center(t.tau[it])) <= 1e-4);
    ++checked;
  }
  CHECK(checked > 100);
  CHECK(t.travel_uncertainty >= 0.0);
  CHECK(t.travel_distance == Approx(s.center(3.0) - s.center(0.0)).margin(1e-4));
}

TEST_CASE("written soliton comes to rest") {
  const SolitonSolution s(kDefault, ModulationProfile::exponential(1.0), 3.0);
  const SimulationGrid g(-1.0, 12.0, 1301, 6.0, 601);
  const SolutionGrids fields = analytic_grids(s, g, 4);
  const TrajectoryEstimate t = measure_trajectory(fields);
  const double early = mean_velocity(t, -0.5, 0.0);
  const double late = mean_velocity(t, 10.0, 11.5);
  CHECK(early > 1.0);
  CHECK(std::abs(late) <= 0.01 * early);
  CHECK_FALSE(t.truncated);
}

TEST_CASE("trajectory errors and truncation") {
  const SimulationGrid g(-1.0, 1.0, 21, 1.0, 11);
  SolutionGrids flat(g);
  REQUIRE_ERROR_CODE(measure_trajectory(flat), ErrorCode::kDomain);
  // A pulse that leaves through zeta_max before tau_max is flagged.
  const SolitonSolution s(kDefault, ModulationProfile::constant(-1.0), 0.0);
  const SimulationGrid w(-2.0, 2.0, 201, 2.0, 101);
  SolutionGrids fields(w);
  for (std::size_t iz = 0; iz < w.n_zeta(); ++iz) {
    for (std::size_t it = 0; it < w.n_tau(); ++it) fields.omega_a(iz, it) = soliton_fields(s, w.zeta(iz), w.tau(it)).omega_a;
  }
  const TrajectoryEstimate t = measure_trajectory(fields);
  CHECK(t.truncated);
  CHECK(std::isnan(t.travel_distance));
  for (std::size_t it = 0; it < w.n_tau(); ++it) {
    if (t.interior[it]) {
      CHECK(t.center[it] >= 0.0);
      CHECK(t.center[it] <= w.zeta_max());
    }
  }
}

TEST_CASE("convergence study of the Heun march shows second order") {
  const SolitonSolution sol(kDefault, ModulationProfile::constant(-1.0));
  const SimulationGrid g(-14.0, 6.0, 251, 2.0, 51);
  const auto boundary = [&](const SimulationGrid& fine) { return soliton_scenario(sol, fine).boundary; };
  const ConvergenceReport r = convergence_study(soliton_scenario(sol, g), boundary, analytic_grids(sol, g), 3);
  CHECK(r.observed_order >= 1.7);
  CHECK(r.observed_order <= 2.3);
  CHECK(r.monotone);
  CHECK_FALSE(r.flagged);
  for (std::size_t l = 1; l < r.levels.size(); ++l) CHECK(r.levels[l - 1].error / r.levels[l].error >= 3.5);
}

TEST_CASE("first-order field update shows first order") {
  const SolitonSolution sol(kDefault, ModulationProfile::constant(-1.0));
  const SimulationGrid g(-14.0, 6.0, 251, 2.0, 51);
  Scenario sc = soliton_scenario(sol, g);
  sc.scheme = FieldScheme::kEuler;
  const auto boundary = [&](const SimulationGrid& fine) { return soliton_scenario(sol, fine).boundary; };
  const ConvergenceReport r = convergence_study(sc, boundary, analytic_grids(sol, g), 3);
  CHECK(r.observed_order >= 0.8);
  CHECK(r.observed_order <= 1.2);
}

TEST_CASE("analytic data fed as numeric output is flagged") {
  const SolitonSolution sol(kDefault, ModulationProfile::constant(-1.0));
  const SimulationGrid g(-14.0, 6.0, 101, 2.0, 21);
  const SolutionGrids oracle = analytic_grids(sol, g);
  const ConvergenceReport r = convergence_study([&](std::size_t) { return oracle; }, oracle, 3);
  CHECK(r.at_floor);
  CHECK(r.flagged);
  CHECK_FALSE(r.note.empty());
  REQUIRE_ERROR_CODE(convergence_study([&](std::size_t) { return oracle; }, oracle, 2), ErrorCode::kInvalidParameter);
}
