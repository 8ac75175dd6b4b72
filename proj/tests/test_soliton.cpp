#include <cmath>
#include <set>
#include <vector>

#include "slowlight/soliton.hpp"
#include "support.hpp"

using namespace slowlight;
using Catch::Approx;
using slowlight::test::rel;

namespace {

const PhysicalParams kDefault;  // nu0 = 4.5, eps0 = 3, k = 0.0625

// zeta at which the phase takes the value phi at time tau.
double zeta_for_phase(const SolitonSolution& s, double tau, double phi) {
  const double e = s.params().eps0();
  return (e * phase_integral(s.profile(), tau) + s.phi0() - phi) / (4.0 * s.params().k() * e);
}

}  // namespace

TEST_CASE("soliton_fields examples") {
  const SolitonSolution one(kDefault, ModulationProfile::constant(1.0));
  const FieldPair f = soliton_fields(one, 0.0, 0.0);
  CHECK(f.omega_a.real() == Approx(6.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(f.omega_a.real() == Approx(4.242641).epsilon(1e-7));

  const SolitonSolution neg(kDefault, ModulationProfile::constant(-1.0));
  const FieldPair g = soliton_fields(neg, 0.0, 0.0);
  CHECK(g.omega_a.real() == Approx(4.242641).epsilon(1e-7));
  CHECK(g.omega_b.real() == 0.0);
  CHECK(g.omega_a.imag() == 0.0);
  CHECK(g.omega_b.imag() == 0.0);
}

TEST_CASE("fields far from the ridge: Omega_a vanishes, Omega_b approaches the mirrored background") {
  for (double m0 : {-3.0, -1.0, 0.5, 2.0}) {
    const SolitonSolution s(kDefault, ModulationProfile::constant(m0), 1.5);
    for (double tau : {-2.0, 0.0, 3.0}) {
      const double c = control_field(s.profile(), 3.0, tau);
      const FieldPair behind = soliton_fields(s, zeta_for_phase(s, tau, 30.0), tau);
      const FieldPair ahead = soliton_fields(s, zeta_for_phase(s, tau, -30.0), tau);
      const double tail = 4.0 * 3.0 * std::exp(-30.0);  // 2 eps0 sech(30) bound
      CHECK(std::abs(behind.omega_a) <= tail);
      CHECK(std::abs(ahead.omega_a) <= tail);
      // tanh -> +1 reproduces the control; tanh -> -1 its mirror image.
      CHECK(std::abs(behind.omega_b.real() - c) <= 1e-12);
      CHECK(std::abs(ahead.omega_b.real() + c) <= 1e-12);
      CHECK(std::abs(background_field(s, tau) - ahead.omega_b.real()) <= 1e-12);
    }
  }
}

TEST_CASE("Omega_a is even and Omega_b odd about its tanh-free part under phi -> -phi") {
  for (const auto& prof : {ModulationProfile::exponential(1.0), ModulationProfile::exponential(0.5),
                           ModulationProfile::constant(-2.0)}) {
    const SolitonSolution s(kDefault, prof, 2.0);
    for (double tau : {-1.0, 0.3, 1.7}) {
      const ModulationValue mv = m_eval(prof, tau);
      const double center = 2.0 * mv.dm / (mv.m * mv.m + 1.0);
      for (double phi : {0.2, 1.0, 4.0}) {
        const FieldPair p = soliton_fields(s, zeta_for_phase(s, tau, phi), tau);
        const FieldPair q = soliton_fields(s, zeta_for_phase(s, tau, -phi), tau);
        CHECK(std::abs(p.omega_a.real() - q.omega_a.real()) <= 1e-12);
        CHECK(std::abs((p.omega_b.real() - center) + (q.omega_b.real() - center)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("Liouville representation matches |Omega_a| on a 100x100 grid") {
  for (const auto& prof : {ModulationProfile::exponential(1.0), ModulationProfile::constant(-1.0)}) {
    const SolitonSolution s(kDefault, prof, 4.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      for (int j = 0; j < 100; ++j) {
        const double zeta = 12.0 * i / 99.0;
        const double tau = -3.0 + 6.0 * j / 99.0;
        const LiouvilleFields lf = rho_liouville(s, zeta, tau);
        const FieldPair f = soliton_fields(s, zeta, tau);
        worst = std::max(worst, std::abs(std::exp(-lf.rho) - std::abs(f.omega_a)));
        CHECK(lf.eta == f.omega_b.real());
        CHECK(1.0 - s.params().k() * lf.a_plus * lf.a_minus > 0.0);
      }
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("rho plug-in value at zeta = 0, tau = 0") {
  const SolitonSolution s(kDefault, ModulationProfile::exponential(1.0));
  const LiouvilleFields lf = rho_liouville(s, 0.0, 0.0);
  CHECK(lf.a_plus == Approx(-16.0).epsilon(1e-15));
  CHECK(lf.a_minus == Approx(1.0).epsilon(1e-15));
  const double a_plus = -16.0, a_minus = 1.0, dz_aplus = 24.0, dt_aminus = 3.0, k = 0.0625;
  const double oracle = -0.5 * std::log(dz_aplus * dt_aminus / std::pow(1.0 - k * a_plus * a_minus, 2));
  CHECK(lf.rho == Approx(oracle).epsilon(1e-14));
  CHECK(lf.rho == Approx(-1.445).epsilon(1e-3));
  CHECK(lf.rho == Approx(-std::log(6.0 / std::sqrt(2.0))).epsilon(1e-14));
}

TEST_CASE("rho grows without bound deep in the medium") {
  const SolitonSolution s(kDefault, ModulationProfile::exponential(1.0));
  double prev = rho_liouville(s, 10.0, 0.0).rho;
  for (double z = 20.0; z <= 160.0; z += 20.0) {
    const double r = rho_liouville(s, z, 0.0).rho;
    CHECK(r > prev + 1.0);
    prev = r;
  }
  CHECK(std::isfinite(rho_liouville(s, 1e3, 0.0).rho));
}

TEST_CASE("atomic state at the soliton peak") {
  const SolitonSolution s(kDefault, ModulationProfile::constant(1.0));
  const AtomState a = atomic_state(s, 0.0, 0.0);
  CHECK(std::norm(a.psi3) == Approx(0.5).epsilon(1e-14));
  // Real-field gauge: i * psi3 = -Omega_a / (2|eps0|).
  const cplx real_gauge = kRealPsi3Gauge * a.psi3;
  CHECK(real_gauge.real() == Approx(-0.707107).epsilon(1e-6));
  CHECK(std::abs(real_gauge.imag()) <= 1e-16);
  CHECK(4.5 * 0.5 / (2.0 * 0.0625 * 18.0) == 1.0);
  CHECK(kDefault.nu0() * std::norm(a.psi3) / (2.0 * kDefault.k() * std::norm(soliton_fields(s, 0, 0).omega_a)) ==
        Approx(1.0).epsilon(1e-14));
}

TEST_CASE("far ahead of the soliton the atoms are in the dark state") {
  const SolitonSolution s(kDefault, ModulationProfile::exponential(1.0), 0.0);
  const double tau = -12.0;
  const AtomState a = atomic_state(s, 0.0, tau);
  CHECK(std::abs(a.psi1 - cplx(1.0, 0.0)) <= 1e-12);
  CHECK(std::abs(a.psi2) <= 1e-12);
  CHECK(std::abs(a.psi3) <= 1e-12);
}

TEST_CASE("atomic columns keep unit norm") {
  for (const auto& prof : {ModulationProfile::exponential(1.0), ModulationProfile::constant(-1.0),
                           ModulationProfile::exponential(2.0)}) {
    const SolitonSolution s(kDefault, prof, 3.0);
    std::vector<double> taus;
    for (double t = -4.0; t <= 6.0; t += 0.05) taus.push_back(t);
    for (double zeta : {0.0, 2.0, 7.0}) {
      for (const AtomState& a : atomic_column(s, zeta, taus)) CHECK(std::abs(a.norm2() - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("atomic_state preconditions") {
  const SolitonSolution relaxing(kDefault.with_gamma(0.1), ModulationProfile::constant(-1.0));
  REQUIRE_ERROR_CODE(atomic_state(relaxing, 0.0, 0.0), ErrorCode::kInvalidParameter);
  const SolitonSolution s(kDefault, ModulationProfile::constant(-1.0));
  const double t[] = {0.0};
  REQUIRE_ERROR_CODE(atomic_column(s, 0.0, t, -1.0), ErrorCode::kInsufficientAsymptote);
  // A window that starts inside the pulse cannot be dark.
  const auto w = ControlWaveform::sample([](double) { return 3.0; }, -1.0, 1.0, 41);
  const SolitonSolution boxed(kDefault, profile_from_control(w, -1.0, 3.0));
  REQUIRE_ERROR_CODE(atomic_state(boxed, 0.0, 0.0), ErrorCode::kInsufficientAsymptote);
}

TEST_CASE("group velocity examples") {
  CHECK(group_velocity(SolitonSolution(kDefault, ModulationProfile::constant(1.0)), 0.0).characteristic == 2.0);
  CHECK(group_velocity(SolitonSolution(kDefault, ModulationProfile::constant(-1.0)), 0.0).characteristic == 2.0);
  CHECK(group_velocity(SolitonSolution(kDefault, ModulationProfile::constant(0.0)), 0.0).characteristic == 4.0);
  const SolitonSolution ex(kDefault, ModulationProfile::exponential(1.0));
  double prev = INFINITY;
  for (double t = 0.0; t <= 40.0; t += 4.0) {
    const double v = group_velocity(ex, t).characteristic;
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-30);
  const GroupVelocity g = group_velocity(SolitonSolution(kDefault, ModulationProfile::constant(1.0)), 0.0);
  CHECK(g.lab_fraction_of_c == Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("soliton centre moves at the group velocity") {
  for (const auto& prof : {ModulationProfile::exponential(1.0), ModulationProfile::constant(-3.0),
                           ModulationProfile::exponential(0.5)}) {
    const SolitonSolution s(kDefault, prof, 1.0);
    const double h = 1e-4;
    for (double t = -3.0; t <= 3.0; t += 0.5) {
      const double fd = (s.center(t + h) - s.center(t - h)) / (2 * h);
      CHECK(std::abs(fd - group_velocity(s, t).characteristic) <= 1e-8);
      CHECK(std::abs(s.phase(s.center(t), t)) <= 1e-12);
    }
  }
}

TEST_CASE("linear-theory velocity examples") {
  CHECK(eit_velocity(3.0, 4.5) == 1.0);
  CHECK(eit_velocity(0.0, 4.5) == 0.0);
  CHECK(eit_velocity(0.3, 4.5) == Approx(0.01).epsilon(1e-14));
  REQUIRE_ERROR_CODE(eit_velocity(1.0, 0.0), ErrorCode::kInvalidParameter);
}

TEST_CASE("exact velocity on the EIT branch") {
  // Closed form of 1/(4k(m0^2+1)) with the EIT root and k = nu0/(8 eps0^2):
  // v = Omega0^2 / (nu0 (1 + sqrt(1 - Omega0^2/eps0^2))).
  const double om = 0.3, eps0 = 3.0, nu0 = 4.5;
  const double m0 = riccati_match_constant(om, eps0).eit;
  const double v = group_velocity(SolitonSolution(kDefault, ModulationProfile::constant(m0)), 0.0).characteristic;
  const double closed = om * om / (nu0 * (1.0 + std::sqrt(1.0 - om * om / (eps0 * eps0))));
  CHECK(v == Approx(closed).epsilon(1e-12));
  CHECK(v == Approx(0.0100251).epsilon(1e-5));
  // The exact velocity sits 0.25% above the linear-theory value; the two
  // agree only as Omega0/eps0 -> 0.
  CHECK(rel(v, eit_velocity(om, nu0)) == Approx(0.00251258).epsilon(1e-5));
  const double small = 0.003;
  const double m_small = riccati_match_constant(small, eps0).eit;
  const double v_small = 1.0 / (4.0 * kDefault.k() * (m_small * m_small + 1.0));
  CHECK(rel(v_small, eit_velocity(small, nu0)) < 1e-6);
}

TEST_CASE("stopping distance examples") {
  CHECK(stopping_distance(ModulationProfile::exponential(1.0), 0.0625) == Approx(2.0 * std::log(2.0)).epsilon(1e-15));
  CHECK(stopping_distance(ModulationProfile::exponential(1.0), 0.0625) == Approx(1.386294).epsilon(1e-6));
  CHECK(stopping_distance(ModulationProfile::exponential(2.0), 0.0625) == Approx(0.693147).epsilon(1e-6));
  REQUIRE_ERROR_CODE(stopping_distance(ModulationProfile::constant(-1.0), 0.0625), ErrorCode::kNoStop);
  REQUIRE_ERROR_CODE(stopping_distance(ModulationProfile::exponential(1.0), 0.0), ErrorCode::kInvalidParameter);
  for (double alpha : {0.25, 0.5, 1.0, 2.0, 7.0}) {
    for (double k : {0.01, 0.0625, 0.5}) {
      CHECK(std::abs(stopping_distance(ModulationProfile::exponential(alpha), k) * 8 * alpha * k - std::log(2.0)) <= 1e-12);
    }
  }
}

TEST_CASE("stopping distance by quadrature") {
  const auto pw = ModulationProfile::piecewise({{-1.0, 0.0, ConstantLaw{1.0}}, {0.0, 60.0, ExponentialLaw{1.0}}});
  CHECK(stopping_distance(pw, 0.0625) == Approx(2.0 * std::log(2.0)).epsilon(1e-9));
  const auto w = ControlWaveform::sample([](double) { return 3.0; }, -1.0, 30.0, 311);
  REQUIRE_ERROR_CODE(stopping_distance(profile_from_control(w, -1.0, 3.0), 0.0625), ErrorCode::kNoStop);
}

TEST_CASE("convention variants enumerate eight distinct labels") {
  std::set<std::string> labels;
  for (const ConventionVariant& v : ConventionVariant::all()) {
    labels.insert(v.label());
    CHECK(ConventionVariant::from_label(v.label()) == v);
  }
  CHECK(labels.size() == 8);
  CHECK(ConventionVariant::all().front() == kAdjudicatedConvention);
  CHECK(kAdjudicatedConvention.label() == "gradient/tanh+/psi3+");
  REQUIRE_ERROR_CODE(ConventionVariant::from_label("gradient/tanh0/psi3+"), ErrorCode::kInvalidParameter);
}

TEST_CASE("overridden k marks the solution as Liouville-only") {
  const SolitonSolution s(PhysicalParams::with_explicit_k(4.5, 3.0, 0.125), ModulationProfile::constant(-1.0));
  CHECK_FALSE(s.maxwell_bloch_consistent());
  CHECK(SolitonSolution(kDefault, ModulationProfile::constant(-1.0)).maxwell_bloch_consistent());
}
