#pragma once

// Selects the reading of the soliton formulas that actually solves the
// Maxwell-Schrodinger system, by residual convergence under refinement.

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <sstream>
#include <string>
#include <vector>

#include "slowlight/error.hpp"
#include "slowlight/residuals.hpp"
#include "slowlight/soliton.hpp"
#include "slowlight/solver.hpp"

namespace slowlight {

struct VariantScore {
  ConventionVariant variant;
  double coarse = 0.0;  // max(Maxwell, Schrodinger) at h, relative to the peak field
  double fine = 0.0;    // same at h/2
  bool converges = false;
};

struct Adjudication {
  ConventionVariant selected;
  ResidualReport report;  // residuals of the selected variant on the fine lattice
  std::vector<VariantScore> scores;
  /// Passing variants that coincide with the selected one up to the exact
  /// symmetry (Omega_b, psi2) -> (-Omega_b, -psi2).
  std::vector<ConventionVariant> images;
};

namespace detail {

inline double mb_score(const SolutionGrids& g, const PhysicalParams& params, int threads) {
  const auto mb = residual_mb(g, params, threads);
  double peak = 0.0;
  for (const auto& d : g.diagnostics) peak = std::max(peak, d.field_peak);
  return std::max(mb[0].max_abs, mb[1].max_abs) / std::max(peak, 1e-300);
}

/// True when eta_i = +-eta_j at every lattice point.
inline bool eta_image(const SolutionGrids& a, const SolutionGrids& b) {
  double scale = 0.0;
  double same = 0.0;
  double flipped = 0.0;
  for (std::size_t i = 0; i < a.omega_b.size(); ++i) {
    const cplx x = a.omega_b.data()[i];
    const cplx y = b.omega_b.data()[i];
    scale = std::max(scale, std::abs(x));
    same = std::max(same, std::abs(x - y));
    flipped = std::max(flipped, std::abs(x + y));
  }
  return std::min(same, flipped) <= 1e-12 * std::max(scale, 1.0);
}

/// Index of the winning score and of the passing scores that are images of
/// it. `image(a, b)` decides whether variants a and b are the same solution.
inline std::pair<std::size_t, std::vector<std::size_t>> select_variant(
    const std::vector<VariantScore>& scores, const std::function<bool(std::size_t, std::size_t)>& image) {
  std::vector<std::size_t> passing;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].converges) passing.push_back(i);
  }
  if (passing.empty()) {
    require(!scores.empty(), ErrorCode::kInconsistency, "no convention variant was scored");
    const auto best = std::min_element(scores.begin(), scores.end(),
                                       [](const auto& a, const auto& b) { return a.fine < b.fine; });
    std::ostringstream msg;
    msg << "no convention variant solves the Maxwell-Schrodinger system; best fine residual " << best->fine << " ("
        << best->variant.label() << ")";
    fail(ErrorCode::kInconsistency, msg.str());
  }
  const std::size_t first = passing.front();
  std::vector<std::size_t> images;
  for (std::size_t q = 1; q < passing.size(); ++q) {
    if (image(first, passing[q])) {
      images.push_back(passing[q]);
      continue;
    }
    fail(ErrorCode::kAmbiguity, "convention variants " + scores[first].variant.label() + " and " +
                                    scores[passing[q]].variant.label() + " both solve the system");
  }
  return {first, images};
}

}  // namespace detail

/// A variant converges when its relative residual is below 1e-2 on the fine
/// lattice and has dropped by at least 3x (order >= ~1.6), or sits at the
/// round-off floor. The first converging variant in priority order wins;
/// any other converging variant must be a symmetry image of it.
inline Adjudication adjudicate_conventions(const PhysicalParams& params, const ModulationProfile& profile,
                                           const SimulationGrid& grid, double phi0 = 0.0, int threads = 1) {
  const SimulationGrid fine = grid.refined(2);
  Adjudication out;
  std::vector<SolutionGrids> fine_grids;
  for (const auto& v : ConventionVariant::all()) {
    const SolitonSolution sol(params, profile, phi0, v);
    VariantScore s{v};
    s.coarse = detail::mb_score(analytic_grids(sol, grid, threads), params, threads);
    auto g = analytic_grids(sol, fine, threads);
    s.fine = detail::mb_score(g, params, threads);
    s.converges = s.fine < 1e-2 && (s.fine <= s.coarse / 3.0 || s.fine < 1e-10);
    out.scores.push_back(s);
    fine_grids.push_back(std::move(g));
  }
  const auto image = [&](std::size_t a, std::size_t b) {
    return out.scores[a].variant.psi3_sign == out.scores[b].variant.psi3_sign &&
           detail::eta_image(fine_grids[a], fine_grids[b]);
  };
  const auto [first, images] = detail::select_variant(out.scores, image);
  out.selected = out.scores[first].variant;
  for (std::size_t q : images) out.images.push_back(out.scores[q].variant);
  out.report = analytic_residuals(SolitonSolution(params, profile, phi0, out.selected), fine, threads);
  return out;
}

}  // namespace slowlight
