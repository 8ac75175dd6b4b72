#pragma once

// Grid-refinement studies. Level l refines both spacings by 2^l and stores
// only the base lattice, so every level is compared on the same points.

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "slowlight/error.hpp"
#include "slowlight/solver.hpp"

namespace slowlight {

struct ConvergenceLevel {
  double h_tau = 0.0;
  double h_zeta = 0.0;
  double error = 0.0;  // relative sup-norm field error against the oracle
  double order = std::numeric_limits<double>::quiet_NaN();  // log2(e_{l-1} / e_l)
  double self_difference = std::numeric_limits<double>::quiet_NaN();  // |u_l - u_{l-1}|, relative
  double self_order = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceReport {
  std::vector<ConvergenceLevel> levels;
  double observed_order = std::numeric_limits<double>::quiet_NaN();  // finest pair
  double self_order = std::numeric_limits<double>::quiet_NaN();      // finest triple
  bool monotone = true;
  bool at_floor = false;
  /// Set when the measured order cannot be trusted (non-monotone or floor).
  bool flagged = false;
  std::string note;
};

/// Produces the solution for a lattice refined by `factor`, sampled back on
/// the base lattice.
using LevelProducer = std::function<SolutionGrids(std::size_t factor)>;

/// Errors below this (relative) are treated as the round-off/quadrature floor.
inline constexpr double kConvergenceFloor = 1e-11;

inline ConvergenceReport convergence_study(const LevelProducer& produce, const SolutionGrids& oracle,
                                           std::size_t levels) {
  require(levels >= 3, ErrorCode::kInvalidParameter, "convergence study needs at least 3 levels");
  ConvergenceReport rep;
  std::vector<SolutionGrids> runs;
  for (std::size_t l = 0; l < levels; ++l) {
    const std::size_t factor = std::size_t{1} << l;
    runs.push_back(produce(factor));
    const SolutionGrids& r = runs.back();
    require(r.grid.n_zeta() == oracle.grid.n_zeta() && r.grid.n_tau() == oracle.grid.n_tau(),
            ErrorCode::kInvalidParameter, "level output must be sampled on the oracle lattice");
    ConvergenceLevel lv;
    lv.h_tau = oracle.grid.h_tau() / static_cast<double>(factor);
    lv.h_zeta = oracle.grid.h_zeta() / static_cast<double>(factor);
    lv.error = relative_field_error(r, oracle);
    if (l > 0) {
      const ConvergenceLevel& prev = rep.levels.back();
      lv.order = std::log2(prev.error / lv.error);
      lv.self_difference = relative_field_error(r, runs[l - 1]);
      if (l > 1) lv.self_order = std::log2(prev.self_difference / lv.self_difference);
      if (!(lv.error < prev.error)) rep.monotone = false;
    }
    if (lv.error < kConvergenceFloor) rep.at_floor = true;
    rep.levels.push_back(lv);
  }
  rep.observed_order = rep.levels.back().order;
  rep.self_order = rep.levels.back().self_order;
  std::ostringstream note;
  if (rep.at_floor) note << "errors reach the floor " << kConvergenceFloor << "; order is not meaningful. ";
  if (!rep.monotone) note << "errors do not decrease monotonically under refinement. ";
  rep.flagged = rep.at_floor || !rep.monotone;
  rep.note = note.str();
  return rep;
}

/// Study of simulate() for a scenario against an oracle on its lattice.
inline ConvergenceReport convergence_study(const Scenario& base,
                                           const std::function<std::vector<FieldPair>(const SimulationGrid&)>& boundary,
                                           const SolutionGrids& oracle, std::size_t levels) {
  const LevelProducer produce = [&](std::size_t factor) {
    Scenario sc = base;
    sc.grid = base.grid.refined(factor);
    sc.boundary = boundary(sc.grid);
    sc.zeta_stride = base.zeta_stride * factor;
    sc.tau_stride = base.tau_stride * factor;
    return simulate(sc);
  };
  return convergence_study(produce, oracle, levels);
}

}  // namespace slowlight
