#pragma once

// Mode orchestration for the command-line front end. run() computes every
// artifact in memory; nothing reaches the disk unless the whole run succeeds.

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "slowlight/adjudicate.hpp"
#include "slowlight/config.hpp"
#include "slowlight/convergence.hpp"
#include "slowlight/io.hpp"
#include "slowlight/residuals.hpp"
#include "slowlight/soliton.hpp"
#include "slowlight/solver.hpp"
#include "slowlight/trajectory.hpp"

namespace slowlight {

using Json = nlohmann::ordered_json;

struct RunOptions {
  int threads = 1;
  /// Relative paths inside the config (waveform CSV) resolve against this.
  std::filesystem::path base_dir;
};

struct RunOutcome {
  ArtifactSet artifacts;
  Json report;
  int exit_code = 0;
};

/// Thresholds applied by verify mode.
struct VerifyThresholds {
  double order_lo = 1.7;
  double order_hi = 2.3;
  double floor = 1e-10;     // residuals below this pass regardless of order
  double central = 1e-6;
  double phase_law = 1e-8;
};

namespace detail {

inline Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json params_json(const PhysicalParams& p) {
  return Json{{"nu0", p.nu0()}, {"eps0", p.eps0()}, {"gamma", p.gamma()}, {"k", p.k()}, {"delta", p.delta()},
              {"k_overridden", p.k_overridden()}};
}

inline Json grid_json(const SimulationGrid& g) {
  return Json{{"tau_min", g.tau_min()}, {"tau_max", g.tau_max()}, {"n_tau", g.n_tau()},
              {"zeta_max", g.zeta_max()}, {"n_zeta", g.n_zeta()}, {"h_tau", g.h_tau()},
              {"h_zeta", g.h_zeta()}};
}

inline Json residuals_json(const std::vector<ResidualEntry>& entries) {
  Json out = Json::object();
  for (const auto& e : entries) out[equation_name(e.id)] = Json{{"max", num(e.max_abs)}, {"l2", num(e.l2)}};
  return out;
}

/// Flattens a JSON object into key = value lines.
inline void flatten(const Json& j, const std::string& prefix, KeyValueText& kv) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), kv);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), kv);
  } else if (j.is_string()) {
    kv.add(prefix, j.get<std::string>());
  } else if (j.is_boolean()) {
    kv.add_bool(prefix, j.get<bool>());
  } else if (j.is_number_integer() || j.is_number_unsigned()) {
    kv.add(prefix, j.dump());
  } else if (j.is_number()) {
    kv.add(prefix, j.get<double>());
  } else {
    kv.add(prefix, std::string("nan"));
  }
}

/// Smallest divisor s of n-1 with (n-1)/s <= target.
inline std::size_t auto_stride(std::size_t n, std::size_t target) {
  const std::size_t intervals = n - 1;
  for (std::size_t s = 1; s <= intervals; ++s) {
    if (intervals % s == 0 && intervals / s <= target) return s;
  }
  return intervals;
}

inline constexpr std::size_t kAutoStoredIntervals = 500;

}  // namespace detail

struct ResolvedGrid {
  SimulationGrid grid;
  std::size_t zeta_stride;
  std::size_t tau_stride;
};

/// Fills in automatic counts (default step rules) and strides.
inline ResolvedGrid resolve_grid(const RunConfig& c, const PhysicalParams& params, const ModulationProfile& profile) {
  const GridSpec& g = c.grid;
  double omega_max = 0.0;
  double v_max = 0.0;
  if (!g.n_tau || !g.n_zeta) {
    for (int i = 0; i <= 1000; ++i) {
      const double t = g.tau_min + (g.tau_max - g.tau_min) * i / 1000.0;
      omega_max = std::max(omega_max, std::abs(control_field(profile, params.eps0(), t)));
      v_max = std::max(v_max, inv_one_plus_sq(m_eval(profile, t).m) / (4.0 * params.k()));
    }
  }
  const DefaultSteps steps = default_steps(params.eps0(), omega_max, v_max);
  const auto axis = [](std::optional<std::size_t> n, std::optional<std::size_t> stride, double span, double h,
                       std::size_t& n_out, std::size_t& s_out) {
    if (n) {
      n_out = *n;
      s_out = stride ? *stride : detail::auto_stride(n_out, detail::kAutoStoredIntervals);
      return;
    }
    std::size_t intervals = static_cast<std::size_t>(std::ceil(span / h - 1e-9));
    intervals = std::max<std::size_t>(intervals, 1);
    s_out = stride ? *stride : (intervals + detail::kAutoStoredIntervals - 1) / detail::kAutoStoredIntervals;
    intervals = (intervals + s_out - 1) / s_out * s_out;
    n_out = intervals + 1;
  };
  std::size_t nt = 0;
  std::size_t nz = 0;
  std::size_t st = 1;
  std::size_t sz = 1;
  axis(g.n_tau, g.tau_stride, g.tau_max - g.tau_min, steps.h_tau, nt, st);
  axis(g.n_zeta, g.zeta_stride, g.zeta_max, steps.h_zeta, nz, sz);
  return {SimulationGrid(g.tau_min, g.tau_max, nt, g.zeta_max, nz), sz, st};
}

namespace detail {

inline void add_common_files(ArtifactSet& out, const RunConfig& c, const SolutionGrids& g, const ModulationProfile& profile,
                             double eps0, const TrajectoryEstimate* traj) {
  if (c.output.wants("binary")) add_grid_files(out, g);
  if (c.output.wants("csv")) {
    const std::vector<double> zs = c.output.slice_zeta.empty() ? std::vector<double>{0.0} : c.output.slice_zeta;
    for (std::size_t i = 0; i < zs.size(); ++i) {
      out.add("slice_zeta_" + std::to_string(i) + ".csv", slice_at_zeta_csv(g, nearest_zeta_index(g.grid, zs[i])));
    }
    for (std::size_t i = 0; i < c.output.slice_tau.size(); ++i) {
      out.add("slice_tau_" + std::to_string(i) + ".csv",
              slice_at_tau_csv(g, nearest_tau_index(g.grid, c.output.slice_tau[i])));
    }
  }
  if (c.output.wants("plot")) {
    out.add("heatmap_abs_omega_a.dat", heatmap_table(g));
    std::vector<double> taus(g.grid.n_tau());
    std::vector<double> omega(g.grid.n_tau());
    for (std::size_t i = 0; i < taus.size(); ++i) {
      taus[i] = g.grid.tau(i);
      omega[i] = control_field(profile, eps0, taus[i]);
    }
    out.add("control.dat", control_table(taus, omega));
    if (traj) out.add("trajectory.dat", trajectory_table(*traj));
  }
}

inline std::optional<TrajectoryEstimate> try_trajectory(const SolutionGrids& g, const TrajectoryOptions& opt = {}) {
  try {
    return measure_trajectory(g, opt);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDomain || e.code() == ErrorCode::kGridTooSmall) return std::nullopt;
    throw;
  }
}

inline Json trajectory_json(const TrajectoryEstimate& t) {
  return Json{{"tau_start", t.tau_start},
              {"tau_end", t.tau_end},
              {"travel_distance", num(t.travel_distance)},
              {"travel_uncertainty", num(t.travel_uncertainty)},
              {"truncated", t.truncated}};
}

inline Scenario build_scenario(const RunConfig& c, const SolitonSolution& sol, const ResolvedGrid& rg, int threads) {
  Scenario sc = c.boundary == "control"
                    ? control_scenario(sol.params(), rg.grid,
                                       [&](double t) { return control_field(sol.profile(), sol.params().eps0(), t); })
                    : soliton_scenario(sol, rg.grid);
  sc.zeta_stride = rg.zeta_stride;
  sc.tau_stride = rg.tau_stride;
  sc.scheme = c.scheme == "euler" ? FieldScheme::kEuler : FieldScheme::kHeun;
  sc.threads = threads;
  return sc;
}

}  // namespace detail

inline RunOutcome run(const RunConfig& c, const RunOptions& opt = {}) {
  validate_config(c);
  const PhysicalParams params = build_params(c.params);
  const ModulationProfile profile = build_profile(c.profile, params.eps0(), opt.base_dir);
  // Every mode samples m on the whole tau window, so reject it before any work.
  require_in_domain(profile, c.grid.tau_min);
  require_in_domain(profile, c.grid.tau_max);
  const ConventionVariant convention = build_convention(c.convention);
  const SolitonSolution sol(params, profile, c.phi0, convention);
  const ResolvedGrid rg = resolve_grid(c, params, profile);
  const int threads = opt.threads;

  RunOutcome out;
  Json& rep = out.report;
  rep["name"] = c.name;
  rep["mode"] = mode_name(c.mode);
  rep["status"] = "ok";
  rep["convention"] = convention.label();
  rep["maxwell_bloch_consistent"] = sol.maxwell_bloch_consistent();
  rep["params"] = detail::params_json(params);
  const SimulationGrid* manifest_grid = nullptr;
  std::optional<SolutionGrids> grids;

  switch (c.mode) {
    case RunMode::kAnalytic: {
      const SimulationGrid stored = stored_grid(Scenario{params, rg.grid, {}, {}, {}, rg.zeta_stride, rg.tau_stride});
      grids.emplace(analytic_grids(sol, stored, threads));
      const auto traj = detail::try_trajectory(*grids);
      rep["grid"] = detail::grid_json(stored);
      double peak = 0.0;
      for (const auto& d : grids->diagnostics) peak = std::max(peak, std::abs(d.field_peak));
      Json summary;
      summary["peak_abs_field"] = peak;
      const Interval dom = profile.domain();
      if (dom.contains(0.0)) {
        const GroupVelocity v = group_velocity(sol, 0.0);
        summary["group_velocity_tau0"] = v.characteristic;
        summary["lab_velocity_tau0_c"] = v.lab_fraction_of_c;
        summary["control_field_tau0"] = control_field(profile, params.eps0(), 0.0);
        try {
          summary["stopping_distance"] = stopping_distance(profile, params.k());
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kNoStop) throw;
          summary["stopping_distance"] = nullptr;
        }
      }
      summary["max_norm_deviation"] = grids->max_norm_deviation();
      rep["summary"] = summary;
      if (traj) rep["trajectory"] = detail::trajectory_json(*traj);
      detail::add_common_files(out.artifacts, c, *grids, profile, params.eps0(), traj ? &*traj : nullptr);
      break;
    }
    case RunMode::kSimulate: {
      const Scenario sc = detail::build_scenario(c, sol, rg, threads);
      grids.emplace(simulate(sc));
      rep["grid"] = detail::grid_json(rg.grid);
      rep["stored_grid"] = detail::grid_json(grids->grid);
      Json summary;
      summary["boundary"] = c.boundary;
      summary["scheme"] = c.scheme;
      summary["max_norm_deviation"] = grids->max_norm_deviation();
      summary["max_norm_increase"] = detail::num(grids->max_norm_increase());
      summary["max_field_imag"] = grids->max_field_imag();
      std::optional<TrajectoryEstimate> traj;
      if (c.boundary == "soliton") {
        if (params.gamma() == 0.0) {
          summary["relative_field_error"] = relative_field_error(*grids, analytic_grids(sol, grids->grid, threads));
        }
        traj = detail::try_trajectory(*grids);
        if (traj) {
          rep["trajectory"] = detail::trajectory_json(*traj);
          if (profile.domain().contains(0.0)) {
            summary["group_velocity_tau0"] = group_velocity(sol, 0.0).characteristic;
          }
        }
      } else {
        double drift = 0.0;
        for (std::size_t iz = 0; iz < grids->grid.n_zeta(); ++iz) {
          for (std::size_t it = 0; it < grids->grid.n_tau(); ++it) {
            drift = std::max({drift, std::abs(grids->omega_a(iz, it) - grids->omega_a(0, it)),
                              std::abs(grids->omega_b(iz, it) - grids->omega_b(0, it))});
          }
        }
        summary["field_zeta_drift"] = drift;
      }
      rep["summary"] = summary;
      if (c.output.wants("csv")) out.artifacts.add("diagnostics.csv", diagnostics_csv(*grids));
      detail::add_common_files(out.artifacts, c, *grids, profile, params.eps0(), traj ? &*traj : nullptr);
      break;
    }
    case RunMode::kVerify: {
      const VerifyThresholds th;
      const SimulationGrid& g = rg.grid;
      const SimulationGrid coarse(g.tau_min(), g.tau_max(), std::max<std::size_t>((g.n_tau() - 1) / 4, 20) + 1,
                                  g.zeta_max(), std::max<std::size_t>((g.n_zeta() - 1) / 4, 20) + 1);
      const Adjudication adj = adjudicate_conventions(params, profile, coarse, c.phi0, threads);
      Json aj;
      aj["selected"] = adj.selected.label();
      for (const auto& s : adj.scores) {
        aj["scores"][s.variant.label()] = Json{{"coarse", s.coarse}, {"fine", s.fine}, {"converges", s.converges}};
      }
      for (const auto& v : adj.images) aj["symmetry_images"].push_back(v.label());
      rep["adjudication"] = aj;
      rep["convention"] = adj.selected.label();
      const SolitonSolution chosen = sol.with_convention(adj.selected);
      const ResidualReport r1 = analytic_residuals(chosen, g, threads);
      const ResidualReport r2 = analytic_residuals(chosen, g.refined(2), threads);
      rep["grid"] = detail::grid_json(g);
      bool all_pass = true;
      Json entries = Json::object();
      for (std::size_t i = 0; i < r1.entries.size(); ++i) {
        const ResidualEntry& a = r1.entries[i];
        const ResidualEntry& b = r2.entries[i];
        Json e{{"max_h", detail::num(a.max_abs)}, {"max_h2", detail::num(b.max_abs)}};
        bool pass = false;
        switch (a.id) {
          case EquationId::kCentralRatio:
          case EquationId::kCentralAmplitude:
            pass = b.max_abs <= th.central;
            e["threshold"] = th.central;
            break;
          case EquationId::kPhaseLaw:
            pass = b.max_abs <= th.phase_law;
            e["threshold"] = th.phase_law;
            break;
          default: {
            const double order = std::log2(a.max_abs / b.max_abs);
            e["order"] = detail::num(order);
            pass = b.max_abs <= th.floor || (order >= th.order_lo && order <= th.order_hi);
            e["threshold"] = "order in [" + fmt(th.order_lo) + ", " + fmt(th.order_hi) + "] or max <= " + fmt(th.floor);
          }
        }
        e["pass"] = pass;
        all_pass = all_pass && pass;
        entries[equation_name(a.id)] = e;
      }
      rep["residuals"] = entries;
      const SolutionGrids ag = analytic_grids(chosen, g, threads);
      const auto doubled = check_central(ag, params.with_k(2.0 * params.k()));
      rep["central_k_doubled"] = detail::residuals_json(doubled);
      rep["all_pass"] = all_pass;
      if (!all_pass) {
        rep["status"] = "fail";
        out.exit_code = exit_code(ErrorCode::kInconsistency);
      }
      grids.emplace(ag);
      if (c.output.wants("binary")) add_grid_files(out.artifacts, ag);
      break;
    }
    case RunMode::kStopping: {
      const double analytic = stopping_distance(profile, params.k());
      const Scenario sc = detail::build_scenario(c, sol, rg, threads);
      grids.emplace(simulate(sc));
      TrajectoryOptions topt;
      topt.tau_start = c.stop_tau_start;
      topt.tau_end = rg.grid.tau_max();
      const TrajectoryEstimate traj = measure_trajectory(*grids, topt);
      rep["grid"] = detail::grid_json(rg.grid);
      rep["stored_grid"] = detail::grid_json(grids->grid);
      Json s;
      s["analytic_distance"] = analytic;
      s["measured_distance"] = detail::num(traj.travel_distance);
      s["uncertainty"] = detail::num(traj.travel_uncertainty);
      s["relative_deviation"] = detail::num(std::abs(traj.travel_distance / analytic - 1.0));
      s["truncated"] = traj.truncated;
      s["max_norm_deviation"] = grids->max_norm_deviation();
      rep["stopping"] = s;
      rep["trajectory"] = detail::trajectory_json(traj);
      detail::add_common_files(out.artifacts, c, *grids, profile, params.eps0(), &traj);
      break;
    }
    case RunMode::kConvergence: {
      const Scenario base = detail::build_scenario(c, sol, ResolvedGrid{rg.grid, 1, 1}, threads);
      require(c.boundary == "soliton" && params.gamma() == 0.0, ErrorCode::kInvalidParameter,
              "convergence mode needs the soliton boundary and gamma = 0 (the analytic oracle)");
      const SolutionGrids oracle = analytic_grids(sol, rg.grid, threads);
      const auto boundary = [&](const SimulationGrid& fine) { return soliton_scenario(sol, fine).boundary; };
      const ConvergenceReport cr = convergence_study(base, boundary, oracle, c.levels);
      rep["grid"] = detail::grid_json(rg.grid);
      Json levels = Json::array();
      for (const auto& l : cr.levels) {
        levels.push_back(Json{{"h_tau", l.h_tau}, {"h_zeta", l.h_zeta}, {"error", l.error},
                              {"order", detail::num(l.order)}, {"self_difference", detail::num(l.self_difference)},
                              {"self_order", detail::num(l.self_order)}});
      }
      rep["convergence"] = Json{{"levels", levels},
                                {"observed_order", detail::num(cr.observed_order)},
                                {"self_order", detail::num(cr.self_order)},
                                {"monotone", cr.monotone},
                                {"at_floor", cr.at_floor},
                                {"flagged", cr.flagged},
                                {"note", cr.note}};
      break;
    }
  }

  if (grids) manifest_grid = &grids->grid;
  if (c.output.wants("json")) out.artifacts.add("report.json", rep.dump(2) + "\n");
  if (c.output.wants("text")) {
    KeyValueText kv;
    detail::flatten(rep, "", kv);
    out.artifacts.add("report.txt", kv.str());
  }
  RunConfig canonical = c;
  canonical.output.dir.clear();
  out.artifacts.add("config.canonical", emit_config(canonical));
  add_manifest(out.artifacts, config_hash(c), rep["convention"].get<std::string>(), params, manifest_grid);
  return out;
}

/// Machine-readable failure report for a module error.
inline std::string failure_report(const Error& e) {
  const Json j{{"status", "error"},
               {"category", error_code_name(e.code())},
               {"exit_code", exit_code(e.code())},
               {"message", e.what()}};
  return j.dump();
}

}  // namespace slowlight
