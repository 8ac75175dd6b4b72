#pragma once

// Run configuration: an INI-style text format with sections, parsed with
// line-numbered diagnostics and emitted in a canonical form that re-parses to
// the same value.
//
//   name = demo                # top level: name, mode
//   mode = simulate            # analytic | simulate | verify | stopping | convergence
//   [params]     nu0, eps0, gamma, delta, k (number or auto)
//   [profile]    kind = constant | exponential | control-constant | piecewise | from-control
//                alpha, m0, omega0, branch (eit | other), waveform (CSV path),
//                m_initial, anchor_tau
//   [profile.piece]  begin, end, kind (constant | exponential), alpha, m0; repeatable
//   [grid]       tau_min, tau_max, n_tau, zeta_max, n_zeta, tau_stride, zeta_stride
//                (counts and strides accept auto)
//   [soliton]    phi0, convention (adjudicated or a variant label)
//   [simulate]   boundary = soliton | control, scheme = heun | euler
//   [stopping]   tau_start
//   [convergence] levels
//   [output]     dir, formats (binary, csv, plot, json, text), slice_zeta, slice_tau

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "slowlight/error.hpp"
#include "slowlight/io.hpp"
#include "slowlight/modulation.hpp"
#include "slowlight/params.hpp"
#include "slowlight/soliton.hpp"

namespace slowlight {

enum class RunMode { kAnalytic, kSimulate, kVerify, kStopping, kConvergence };

inline const char* mode_name(RunMode m) {
  switch (m) {
    case RunMode::kAnalytic: return "analytic";
    case RunMode::kSimulate: return "simulate";
    case RunMode::kVerify: return "verify";
    case RunMode::kStopping: return "stopping";
    case RunMode::kConvergence: return "convergence";
  }
  return "unknown";
}

inline RunMode parse_mode(const std::string& s) {
  for (RunMode m : {RunMode::kAnalytic, RunMode::kSimulate, RunMode::kVerify, RunMode::kStopping,
                    RunMode::kConvergence}) {
    if (s == mode_name(m)) return m;
  }
  fail(ErrorCode::kConfig, "unknown mode '" + s + "'");
}

struct ParamsSpec {
  double nu0 = 4.5;
  double eps0 = 3.0;
  double gamma = 0.0;
  double delta = 0.0;
  std::optional<double> k;  // empty: from the amplitude relation
  friend bool operator==(const ParamsSpec&, const ParamsSpec&) = default;
};

struct PieceSpec {
  double begin = 0.0;
  double end = 0.0;
  std::string kind = "constant";
  double alpha = 1.0;
  double m0 = 0.0;
  friend bool operator==(const PieceSpec&, const PieceSpec&) = default;
};

struct ProfileSpec {
  std::string kind = "exponential";
  double alpha = 1.0;
  double m0 = -1.0;
  double omega0 = 3.0;
  std::string branch = "eit";
  std::string waveform;
  double m_initial = 1.0;
  std::optional<double> anchor_tau;
  std::vector<PieceSpec> pieces;
  friend bool operator==(const ProfileSpec&, const ProfileSpec&) = default;
};

struct GridSpec {
  double tau_min = -4.0;
  double tau_max = 4.0;
  double zeta_max = 8.0;
  std::optional<std::size_t> n_tau = 401;  // empty: auto
  std::optional<std::size_t> n_zeta = 201;
  std::optional<std::size_t> tau_stride = 1;
  std::optional<std::size_t> zeta_stride = 1;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct OutputSpec {
  std::string dir = "out";
  std::vector<std::string> formats = {"binary", "csv", "plot", "json", "text"};
  std::vector<double> slice_zeta;
  std::vector<double> slice_tau;
  bool wants(const std::string& f) const { return std::find(formats.begin(), formats.end(), f) != formats.end(); }
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct RunConfig {
  std::string name = "default";
  RunMode mode = RunMode::kAnalytic;
  ParamsSpec params;
  ProfileSpec profile;
  GridSpec grid;
  double phi0 = 0.0;
  std::string convention = "adjudicated";
  std::string boundary = "soliton";
  std::string scheme = "heun";
  double stop_tau_start = 0.0;
  std::size_t levels = 3;
  OutputSpec output;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline PhysicalParams build_params(const ParamsSpec& p) {
  if (p.k) return PhysicalParams::with_explicit_k(p.nu0, p.eps0, *p.k, p.gamma, p.delta);
  return PhysicalParams::from_amplitude(p.nu0, p.eps0, p.gamma, p.delta);
}

/// from-control profiles read their waveform relative to `base_dir`.
inline ModulationProfile build_profile(const ProfileSpec& s, double eps0, const std::filesystem::path& base_dir = {}) {
  if (s.kind == "constant") return ModulationProfile::constant(s.m0);
  if (s.kind == "exponential") return ModulationProfile::exponential(s.alpha);
  if (s.kind == "control-constant") {
    const RiccatiRoots r = riccati_match_constant(s.omega0, eps0);
    if (r.degenerate && s.omega0 == 0.0) {
      fail(ErrorCode::kDegenerate, "zero control gives m0 = 0 or |m0| = inf; use kind = constant with m0 = 0");
    }
    return ModulationProfile::constant(s.branch == "other" ? r.other : r.eit);
  }
  if (s.kind == "piecewise") {
    std::vector<Piece> pieces;
    for (const auto& p : s.pieces) {
      PieceLaw law = p.kind == "exponential" ? PieceLaw(ExponentialLaw{p.alpha}) : PieceLaw(ConstantLaw{p.m0});
      pieces.push_back({p.begin, p.end, law});
    }
    return ModulationProfile::piecewise(std::move(pieces));
  }
  if (s.kind == "from-control") {
    const auto path = base_dir.empty() ? std::filesystem::path(s.waveform) : base_dir / s.waveform;
    const ControlWaveform w = ControlWaveform::from_csv(read_file(path));
    return profile_from_control(w, s.m_initial, eps0, s.anchor_tau);
  }
  fail(ErrorCode::kConfig, "unknown profile kind '" + s.kind + "'");
}

inline ConventionVariant build_convention(const std::string& s) {
  if (s == "adjudicated") return kAdjudicatedConvention;
  return ConventionVariant::from_label(s);
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] inline void config_fail(std::size_t line, const std::string& msg, ErrorCode code = ErrorCode::kConfig) {
  fail(code, "line " + std::to_string(line) + ": " + msg);
}

inline double parse_number(const std::string& v, std::size_t line, const std::string& key) {
  double out = 0.0;
  const char* b = v.data();
  const char* e = v.data() + v.size();
  const auto res = std::from_chars(b, e, out);
  if (res.ec != std::errc() || res.ptr != e || !std::isfinite(out)) {
    config_fail(line, "'" + key + "' expects a finite number, got '" + v + "'");
  }
  return out;
}

inline std::size_t parse_count(const std::string& v, std::size_t line, const std::string& key) {
  std::size_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    config_fail(line, "'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::string join_numbers(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

inline std::string one_of(const std::string& v, std::initializer_list<const char*> allowed, std::size_t line,
                          const std::string& key) {
  for (const char* a : allowed) {
    if (v == a) return v;
  }
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  config_fail(line, "'" + key + "' must be one of {" + list + "}, got '" + v + "'");
}

}  // namespace detail

/// Checks every module precondition that can be checked without running.
/// `lines` maps "section.key" to its source line for diagnostics.
inline void validate_config(const RunConfig& c, const std::map<std::string, std::size_t>& lines = {}) {
  const auto line_of = [&](const std::string& key) {
    const auto it = lines.find(key);
    return it == lines.end() ? std::size_t{0} : it->second;
  };
  const auto guard = [&](const std::string& key, const auto& fn) {
    try {
      fn();
    } catch (const Error& e) {
      const std::size_t l = line_of(key);
      if (l == 0) throw;
      const std::string what = e.what();
      const auto colon = what.find(": ");
      detail::config_fail(l, colon == std::string::npos ? what : what.substr(colon + 2), e.code());
    }
  };
  guard("params.eps0", [&] { (void)build_params(c.params); });
  const PhysicalParams params = build_params(c.params);
  if (c.profile.kind == "from-control") {
    if (c.profile.waveform.empty()) detail::config_fail(line_of("profile.kind"), "from-control needs 'waveform'");
  } else {
    const std::string key = c.profile.kind == "control-constant" ? "profile.omega0" : "profile.kind";
    guard(key, [&] { (void)build_profile(c.profile, params.eps0()); });
  }
  guard("soliton.convention", [&] { (void)build_convention(c.convention); });
  guard("grid.tau_min", [&] {
    require(c.grid.tau_min < c.grid.tau_max, ErrorCode::kInvalidParameter, "grid needs tau_min < tau_max");
    require(c.grid.zeta_max > 0.0, ErrorCode::kInvalidParameter, "grid needs zeta_max > 0");
  });
  const auto check_axis = [&](const std::optional<std::size_t>& n, const std::optional<std::size_t>& stride,
                              const std::string& nkey, const std::string& skey) {
    if (n && *n < 2) detail::config_fail(line_of(nkey), nkey + " must be at least 2", ErrorCode::kInvalidParameter);
    if (stride && *stride == 0) detail::config_fail(line_of(skey), skey + " must be positive");
    if (n && stride && (*n - 1) % *stride != 0) {
      detail::config_fail(line_of(skey), skey + " must divide " + nkey + " - 1", ErrorCode::kInvalidParameter);
    }
  };
  check_axis(c.grid.n_tau, c.grid.tau_stride, "grid.n_tau", "grid.tau_stride");
  check_axis(c.grid.n_zeta, c.grid.zeta_stride, "grid.n_zeta", "grid.zeta_stride");
  if (c.mode == RunMode::kConvergence && c.levels < 3) {
    detail::config_fail(line_of("convergence.levels"), "convergence needs at least 3 levels",
                        ErrorCode::kInvalidParameter);
  }
  if ((c.mode == RunMode::kVerify || c.mode == RunMode::kConvergence) && (!c.grid.n_tau || !c.grid.n_zeta)) {
    detail::config_fail(line_of("grid.n_tau"), std::string(mode_name(c.mode)) + " mode needs explicit grid counts");
  }
}

inline RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::map<std::string, std::size_t> lines;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') detail::config_fail(line_no, "malformed section header '" + line + "'");
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      static const std::set<std::string> known = {"params", "profile", "profile.piece", "grid", "soliton",
                                                   "simulate", "stopping", "convergence", "output"};
      if (!known.count(section)) detail::config_fail(line_no, "unknown section [" + section + "]");
      if (section == "profile.piece") c.profile.pieces.emplace_back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) detail::config_fail(line_no, "expected 'key = value', got '" + line + "'");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string val = detail::trim(std::string_view(line).substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;
    if (section != "profile.piece") {
      if (lines.count(full)) detail::config_fail(line_no, "duplicate key '" + full + "'");
      lines[full] = line_no;
    }
    const auto num = [&] { return detail::parse_number(val, line_no, full); };
    const auto count_or_auto = [&]() -> std::optional<std::size_t> {
      if (val == "auto") return std::nullopt;
      return detail::parse_count(val, line_no, full);
    };
    const auto unknown = [&] { detail::config_fail(line_no, "unknown key '" + full + "'"); };

    if (section.empty()) {
      if (key == "name") c.name = val;
      else if (key == "mode") {
        try {
          c.mode = parse_mode(val);
        } catch (const Error&) {
          detail::config_fail(line_no, "unknown mode '" + val + "'");
        }
      } else unknown();
    } else if (section == "params") {
      if (key == "nu0") c.params.nu0 = num();
      else if (key == "eps0") c.params.eps0 = num();
      else if (key == "gamma") c.params.gamma = num();
      else if (key == "delta") c.params.delta = num();
      else if (key == "k") c.params.k = val == "auto" ? std::nullopt : std::optional<double>(num());
      else unknown();
    } else if (section == "profile") {
      auto& p = c.profile;
      if (key == "kind") {
        p.kind = detail::one_of(val, {"constant", "exponential", "control-constant", "piecewise", "from-control"},
                                line_no, full);
      } else if (key == "alpha") p.alpha = num();
      else if (key == "m0") p.m0 = num();
      else if (key == "omega0") p.omega0 = num();
      else if (key == "branch") p.branch = detail::one_of(val, {"eit", "other"}, line_no, full);
      else if (key == "waveform") p.waveform = val;
      else if (key == "m_initial") p.m_initial = num();
      else if (key == "anchor_tau") p.anchor_tau = val == "none" ? std::nullopt : std::optional<double>(num());
      else unknown();
    } else if (section == "profile.piece") {
      auto& p = c.profile.pieces.back();
      if (key == "begin") p.begin = num();
      else if (key == "end") p.end = num();
      else if (key == "kind") p.kind = detail::one_of(val, {"constant", "exponential"}, line_no, full);
      else if (key == "alpha") p.alpha = num();
      else if (key == "m0") p.m0 = num();
      else unknown();
    } else if (section == "grid") {
      auto& g = c.grid;
      if (key == "tau_min") g.tau_min = num();
      else if (key == "tau_max") g.tau_max = num();
      else if (key == "zeta_max") g.zeta_max = num();
      else if (key == "n_tau") g.n_tau = count_or_auto();
      else if (key == "n_zeta") g.n_zeta = count_or_auto();
      else if (key == "tau_stride") g.tau_stride = count_or_auto();
      else if (key == "zeta_stride") g.zeta_stride = count_or_auto();
      else unknown();
    } else if (section == "soliton") {
      if (key == "phi0") c.phi0 = num();
      else if (key == "convention") c.convention = val;
      else unknown();
    } else if (section == "simulate") {
      if (key == "boundary") c.boundary = detail::one_of(val, {"soliton", "control"}, line_no, full);
      else if (key == "scheme") c.scheme = detail::one_of(val, {"heun", "euler"}, line_no, full);
      else unknown();
    } else if (section == "stopping") {
      if (key == "tau_start") c.stop_tau_start = num();
      else unknown();
    } else if (section == "convergence") {
      if (key == "levels") c.levels = detail::parse_count(val, line_no, full);
      else unknown();
    } else if (section == "output") {
      if (key == "dir") c.output.dir = val;
      else if (key == "formats") {
        c.output.formats.clear();
        for (const auto& f : detail::split_list(val)) {
          c.output.formats.push_back(detail::one_of(f, {"binary", "csv", "plot", "json", "text"}, line_no, full));
        }
      } else if (key == "slice_zeta" || key == "slice_tau") {
        std::vector<double> v;
        for (const auto& item : detail::split_list(val)) v.push_back(detail::parse_number(item, line_no, full));
        (key == "slice_zeta" ? c.output.slice_zeta : c.output.slice_tau) = std::move(v);
      } else unknown();
    }
  }
  validate_config(c, lines);
  return c;
}

/// Canonical text; parse_config(emit_config(c)) == c.
inline std::string emit_config(const RunConfig& c) {
  const auto opt_count = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : "auto"; };
  std::ostringstream os;
  os << "name = " << c.name << "\n";
  os << "mode = " << mode_name(c.mode) << "\n";
  os << "\n[params]\n";
  os << "nu0 = " << fmt(c.params.nu0) << "\neps0 = " << fmt(c.params.eps0) << "\ngamma = " << fmt(c.params.gamma)
     << "\ndelta = " << fmt(c.params.delta) << "\nk = " << (c.params.k ? fmt(*c.params.k) : "auto") << "\n";
  const auto& p = c.profile;
  os << "\n[profile]\n";
  os << "kind = " << p.kind << "\nalpha = " << fmt(p.alpha) << "\nm0 = " << fmt(p.m0) << "\nomega0 = " << fmt(p.omega0)
     << "\nbranch = " << p.branch << "\n";
  if (!p.waveform.empty()) os << "waveform = " << p.waveform << "\n";
  os << "m_initial = " << fmt(p.m_initial) << "\nanchor_tau = " << (p.anchor_tau ? fmt(*p.anchor_tau) : "none")
     << "\n";
  for (const auto& q : p.pieces) {
    os << "\n[profile.piece]\nbegin = " << fmt(q.begin) << "\nend = " << fmt(q.end) << "\nkind = " << q.kind
       << "\nalpha = " << fmt(q.alpha) << "\nm0 = " << fmt(q.m0) << "\n";
  }
  const auto& g = c.grid;
  os << "\n[grid]\n";
  os << "tau_min = " << fmt(g.tau_min) << "\ntau_max = " << fmt(g.tau_max) << "\nn_tau = " << opt_count(g.n_tau)
     << "\nzeta_max = " << fmt(g.zeta_max) << "\nn_zeta = " << opt_count(g.n_zeta)
     << "\ntau_stride = " << opt_count(g.tau_stride) << "\nzeta_stride = " << opt_count(g.zeta_stride) << "\n";
  os << "\n[soliton]\nphi0 = " << fmt(c.phi0) << "\nconvention = " << c.convention << "\n";
  os << "\n[simulate]\nboundary = " << c.boundary << "\nscheme = " << c.scheme << "\n";
  os << "\n[stopping]\ntau_start = " << fmt(c.stop_tau_start) << "\n";
  os << "\n[convergence]\nlevels = " << c.levels << "\n";
  os << "\n[output]\ndir = " << c.output.dir << "\nformats = ";
  for (std::size_t i = 0; i < c.output.formats.size(); ++i) os << (i ? ", " : "") << c.output.formats[i];
  os << "\nslice_zeta = " << detail::join_numbers(c.output.slice_zeta)
     << "\nslice_tau = " << detail::join_numbers(c.output.slice_tau) << "\n";
  return os.str();
}

/// Hash of the canonical form without the output directory; formatting,
/// comments and the destination do not change it.
inline std::string config_hash(RunConfig c) {
  c.output.dir.clear();
  return checksum(emit_config(c));
}

}  // namespace slowlight
