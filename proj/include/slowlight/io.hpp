#pragma once

// Artifact encoding: binary grids, manifests with checksums, slice CSVs,
// plot tables and key=value / JSON reports. Every encoder is a pure function
// of its inputs, so identical runs give byte-identical files.

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "slowlight/error.hpp"
#include "slowlight/lattice.hpp"
#include "slowlight/params.hpp"
#include "slowlight/residuals.hpp"
#include "slowlight/solver.hpp"
#include "slowlight/trajectory.hpp"

namespace slowlight {

inline constexpr const char* kCodeVersion = "slowlight 1.0.0";
inline constexpr const char* kGridFormat = "slowlight-grid 1";

/// Shortest decimal text that parses back to the same double.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

inline std::string checksum(std::string_view bytes) { return "fnv1a64:" + hex64(fnv1a64(bytes)); }

namespace detail {

inline void put_le64(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xff));
    bits >>= 8;
  }
}

inline double get_le64(std::string_view in, std::size_t pos) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)]);
  return std::bit_cast<double>(bits);
}

}  // namespace detail

/// Row-major (zeta outer, tau inner) complex128, little-endian (re, im).
inline std::string encode_grid(const Field2D<cplx>& f) {
  std::string out;
  out.reserve(f.size() * 16);
  for (const cplx& z : f.data()) {
    detail::put_le64(out, z.real());
    detail::put_le64(out, z.imag());
  }
  return out;
}

inline Field2D<cplx> decode_grid(std::string_view bytes, std::size_t n_zeta, std::size_t n_tau) {
  require(bytes.size() == n_zeta * n_tau * 16, ErrorCode::kIo, "grid file size does not match its dimensions");
  Field2D<cplx> f(n_zeta, n_tau);
  auto data = f.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = {detail::get_le64(bytes, 16 * i), detail::get_le64(bytes, 16 * i + 8)};
  }
  return f;
}

/// Named file contents, written only once everything has been produced.
class ArtifactSet {
 public:
  void add(const std::string& name, std::string content) { files_[name] = std::move(content); }
  const std::map<std::string, std::string>& files() const { return files_; }
  bool contains(const std::string& name) const { return files_.count(name) != 0; }
  const std::string& at(const std::string& name) const { return files_.at(name); }

  void write_to(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::kIo, "cannot create output directory " + dir.string() + ": " + ec.message());
    for (const auto& [name, content] : files_) {
      const auto path = dir / name;
      std::ofstream os(path, std::ios::binary | std::ios::trunc);
      os.write(content.data(), static_cast<std::streamsize>(content.size()));
      if (!os) fail(ErrorCode::kIo, "cannot write " + path.string());
    }
  }

 private:
  std::map<std::string, std::string> files_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

/// Ordered key = value lines.
class KeyValueText {
 public:
  KeyValueText& add(const std::string& key, const std::string& value) {
    text_ += key + " = " + value + "\n";
    return *this;
  }
  KeyValueText& add(const std::string& key, double value) { return add(key, fmt(value)); }
  KeyValueText& add_int(const std::string& key, long long value) { return add(key, std::to_string(value)); }
  KeyValueText& add_bool(const std::string& key, bool value) { return add(key, std::string(value ? "true" : "false")); }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

inline void add_params(KeyValueText& kv, const PhysicalParams& p) {
  kv.add("nu0", p.nu0()).add("eps0", p.eps0()).add("gamma", p.gamma()).add("k", p.k()).add("delta", p.delta());
  kv.add_bool("k_overridden", p.k_overridden());
}

inline void add_grid(KeyValueText& kv, const SimulationGrid& g) {
  kv.add_int("n_zeta", static_cast<long long>(g.n_zeta())).add_int("n_tau", static_cast<long long>(g.n_tau()));
  kv.add("tau_min", g.tau_min()).add("tau_max", g.tau_max()).add("zeta_max", g.zeta_max());
  kv.add("h_tau", g.h_tau()).add("h_zeta", g.h_zeta());
}

/// The five grids as binary files.
inline void add_grid_files(ArtifactSet& out, const SolutionGrids& g) {
  out.add("omega_a.bin", encode_grid(g.omega_a));
  out.add("omega_b.bin", encode_grid(g.omega_b));
  out.add("psi1.bin", encode_grid(g.psi1));
  out.add("psi2.bin", encode_grid(g.psi2));
  out.add("psi3.bin", encode_grid(g.psi3));
}

/// Manifest over every file already in the set (added last, as MANIFEST).
inline void add_manifest(ArtifactSet& out, const std::string& config_hash, const std::string& convention,
                         const PhysicalParams& params, const SimulationGrid* grid) {
  KeyValueText kv;
  kv.add("format", std::string(kGridFormat));
  kv.add("code_version", std::string(kCodeVersion));
  kv.add("scheme", std::string(kSchemeVersion));
  kv.add("config_hash", config_hash);
  kv.add("convention", convention);
  kv.add("layout", std::string("row-major zeta-outer tau-inner; complex128 little-endian (re, im)"));
  add_params(kv, params);
  if (grid) add_grid(kv, *grid);
  for (const auto& [name, content] : out.files()) {
    kv.add("file " + name, checksum(content) + " bytes=" + std::to_string(content.size()));
  }
  out.add("MANIFEST", kv.str());
}

inline const char* kSliceHeader =
    "tau,zeta,omega_a_re,omega_a_im,omega_b_re,omega_b_im,psi1_re,psi1_im,psi2_re,psi2_im,psi3_re,psi3_im\n";

namespace detail {

inline void slice_row(std::string& s, const SolutionGrids& g, std::size_t iz, std::size_t it) {
  const cplx v[5] = {g.omega_a(iz, it), g.omega_b(iz, it), g.psi1(iz, it), g.psi2(iz, it), g.psi3(iz, it)};
  s += fmt(g.grid.tau(it));
  s += ',';
  s += fmt(g.grid.zeta(iz));
  for (const cplx& z : v) {
    s += ',';
    s += fmt(z.real());
    s += ',';
    s += fmt(z.imag());
  }
  s += '\n';
}

}  // namespace detail

/// All tau samples at one zeta row.
inline std::string slice_at_zeta_csv(const SolutionGrids& g, std::size_t iz) {
  std::string s = kSliceHeader;
  for (std::size_t it = 0; it < g.grid.n_tau(); ++it) detail::slice_row(s, g, iz, it);
  return s;
}

/// All zeta samples at one tau column.
inline std::string slice_at_tau_csv(const SolutionGrids& g, std::size_t it) {
  std::string s = kSliceHeader;
  for (std::size_t iz = 0; iz < g.grid.n_zeta(); ++iz) detail::slice_row(s, g, iz, it);
  return s;
}

inline std::size_t nearest_zeta_index(const SimulationGrid& grid, double zeta) {
  const double x = std::clamp(std::round(zeta / grid.h_zeta()), 0.0, static_cast<double>(grid.n_zeta() - 1));
  return static_cast<std::size_t>(x);
}

/// "zeta tau |Omega_a|" rows, blank line between zeta rows.
inline std::string heatmap_table(const SolutionGrids& g) {
  std::string s = "# zeta tau abs_omega_a\n";
  for (std::size_t iz = 0; iz < g.grid.n_zeta(); ++iz) {
    for (std::size_t it = 0; it < g.grid.n_tau(); ++it) {
      s += fmt(g.grid.zeta(iz)) + ' ' + fmt(g.grid.tau(it)) + ' ' + fmt(std::abs(g.omega_a(iz, it))) + '\n';
    }
    s += '\n';
  }
  return s;
}

inline std::string trajectory_table(const TrajectoryEstimate& t) {
  std::string s = "# tau zeta_c velocity\n";
  for (std::size_t i = 0; i < t.tau.size(); ++i) {
    if (!t.interior[i]) continue;
    s += fmt(t.tau[i]) + ' ' + fmt(t.center[i]) + ' ' + fmt(t.velocity[i]) + '\n';
  }
  return s;
}

inline std::string control_table(const std::vector<double>& tau, const std::vector<double>& omega) {
  std::string s = "# tau omega\n";
  for (std::size_t i = 0; i < tau.size(); ++i) s += fmt(tau[i]) + ' ' + fmt(omega[i]) + '\n';
  return s;
}

inline std::string diagnostics_csv(const SolutionGrids& g) {
  std::string s = "zeta,norm_deviation,norm_increase,field_imag,field_peak\n";
  for (const auto& d : g.diagnostics) {
    s += fmt(d.zeta) + ',' + fmt(d.norm_deviation) + ',' + fmt(d.norm_increase) + ',' + fmt(d.field_imag) + ',' +
         fmt(d.field_peak) + '\n';
  }
  return s;
}

inline void add_residuals(KeyValueText& kv, const std::string& prefix, const std::vector<ResidualEntry>& entries) {
  for (const auto& e : entries) {
    const std::string base = prefix + equation_name(e.id);
    kv.add(base + ".max", e.max_abs).add(base + ".l2", e.l2);
  }
}

}  // namespace slowlight
