#pragma once

// Modulation function m(tau), its phase integral F(tau) = int_0^tau ds/(m^2+1),
// the control field it induces, and the inverse (Riccati) problem of
// recovering m from a prescribed control waveform.

#include <charconv>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "slowlight/error.hpp"
#include "slowlight/numerics.hpp"

namespace slowlight {

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const { return x >= lo && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct ModulationValue {
  double m;
  double dm;  // d m / d tau
};

// ---------------------------------------------------------------------------
// Control waveform: uniformly sampled real Omega(tau).

class ControlWaveform {
 public:
  ControlWaveform(std::vector<double> tau, std::vector<double> omega) : tau_(std::move(tau)), omega_(std::move(omega)) {
    require(tau_.size() == omega_.size(), ErrorCode::kInvalidParameter, "waveform: tau/omega length mismatch");
    require(tau_.size() >= 4, ErrorCode::kInvalidParameter, "waveform: need at least 4 samples");
    for (std::size_t i = 0; i < tau_.size(); ++i) {
      require(std::isfinite(tau_[i]) && std::isfinite(omega_[i]), ErrorCode::kInvalidParameter,
              "waveform: non-finite sample at row " + std::to_string(i));
    }
    spacing_ = (tau_.back() - tau_.front()) / static_cast<double>(tau_.size() - 1);
    require(spacing_ > 0.0, ErrorCode::kInvalidParameter, "waveform: spacing must be positive");
    for (std::size_t i = 1; i < tau_.size(); ++i) {
      const double d = tau_[i] - tau_[i - 1];
      require(std::abs(d - spacing_) <= 1e-9 * spacing_ + 1e-12 * std::abs(tau_[i]), ErrorCode::kInvalidParameter,
              "waveform: non-uniform spacing at row " + std::to_string(i));
    }
  }

  /// Samples f on n uniform points of [tau0, tau1].
  template <class F>
  static ControlWaveform sample(const F& f, double tau0, double tau1, std::size_t n) {
    require(n >= 4 && tau1 > tau0, ErrorCode::kInvalidParameter, "waveform: bad sampling window");
    std::vector<double> t(n);
    std::vector<double> w(n);
    const double h = (tau1 - tau0) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = (i + 1 == n) ? tau1 : tau0 + static_cast<double>(i) * h;
      w[i] = f(t[i]);
    }
    return {std::move(t), std::move(w)};
  }

  std::size_t size() const { return tau_.size(); }
  double spacing() const { return spacing_; }
  double tau(std::size_t i) const { return tau_[i]; }
  double omega(std::size_t i) const { return omega_[i]; }
  const std::vector<double>& taus() const { return tau_; }
  const std::vector<double>& omegas() const { return omega_; }
  Interval domain() const { return {tau_.front(), tau_.back()}; }

  double omega_at(double t) const {
    return cubic_at<double>(omega_, (t - tau_.front()) / spacing_);
  }

  std::string to_csv() const {
    std::string out = "tau,omega\n";
    char buf[64];
    for (std::size_t i = 0; i < tau_.size(); ++i) {
      auto r = std::to_chars(buf, buf + sizeof buf, tau_[i]);
      out.append(buf, r.ptr);
      out.push_back(',');
      r = std::to_chars(buf, buf + sizeof buf, omega_[i]);
      out.append(buf, r.ptr);
      out.push_back('\n');
    }
    return out;
  }

  static ControlWaveform from_csv(std::string_view text) {
    std::vector<double> t;
    std::vector<double> w;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
      const auto nl = text.find('\n');
      std::string_view line = text.substr(0, nl);
      text = (nl == std::string_view::npos) ? std::string_view{} : text.substr(nl + 1);
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;
      if (!header_seen) {
        require(line == "tau,omega", ErrorCode::kIo, "waveform csv: expected header 'tau,omega'");
        header_seen = true;
        continue;
      }
      const auto comma = line.find(',');
      require(comma != std::string_view::npos, ErrorCode::kIo,
              "waveform csv line " + std::to_string(line_no) + ": expected two columns");
      double a = 0.0;
      double b = 0.0;
      const auto pa = std::from_chars(line.data(), line.data() + comma, a);
      const auto pb = std::from_chars(line.data() + comma + 1, line.data() + line.size(), b);
      require(pa.ec == std::errc{} && pa.ptr == line.data() + comma && pb.ec == std::errc{} &&
                  pb.ptr == line.data() + line.size(),
              ErrorCode::kIo, "waveform csv line " + std::to_string(line_no) + ": malformed number");
      t.push_back(a);
      w.push_back(b);
    }
    require(header_seen, ErrorCode::kIo, "waveform csv: missing header");
    return {std::move(t), std::move(w)};
  }

  friend bool operator==(const ControlWaveform&, const ControlWaveform&) = default;

 private:
  std::vector<double> tau_;
  std::vector<double> omega_;
  double spacing_ = 0.0;
};

// ---------------------------------------------------------------------------
// Modulation laws.

struct ConstantLaw {
  double m0;
  friend bool operator==(const ConstantLaw&, const ConstantLaw&) = default;
};

/// m(tau) = exp(alpha tau), alpha > 0.
struct ExponentialLaw {
  double alpha;
  friend bool operator==(const ExponentialLaw&, const ExponentialLaw&) = default;
};

/// m recovered from a control waveform: node values from the Riccati march,
/// cubic Hermite in between.
class SampledLaw {
 public:
  struct Data {
    ControlWaveform waveform;
    double eps0;
    double m_anchor;
    std::size_t anchor_index;
    std::vector<double> m;
    std::vector<double> dm;
    std::vector<double> cumulative;  // int_{tau_0}^{tau_i} ds/(m^2+1)
  };

  explicit SampledLaw(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

  const Data& data() const { return *data_; }
  Interval domain() const { return data_->waveform.domain(); }

  ModulationValue eval(double t) const {
    const auto& d = *data_;
    const std::size_t i = segment(t);
    const double h = d.waveform.spacing();
    const auto hv = hermite(d.waveform.tau(i), h, d.m[i], d.dm[i], d.m[i + 1], d.dm[i + 1], t);
    return {hv.value, hv.derivative};
  }

  /// int_{tau_0}^{t} ds/(m^2+1)
  double cumulative(double t) const {
    const auto& d = *data_;
    const std::size_t i = segment(t);
    const double t0 = d.waveform.tau(i);
    if (t == t0) return d.cumulative[i];
    return d.cumulative[i] + integrate([this](double s) { return inv_one_plus_sq(eval(s).m); }, t0, t);
  }

  friend bool operator==(const SampledLaw& a, const SampledLaw& b) {
    return a.data_ == b.data_ ||
           (a.data_->waveform == b.data_->waveform && a.data_->eps0 == b.data_->eps0 &&
            a.data_->m_anchor == b.data_->m_anchor && a.data_->anchor_index == b.data_->anchor_index);
  }

 private:
  std::size_t segment(double t) const {
    const auto& w = data_->waveform;
    const double x = (t - w.tau(0)) / w.spacing();
    auto i = static_cast<long>(std::floor(x));
    i = std::max(0L, std::min(i, static_cast<long>(w.size()) - 2));
    return static_cast<std::size_t>(i);
  }

  std::shared_ptr<const Data> data_;
};

using PieceLaw = std::variant<ConstantLaw, ExponentialLaw, SampledLaw>;

struct Piece {
  double begin;
  double end;
  PieceLaw law;
  friend bool operator==(const Piece&, const Piece&) = default;
};

struct PiecewiseLaw {
  std::vector<Piece> pieces;
  friend bool operator==(const PiecewiseLaw&, const PiecewiseLaw&) = default;
};

namespace detail {

inline ModulationValue eval_law(const ConstantLaw& c, double) { return {c.m0, 0.0}; }
inline ModulationValue eval_law(const ExponentialLaw& e, double t) {
  const double m = std::exp(e.alpha * t);
  return {m, e.alpha * m};
}
inline ModulationValue eval_law(const SampledLaw& s, double t) { return s.eval(t); }

inline Interval law_domain(const ConstantLaw&) { return {}; }
inline Interval law_domain(const ExponentialLaw&) { return {}; }
inline Interval law_domain(const SampledLaw& s) { return s.domain(); }

/// Antiderivative of 1/(e^{2 alpha s} + 1), zero at s = 0.
inline double exponential_phase(double alpha, double t) {
  return t - (softplus(2.0 * alpha * t) - std::log(2.0)) / (2.0 * alpha);
}

inline double law_integral(const ConstantLaw& c, double a, double b) { return (b - a) / (c.m0 * c.m0 + 1.0); }
inline double law_integral(const ExponentialLaw& e, double a, double b) {
  return exponential_phase(e.alpha, b) - exponential_phase(e.alpha, a);
}
inline double law_integral(const SampledLaw& s, double a, double b) { return s.cumulative(b) - s.cumulative(a); }

inline double piece_integral(const PieceLaw& law, double a, double b) {
  return std::visit([&](const auto& l) { return law_integral(l, a, b); }, law);
}
inline ModulationValue piece_eval(const PieceLaw& law, double t) {
  return std::visit([&](const auto& l) { return eval_law(l, t); }, law);
}

}  // namespace detail

class ModulationProfile {
 public:
  using Law = std::variant<ConstantLaw, ExponentialLaw, PiecewiseLaw, SampledLaw>;

  static ModulationProfile constant(double m0) {
    require(std::isfinite(m0), ErrorCode::kInvalidParameter, "constant modulation needs finite m0");
    return ModulationProfile(ConstantLaw{m0});
  }

  static ModulationProfile exponential(double alpha) {
    require(std::isfinite(alpha) && alpha > 0.0, ErrorCode::kInvalidParameter, "exponential modulation needs alpha > 0");
    return ModulationProfile(ExponentialLaw{alpha});
  }

  /// Pieces must tile a contiguous interval and join with equal m (C0). A
  /// jump in dm/dtau is allowed; it shows up as a jump in the control field.
  static ModulationProfile piecewise(std::vector<Piece> pieces) {
    require(!pieces.empty(), ErrorCode::kInvalidParameter, "piecewise modulation needs at least one piece");
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const Piece& p = pieces[i];
      require(p.begin < p.end, ErrorCode::kInvalidParameter, "piece " + std::to_string(i) + " has begin >= end");
      const Interval d = std::visit([](const auto& l) { return detail::law_domain(l); }, p.law);
      require(d.lo <= p.begin && d.hi >= p.end, ErrorCode::kInvalidParameter,
              "piece " + std::to_string(i) + " extends beyond its law's domain");
      if (i + 1 < pieces.size()) {
        const Piece& q = pieces[i + 1];
        require(p.end == q.begin, ErrorCode::kInvalidParameter,
                "pieces " + std::to_string(i) + " and " + std::to_string(i + 1) + " are not contiguous");
        const double ml = detail::piece_eval(p.law, p.end).m;
        const double mr = detail::piece_eval(q.law, q.begin).m;
        require(std::abs(ml - mr) <= 1e-9 * std::max({1.0, std::abs(ml), std::abs(mr)}), ErrorCode::kInvalidParameter,
                "modulation is discontinuous at tau = " + std::to_string(p.end));
      }
    }
    return ModulationProfile(PiecewiseLaw{std::move(pieces)});
  }

  static ModulationProfile sampled(SampledLaw law) { return ModulationProfile(std::move(law)); }

  const Law& law() const { return law_; }

  Interval domain() const {
    return std::visit(
        [](const auto& l) -> Interval {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, PiecewiseLaw>) {
            return {l.pieces.front().begin, l.pieces.back().end};
          } else {
            return detail::law_domain(l);
          }
        },
        law_);
  }

  /// Lower limit of the phase integral: 0 when inside the domain, otherwise
  /// the lower domain bound.
  double phase_anchor() const {
    const Interval d = domain();
    return d.contains(0.0) ? 0.0 : d.lo;
  }

  std::string kind() const {
    switch (law_.index()) {
      case 0: return "constant";
      case 1: return "exponential";
      case 2: return "piecewise";
      default: return "from-control";
    }
  }

  friend bool operator==(const ModulationProfile&, const ModulationProfile&) = default;

 private:
  explicit ModulationProfile(Law law) : law_(std::move(law)) {}
  Law law_;
};

inline void require_in_domain(const ModulationProfile& p, double tau) {
  const Interval d = p.domain();
  if (!(d.contains(tau))) {
    std::ostringstream msg;
    msg << "tau = " << tau << " outside modulation domain [" << d.lo << ", " << d.hi << "]";
    fail(ErrorCode::kDomain, msg.str());
  }
}

/// m(tau) and dm/dtau.
inline ModulationValue m_eval(const ModulationProfile& profile, double tau) {
  require_in_domain(profile, tau);
  return std::visit(
      [tau](const auto& l) -> ModulationValue {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, PiecewiseLaw>) {
          const auto& ps = l.pieces;
          for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
            if (tau < ps[i].end) return detail::piece_eval(ps[i].law, tau);
          }
          return detail::piece_eval(ps.back().law, tau);
        } else {
          return detail::eval_law(l, tau);
        }
      },
      profile.law());
}

/// F(tau) = int_{anchor}^{tau} ds / (m(s)^2 + 1), anchor = 0 when 0 lies in
/// the domain. Closed form for constant and exponential laws.
inline double phase_integral(const ModulationProfile& profile, double tau) {
  require_in_domain(profile, tau);
  const double anchor = profile.phase_anchor();
  if (tau == anchor) return 0.0;
  return std::visit(
      [&](const auto& l) -> double {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, PiecewiseLaw>) {
          const double lo = std::min(anchor, tau);
          const double hi = std::max(anchor, tau);
          double sum = 0.0;
          for (const Piece& p : l.pieces) {
            const double a = std::max(lo, p.begin);
            const double b = std::min(hi, p.end);
            if (a < b) sum += detail::piece_integral(p.law, a, b);
          }
          return tau >= anchor ? sum : -sum;
        } else {
          return detail::law_integral(l, anchor, tau);
        }
      },
      profile.law());
}

/// Control field carried by the modulation: (dm/2 - 2 eps0 m) / (m^2 + 1).
inline double control_field(const ModulationProfile& profile, double eps0, double tau) {
  const ModulationValue v = m_eval(profile, tau);
  if (std::abs(v.m) > 1.0) {
    return (0.5 * (v.dm / v.m) - 2.0 * eps0) * m_over_one_plus_sq(v.m);
  }
  return (0.5 * v.dm - 2.0 * eps0 * v.m) * inv_one_plus_sq(v.m);
}

struct RiccatiRoots {
  double eit;    // |m| >= 1; reproduces the linear-theory group velocity
  double other;  // |m| <= 1
  bool degenerate = false;
};

/// Constant m producing a constant control omega0: roots of
/// omega0 m^2 + 2 eps0 m + omega0 = 0.
inline RiccatiRoots riccati_match_constant(double omega0, double eps0) {
  require(std::isfinite(omega0) && std::isfinite(eps0) && eps0 != 0.0, ErrorCode::kInvalidParameter,
          "riccati_match_constant needs finite omega0 and nonzero eps0");
  if (omega0 == 0.0) {
    // Only m = 0 survives; the EIT branch has escaped to infinity.
    return {std::copysign(std::numeric_limits<double>::infinity(), -eps0), 0.0, true};
  }
  if (std::abs(omega0) > std::abs(eps0)) {
    std::ostringstream msg;
    msg << "|omega0| = " << std::abs(omega0) << " exceeds |eps0| = " << std::abs(eps0)
        << "; no constant-background soliton exists";
    fail(ErrorCode::kNoRealRoot, msg.str());
  }
  const double disc = std::sqrt(std::max(0.0, eps0 * eps0 - omega0 * omega0));
  const double q = -(eps0 + std::copysign(disc, eps0));
  return {q / omega0, omega0 / q, false};
}

namespace detail {

inline double riccati_rhs(double omega, double eps0, double m) { return 2.0 * omega * (m * m + 1.0) + 4.0 * eps0 * m; }

}  // namespace detail

/// Recovers m from a sampled control by a classic RK4 march of
/// m' = 2 Omega (m^2 + 1) + 4 eps0 m over the waveform lattice. The
/// condition m = m_initial is imposed at the first sample, or at the sample
/// `anchor_tau` when given (the march then runs both ways).
inline ModulationProfile profile_from_control(const ControlWaveform& waveform, double m_initial, double eps0,
                                              std::optional<double> anchor_tau = std::nullopt) {
  require(std::isfinite(m_initial) && std::isfinite(eps0), ErrorCode::kInvalidParameter,
          "profile_from_control needs finite m_initial and eps0");
  const std::size_t n = waveform.size();
  const double h = waveform.spacing();
  std::size_t anchor = 0;
  if (anchor_tau) {
    const double x = (*anchor_tau - waveform.tau(0)) / h;
    const double xr = std::round(x);
    require(xr >= 0.0 && xr <= static_cast<double>(n - 1) && std::abs(x - xr) < 1e-6, ErrorCode::kDomain,
            "anchor tau must coincide with a waveform sample");
    anchor = static_cast<std::size_t>(xr);
  }

  const std::span<const double> om(waveform.omegas());
  std::vector<double> mid(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) mid[i] = cubic_midpoint(om, i);

  std::vector<double> m(n);
  m[anchor] = m_initial;
  const auto escape = [&](std::size_t i) {
    if (!(std::abs(m[i]) <= 1e12)) {
      std::ostringstream msg;
      msg << "Riccati march escaped (|m| > 1e12) at tau = " << waveform.tau(i);
      fail(ErrorCode::kFiniteEscape, msg.str());
    }
  };
  // forward
  for (std::size_t i = anchor; i + 1 < n; ++i) {
    const double y = m[i];
    const double k1 = detail::riccati_rhs(om[i], eps0, y);
    const double k2 = detail::riccati_rhs(mid[i], eps0, y + 0.5 * h * k1);
    const double k3 = detail::riccati_rhs(mid[i], eps0, y + 0.5 * h * k2);
    const double k4 = detail::riccati_rhs(om[i + 1], eps0, y + h * k3);
    m[i + 1] = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    escape(i + 1);
  }
  // backward
  for (std::size_t i = anchor; i > 0; --i) {
    const double y = m[i];
    const double k1 = detail::riccati_rhs(om[i], eps0, y);
    const double k2 = detail::riccati_rhs(mid[i - 1], eps0, y - 0.5 * h * k1);
    const double k3 = detail::riccati_rhs(mid[i - 1], eps0, y - 0.5 * h * k2);
    const double k4 = detail::riccati_rhs(om[i - 1], eps0, y - h * k3);
    m[i - 1] = y - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    escape(i - 1);
  }

  auto data = std::make_shared<SampledLaw::Data>(
      SampledLaw::Data{waveform, eps0, m_initial, anchor, std::move(m), std::vector<double>(n), std::vector<double>(n)});
  for (std::size_t i = 0; i < n; ++i) data->dm[i] = detail::riccati_rhs(om[i], eps0, data->m[i]);
  SampledLaw law(data);
  // Node-to-node integrals of 1/(m^2+1) over the Hermite interpolant.
  data->cumulative[0] = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = waveform.tau(i);
    const double b = waveform.tau(i + 1);
    data->cumulative[i + 1] =
        data->cumulative[i] + integrate([&law](double s) { return inv_one_plus_sq(law.eval(s).m); }, a, b);
  }
  return ModulationProfile::sampled(std::move(law));
}

}  // namespace slowlight
