#pragma once

// Metric catalog: Minkowski, Schwarzschild, de Sitter (flat slicing) and
// spatially flat FRW with a(t) = t^q.  Signature (+,-,-,-).
//
// Every catalog metric is diagonal with components that are products of
// univariate factors, so all partials to order 3 are written out by hand per
// factor and assembled by the product rule.  Finite differences appear only in
// the oracle helpers at the bottom of this header.

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spin2/jet.hpp"

namespace spin2 {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

using ParamMap = std::map<std::string, double>;
using Interval = std::pair<double, double>;
using Region = std::array<Interval, kDim>;

/// Value and first three derivatives of a function of one coordinate.
using UnivariateDerivs = std::array<double, 4>;

/// One diagonal component g_{aa} = coeff * prod_k f_k(x^{c_k}).
struct SeparableComponent {
  struct Factor {
    int coord;
    std::function<UnivariateDerivs(double)> f;
  };
  double coeff = 1.0;
  std::vector<Factor> factors;
};

class MetricChart {
 public:
  virtual ~MetricChart() = default;

  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual std::array<std::string, kDim> coords() const = 0;
  [[nodiscard]] const ParamMap& params() const { return params_; }

  /// True for charts whose Riemann tensor vanishes identically.
  [[nodiscard]] virtual bool is_flat() const { return false; }
  /// True for charts whose Ricci tensor vanishes identically.
  [[nodiscard]] virtual bool is_ricci_flat() const { return is_flat(); }

  /// Throws DomainError naming the violated bound when `x` is outside the
  /// valid region (coordinate singularities and configured guards).
  virtual void check_point(const Point& x) const = 0;

  [[nodiscard]] bool in_valid_region(const Point& x) const {
    try {
      check_point(x);
      return true;
    } catch (const DomainError&) {
      return false;
    }
  }

  /// Default sampling box, contained in the valid region.
  [[nodiscard]] virtual Region default_region() const = 0;

  /// Metric components g_{ab} with exact partials up to `order` (at most 3).
  [[nodiscard]] Jet metric_jet(const Point& x, int order = kMaxJetOrder) const {
    check_point(x);
    return metric_jet_unchecked(x, order);
  }

  /// Plain metric components, row-major 4x4, no domain check.
  [[nodiscard]] std::array<double, 16> metric_values(const Point& x) const {
    const Jet g = metric_jet_unchecked(x, 0);
    std::array<double, 16> out{};
    for (int c = 0; c < 16; ++c) out[static_cast<std::size_t>(c)] = g.value(c);
    return out;
  }

 protected:
  explicit MetricChart(ParamMap params) : params_(std::move(params)) {}

  [[nodiscard]] virtual std::array<SeparableComponent, kDim> diagonal() const = 0;

  [[nodiscard]] Jet metric_jet_unchecked(const Point& x, int order) const {
    Jet g(2, order, x);
    const auto diag = diagonal();
    for (int a = 0; a < kDim; ++a) {
      const SeparableComponent& comp = diag[static_cast<std::size_t>(a)];
      std::array<UnivariateDerivs, kDim> fac_vals{};
      std::array<bool, kDim> has{};
      for (const auto& f : comp.factors) {
        fac_vals[static_cast<std::size_t>(f.coord)] = f.f(x[static_cast<std::size_t>(f.coord)]);
        has[static_cast<std::size_t>(f.coord)] = true;
      }
      const int c = a * kDim + a;
      for (int lv = 0; lv <= order; ++lv) {
        for (int d = 0; d < pow4(lv); ++d) {
          const MultiIndex dm = MultiIndex::decode(d, lv);
          std::array<int, kDim> count{};
          for (int i = 0; i < lv; ++i) ++count[static_cast<std::size_t>(dm[i])];
          double v = comp.coeff;
          for (int k = 0; k < kDim && v != 0.0; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            if (has[ku]) {
              v *= fac_vals[ku][static_cast<std::size_t>(count[ku])];
            } else if (count[ku] > 0) {
              v = 0.0;
            }
          }
          g(lv, c, d) = v;
        }
      }
    }
    return g;
  }

  [[nodiscard]] double param(const std::string& key) const { return params_.at(key); }

 private:
  ParamMap params_;
};

namespace detail {

inline ParamMap merge_params(const ParamMap& defaults, const ParamMap& given, std::string_view chart) {
  ParamMap out = defaults;
  for (const auto& [k, v] : given) {
    if (!defaults.contains(k)) {
      throw std::invalid_argument("metric '" + std::string(chart) + "': unknown parameter '" + k + "'");
    }
    if (!std::isfinite(v)) {
      throw std::invalid_argument("metric '" + std::string(chart) + "': parameter '" + k + "' is not finite");
    }
    out[k] = v;
  }
  return out;
}

inline UnivariateDerivs constant(double c) { return {c, 0.0, 0.0, 0.0}; }

}  // namespace detail

class Minkowski final : public MetricChart {
 public:
  explicit Minkowski(const ParamMap& p = {}) : MetricChart(detail::merge_params({}, p, "minkowski")) {}

  [[nodiscard]] std::string name() const override { return "minkowski"; }
  [[nodiscard]] std::array<std::string, kDim> coords() const override { return {"t", "x", "y", "z"}; }
  [[nodiscard]] bool is_flat() const override { return true; }
  void check_point(const Point& x) const override {
    for (double v : x) {
      if (!std::isfinite(v)) throw DomainError("minkowski: non-finite coordinate");
    }
  }
  [[nodiscard]] Region default_region() const override {
    return {Interval{-1.0, 1.0}, Interval{-1.0, 1.0}, Interval{-1.0, 1.0}, Interval{-1.0, 1.0}};
  }

 protected:
  [[nodiscard]] std::array<SeparableComponent, kDim> diagonal() const override {
    return {SeparableComponent{1.0, {}}, SeparableComponent{-1.0, {}}, SeparableComponent{-1.0, {}},
            SeparableComponent{-1.0, {}}};
  }
};

/// Schwarzschild exterior in Schwarzschild coordinates (t, r, theta, phi).
/// Parameters: M (mass), epsilon (horizon guard: r >= (2 + epsilon) M),
/// theta_min (polar guard: theta in [theta_min, pi - theta_min]).
class Schwarzschild final : public MetricChart {
 public:
  explicit Schwarzschild(const ParamMap& p = {})
      : MetricChart(detail::merge_params({{"M", 1.0}, {"epsilon", 0.5}, {"theta_min", 0.1}}, p,
                                         "schwarzschild")) {
    if (mass() <= 0.0) throw std::invalid_argument("metric 'schwarzschild': parameter 'M' must be > 0");
    if (param("epsilon") <= 0.0) {
      throw std::invalid_argument("metric 'schwarzschild': parameter 'epsilon' must be > 0");
    }
    const double tm = param("theta_min");
    if (tm <= 0.0 || tm >= std::numbers::pi / 2) {
      throw std::invalid_argument("metric 'schwarzschild': parameter 'theta_min' must be in (0, pi/2)");
    }
  }

  [[nodiscard]] double mass() const { return param("M"); }
  [[nodiscard]] double r_min() const { return (2.0 + param("epsilon")) * mass(); }

  [[nodiscard]] std::string name() const override { return "schwarzschild"; }
  [[nodiscard]] std::array<std::string, kDim> coords() const override { return {"t", "r", "theta", "phi"}; }
  [[nodiscard]] bool is_ricci_flat() const override { return true; }

  void check_point(const Point& x) const override {
    for (double v : x) {
      if (!std::isfinite(v)) throw DomainError("schwarzschild: non-finite coordinate");
    }
    if (x[1] < r_min()) {
      std::ostringstream os;
      os << "schwarzschild: r = " << x[1] << " violates r >= (2+epsilon)M = " << r_min();
      throw DomainError(os.str());
    }
    const double tm = param("theta_min");
    if (x[2] < tm || x[2] > std::numbers::pi - tm) {
      std::ostringstream os;
      os << "schwarzschild: theta = " << x[2] << " outside [" << tm << ", pi - " << tm << "]";
      throw DomainError(os.str());
    }
  }

  [[nodiscard]] Region default_region() const override {
    const double m = mass();
    return {Interval{0.0, 1.0}, Interval{3.0 * m, 10.0 * m}, Interval{0.5, std::numbers::pi - 0.5},
            Interval{0.0, 2.0 * std::numbers::pi}};
  }

 protected:
  [[nodiscard]] std::array<SeparableComponent, kDim> diagonal() const override {
    const double m = mass();
    // g_tt = 1 - 2M/r
    auto f = [m](double r) -> UnivariateDerivs {
      return {1.0 - 2.0 * m / r, 2.0 * m / (r * r), -4.0 * m / (r * r * r), 12.0 * m / (r * r * r * r)};
    };
    // g_rr = -r/(r-2M) = -1 - 2M/(r-2M)
    auto h = [m](double r) -> UnivariateDerivs {
      const double u = r - 2.0 * m;
      return {-r / u, 2.0 * m / (u * u), -4.0 * m / (u * u * u), 12.0 * m / (u * u * u * u)};
    };
    auto r2 = [](double r) -> UnivariateDerivs { return {r * r, 2.0 * r, 2.0, 0.0}; };
    auto sin2 = [](double th) -> UnivariateDerivs {
      const double s2 = std::sin(2.0 * th);
      const double c2 = std::cos(2.0 * th);
      return {0.5 * (1.0 - c2), s2, 2.0 * c2, -4.0 * s2};
    };
    return {SeparableComponent{1.0, {{1, f}}}, SeparableComponent{1.0, {{1, h}}},
            SeparableComponent{-1.0, {{1, r2}}}, SeparableComponent{-1.0, {{1, r2}, {2, sin2}}}};
  }
};

/// de Sitter in flat slicing: ds^2 = dt^2 - exp(2Ht) dx^2.  Parameter: H.
class DeSitter final : public MetricChart {
 public:
  explicit DeSitter(const ParamMap& p = {}) : MetricChart(detail::merge_params({{"H", 0.1}}, p, "de_sitter")) {
    if (hubble() <= 0.0) throw std::invalid_argument("metric 'de_sitter': parameter 'H' must be > 0");
  }

  [[nodiscard]] double hubble() const { return param("H"); }

  [[nodiscard]] std::string name() const override { return "de_sitter"; }
  [[nodiscard]] std::array<std::string, kDim> coords() const override { return {"t", "x", "y", "z"}; }
  void check_point(const Point& x) const override {
    for (double v : x) {
      if (!std::isfinite(v)) throw DomainError("de_sitter: non-finite coordinate");
    }
  }
  [[nodiscard]] Region default_region() const override {
    return {Interval{-1.0, 1.0}, Interval{-1.0, 1.0}, Interval{-1.0, 1.0}, Interval{-1.0, 1.0}};
  }

 protected:
  [[nodiscard]] std::array<SeparableComponent, kDim> diagonal() const override {
    const double k = 2.0 * hubble();
    auto e = [k](double t) -> UnivariateDerivs {
      const double v = std::exp(k * t);
      return {v, k * v, k * k * v, k * k * k * v};
    };
    return {SeparableComponent{1.0, {}}, SeparableComponent{-1.0, {{0, e}}}, SeparableComponent{-1.0, {{0, e}}},
            SeparableComponent{-1.0, {{0, e}}}};
  }
};

/// Spatially flat FRW with power-law scale factor a(t) = t^q.
/// Parameters: q (exponent), t_min (guard: t >= t_min).
class Frw final : public MetricChart {
 public:
  explicit Frw(const ParamMap& p = {})
      : MetricChart(detail::merge_params({{"q", 2.0 / 3.0}, {"t_min", 0.1}}, p, "frw")) {
    if (param("t_min") <= 0.0) throw std::invalid_argument("metric 'frw': parameter 't_min' must be > 0");
  }

  [[nodiscard]] double exponent() const { return param("q"); }

  [[nodiscard]] std::string name() const override { return "frw"; }
  [[nodiscard]] std::array<std::string, kDim> coords() const override { return {"t", "x", "y", "z"}; }
  void check_point(const Point& x) const override {
    for (double v : x) {
      if (!std::isfinite(v)) throw DomainError("frw: non-finite coordinate");
    }
    if (x[0] < param("t_min")) {
      std::ostringstream os;
      os << "frw: t = " << x[0] << " violates t >= t_min = " << param("t_min");
      throw DomainError(os.str());
    }
  }
  [[nodiscard]] Region default_region() const override {
    return {Interval{0.5, 2.0}, Interval{-1.0, 1.0}, Interval{-1.0, 1.0}, Interval{-1.0, 1.0}};
  }

 protected:
  [[nodiscard]] std::array<SeparableComponent, kDim> diagonal() const override {
    const double p = 2.0 * exponent();
    // a^2 = t^{2q}
    auto a2 = [p](double t) -> UnivariateDerivs {
      return {std::pow(t, p), p * std::pow(t, p - 1.0), p * (p - 1.0) * std::pow(t, p - 2.0),
              p * (p - 1.0) * (p - 2.0) * std::pow(t, p - 3.0)};
    };
    return {SeparableComponent{1.0, {}}, SeparableComponent{-1.0, {{0, a2}}}, SeparableComponent{-1.0, {{0, a2}}},
            SeparableComponent{-1.0, {{0, a2}}}};
  }
};

inline const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{"minkowski", "schwarzschild", "de_sitter", "frw"};
  return names;
}

/// Looks up a catalog metric by name; throws std::invalid_argument on an
/// unknown name or parameter.
inline std::unique_ptr<MetricChart> make_chart(const std::string& name, const ParamMap& params = {}) {
  if (name == "minkowski") return std::make_unique<Minkowski>(params);
  if (name == "schwarzschild") return std::make_unique<Schwarzschild>(params);
  if (name == "de_sitter") return std::make_unique<DeSitter>(params);
  if (name == "frw") return std::make_unique<Frw>(params);
  throw std::invalid_argument("unknown metric '" + name + "'");
}

}  // namespace spin2
