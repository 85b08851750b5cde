#pragma once

// Gauge generators: covector fields L_a(x) with exact partials to order 3.
//
// Each component is a polynomial in the shifted coordinates (x - center);
// the optional trigonometric family multiplies every component by
// sin or cos of a linear form.  Both factors differentiate in closed form.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "spin2/jet.hpp"

namespace spin2 {

enum class GeneratorFamily { polynomial, polynomial_trig };

inline std::string to_string(GeneratorFamily f) {
  return f == GeneratorFamily::polynomial ? "polynomial" : "polynomial_trig";
}

inline GeneratorFamily parse_family(const std::string& s) {
  if (s == "polynomial") return GeneratorFamily::polynomial;
  if (s == "polynomial_trig" || s == "polynomial*trig" || s == "polynomial_x_trig") {
    return GeneratorFamily::polynomial_trig;
  }
  throw std::invalid_argument("unknown generator family '" + s + "'");
}

struct Monomial {
  double coeff = 0.0;
  std::array<int, kDim> exponents{};
};

/// sin or cos of (wave . (x - center) + phase).
struct TrigFactor {
  bool cosine = false;
  std::array<double, kDim> wave{};
  double phase = 0.0;
};

class GaugeGenerator {
 public:
  using Polynomial = std::vector<Monomial>;

  GaugeGenerator() = default;

  GaugeGenerator(std::array<Polynomial, kDim> components, const Point& center = {},
                 std::optional<TrigFactor> trig = std::nullopt)
      : components_(std::move(components)), center_(center), trig_(trig) {
    for (const auto& poly : components_) {
      for (const Monomial& m : poly) {
        degree_ = std::max(degree_, m.exponents[0] + m.exponents[1] + m.exponents[2] + m.exponents[3]);
      }
    }
  }

  /// Coefficients uniform in [-1, 1] for every monomial of total degree
  /// <= `degree` in every component; deterministic in `seed`.
  static GaugeGenerator random(std::uint64_t seed, int degree, GeneratorFamily family, const Point& center) {
    if (degree < 0 || degree > 4) throw std::invalid_argument("generator degree must be in [0, 4]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::array<Polynomial, kDim> comps;
    for (auto& poly : comps) {
      for (int e0 = 0; e0 <= degree; ++e0) {
        for (int e1 = 0; e0 + e1 <= degree; ++e1) {
          for (int e2 = 0; e0 + e1 + e2 <= degree; ++e2) {
            for (int e3 = 0; e0 + e1 + e2 + e3 <= degree; ++e3) {
              poly.push_back({coef(rng), {e0, e1, e2, e3}});
            }
          }
        }
      }
    }
    std::optional<TrigFactor> trig;
    if (family == GeneratorFamily::polynomial_trig) {
      TrigFactor t;
      for (double& k : t.wave) k = coef(rng);
      t.phase = std::numbers::pi * (coef(rng) + 1.0);
      t.cosine = coef(rng) > 0.0;
      trig = t;
    }
    GaugeGenerator g(std::move(comps), center, trig);
    g.seed_ = seed;
    return g;
  }

  [[nodiscard]] GeneratorFamily family() const {
    return trig_ ? GeneratorFamily::polynomial_trig : GeneratorFamily::polynomial;
  }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] const Point& center() const { return center_; }
  [[nodiscard]] const std::array<Polynomial, kDim>& components() const { return components_; }

  /// L_a and its partials up to `order` at x (a rank-1 jet).
  [[nodiscard]] Jet partials(const Point& x, int order = kMaxJetOrder) const {
    Jet poly(1, order, x);
    for (int a = 0; a < kDim; ++a) {
      for (int lv = 0; lv <= order; ++lv) {
        for (int d = 0; d < pow4(lv); ++d) {
          poly(lv, a, d) = polynomial_partial(components_[static_cast<std::size_t>(a)], x, MultiIndex::decode(d, lv));
        }
      }
    }
    if (!trig_) return poly;
    return outer(trig_jet(x, order), poly);
  }

 private:
  [[nodiscard]] double polynomial_partial(const Polynomial& p, const Point& x, const MultiIndex& d) const {
    std::array<int, kDim> count{};
    for (int i = 0; i < d.size; ++i) ++count[static_cast<std::size_t>(d[i])];
    double sum = 0.0;
    for (const Monomial& m : p) {
      double v = m.coeff;
      for (int c = 0; c < kDim && v != 0.0; ++c) {
        const auto cu = static_cast<std::size_t>(c);
        const int e = m.exponents[cu];
        const int n = count[cu];
        if (n > e) {
          v = 0.0;
          break;
        }
        for (int k = 0; k < n; ++k) v *= static_cast<double>(e - k);
        const double dx = x[cu] - center_[cu];
        for (int k = 0; k < e - n; ++k) v *= dx;
      }
      sum += v;
    }
    return sum;
  }

  [[nodiscard]] Jet trig_jet(const Point& x, int order) const {
    const TrigFactor& t = *trig_;
    double u = t.phase;
    for (int c = 0; c < kDim; ++c) {
      u += t.wave[static_cast<std::size_t>(c)] * (x[static_cast<std::size_t>(c)] - center_[static_cast<std::size_t>(c)]);
    }
    // n-th derivative of sin: sin, cos, -sin, -cos; cos is shifted by one.
    const std::array<double, 4> cycle{std::sin(u), std::cos(u), -std::sin(u), -std::cos(u)};
    const int shift = t.cosine ? 1 : 0;
    Jet s(0, order, x);
    for (int lv = 0; lv <= order; ++lv) {
      for (int d = 0; d < pow4(lv); ++d) {
        const MultiIndex dm = MultiIndex::decode(d, lv);
        double v = cycle[static_cast<std::size_t>((lv + shift) % 4)];
        for (int i = 0; i < lv; ++i) v *= t.wave[static_cast<std::size_t>(dm[i])];
        s(lv, 0, d) = v;
      }
    }
    return s;
  }

  std::array<Polynomial, kDim> components_{};
  Point center_{};
  std::optional<TrigFactor> trig_;
  std::uint64_t seed_ = 0;
  int degree_ = -1;
};

}  // namespace spin2
