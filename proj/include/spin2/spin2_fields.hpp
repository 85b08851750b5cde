#pragma once

// The spin-2 multiplet (Phi, Phi_a, Phi_ab, Phi_abs) and its gauge-generated
// ("gradient-like") members built from a covector L_a:
//
//   Phi       = nabla^b L_b
//   Phi_ab    = nabla_a L_b + nabla_b L_a - 1/2 g_ab nabla^s L_s
//   Phi_a     = 2/3 nabla_a nabla^b L_b - 1/3 nabla^b nabla_a L_b - 1/3 box L_a
//   Phi_abs   = nabla_a Phi_bs - nabla_b Phi_as
//             + 1/3 (g_bs nabla^r Phi_ar - g_as nabla^r Phi_br)

#include <algorithm>
#include <cmath>
#include <utility>

#include "spin2/gauge_generator.hpp"
#include "spin2/geometry.hpp"
#include "spin2/jet.hpp"
#include "spin2/metric.hpp"

namespace spin2 {

/// Field content of the first-order system at one point, each member stored
/// as a covariant jet.  Phi_abs is dense (64 entries); its symmetries are
/// checked by the validators below rather than encoded in storage.
struct Spin2Multiplet {
  Jet phi;   // rank 0
  Jet phi1;  // rank 1
  Jet phi2;  // rank 2, symmetric
  Jet phi3;  // rank 3, antisymmetric in the first pair

  /// The zero multiplet with the jet depths produced by the gauge constructors.
  static Spin2Multiplet zero(const Point& x) {
    return {Jet(0, 2, x), Jet(1, 1, x), Jet(2, 2, x), Jet(3, 1, x)};
  }

  [[nodiscard]] const Point& point() const { return phi2.point(); }
};

/// Independent components: scalar, vector, symmetric tensor, and the rank-3
/// field (6 antisymmetric pairs x 4, minus 4 cyclic and 4 trace conditions).
constexpr int independent_component_count() {
  constexpr int scalar = 1;
  constexpr int vector = kDim;
  constexpr int symmetric = kDim * (kDim + 1) / 2;
  constexpr int antisymmetric_pairs = kDim * (kDim - 1) / 2;
  constexpr int rank3 = antisymmetric_pairs * kDim - kDim - kDim;
  return scalar + vector + symmetric + rank3;
}

// ---------------------------------------------------------------------------
// Structural validators
// ---------------------------------------------------------------------------

inline Deviation symmetry_check(const Jet& phi2) {
  Deviation dev{0.0, phi2.max_abs(0)};
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) {
      dev.absolute = std::max(dev.absolute, std::abs(phi2.value(a * kDim + b) - phi2.value(b * kDim + a)));
    }
  }
  return dev;
}

inline Deviation antisymmetry_check(const Jet& phi3) {
  Deviation dev{0.0, phi3.max_abs(0)};
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) {
      for (int s = 0; s < kDim; ++s) {
        dev.absolute = std::max(dev.absolute, std::abs(phi3.value(encode({a, b, s})) + phi3.value(encode({b, a, s}))));
      }
    }
  }
  return dev;
}

/// Phi_abs + Phi_bsa + Phi_sab = 0.
inline Deviation cyclic_check(const Jet& phi3) {
  Deviation dev{0.0, phi3.max_abs(0)};
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) {
      for (int s = 0; s < kDim; ++s) {
        const double v = phi3.value(encode({a, b, s})) + phi3.value(encode({b, s, a})) + phi3.value(encode({s, a, b}));
        dev.absolute = std::max(dev.absolute, std::abs(v));
      }
    }
  }
  return dev;
}

/// Dual form of the cyclic identity: eps^{kabs} Phi_abs for each k.
inline Deviation dual_cyclic_check(const Jet& phi3) {
  auto sign = [](int a, int b, int c, int d) {
    const std::array<int, 4> p{a, b, c, d};
    int s = 1;
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        if (p[static_cast<std::size_t>(i)] == p[static_cast<std::size_t>(j)]) return 0;
        if (p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(j)]) s = -s;
      }
    }
    return s;
  };
  Deviation dev{0.0, phi3.max_abs(0)};
  for (int k = 0; k < kDim; ++k) {
    double v = 0.0;
    for (int a = 0; a < kDim; ++a) {
      for (int b = 0; b < kDim; ++b) {
        for (int s = 0; s < kDim; ++s) v += sign(k, a, b, s) * phi3.value(encode({a, b, s}));
      }
    }
    dev.absolute = std::max(dev.absolute, std::abs(v));
  }
  return dev;
}

/// g^{ab} Phi_ab
inline Deviation tracelessness_check(const Jet& phi2, const CurvatureBundle& bundle) {
  Deviation dev;
  double tr = 0.0;
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) {
      const double t = bundle.ginv(a, b) * phi2.value(a * kDim + b);
      tr += t;
      dev.scale = std::max(dev.scale, std::abs(t));
    }
  }
  dev.absolute = std::abs(tr);
  return dev;
}

/// nabla_a Phi^b_b = Phi_ab^b, both sides contracted with the inverse metric.
inline Deviation trace_property_check(const Spin2Multiplet& m, const CurvatureBundle& bundle) {
  const Jet lhs = covariant_derivative(metric_trace(m.phi2.truncated(1), 0, 1, bundle), bundle);
  const Jet rhs = metric_trace(m.phi3.truncated(0), 1, 2, bundle);
  return {max_abs_diff(lhs, rhs), std::max({lhs.max_abs(0), rhs.max_abs(0), m.phi3.max_abs(0)})};
}

// ---------------------------------------------------------------------------
// Gauge constructors
// ---------------------------------------------------------------------------

inline void require_order(const Jet& j, int order, const char* what) {
  if (j.order() < order) {
    throw JetDepthError(std::string(what) + ": needs jet order " + std::to_string(order) + ", got " +
                        std::to_string(j.order()));
  }
}

/// (Phi, Phi_ab) of the gauge multiplet; both keep jet order lambda.order()-1.
inline std::pair<Jet, Jet> gauge_scalar_and_rank2(const Jet& lambda, const CurvatureBundle& bundle) {
  require_order(lambda, 1, "gauge_scalar_and_rank2");
  const Jet dl = covariant_derivative(lambda, bundle);
  Jet phi = metric_trace(dl, 0, 1, bundle);
  Jet phi2 = dl + swap_slots(dl, 0, 1) - 0.5 * outer(bundle.metric(), phi);
  return {std::move(phi), std::move(phi2)};
}

/// Phi_a of the gauge multiplet (jet order lambda.order()-2).
inline Jet gauge_vector(const Jet& lambda, const CurvatureBundle& bundle) {
  require_order(lambda, 2, "gauge_vector");
  const Jet dl = covariant_derivative(lambda, bundle);   // nabla_a L_b
  const Jet ddl = covariant_derivative(dl, bundle);      // nabla_c nabla_a L_b
  const Jet div = metric_trace(dl, 0, 1, bundle);
  const Jet grad_div = covariant_derivative(div, bundle);
  const Jet mixed = metric_trace(ddl, 0, 2, bundle);     // nabla^b nabla_a L_b
  const Jet box = metric_trace(ddl, 0, 1, bundle);       // nabla^b nabla_b L_a
  return (2.0 / 3.0) * grad_div.truncated(ddl.order()) - (1.0 / 3.0) * mixed - (1.0 / 3.0) * box;
}

/// Substitutes a rank-2 field into the rank-3 defining equation.
/// The result has jet order phi2.order()-1.
inline Jet rank3_from_rank2(const Jet& phi2, const CurvatureBundle& bundle) {
  require_order(phi2, 1, "rank3_from_rank2");
  const Jet dphi = covariant_derivative(phi2, bundle);   // (a, b, s) = nabla_a Phi_bs
  const Jet v = metric_trace(dphi, 0, 2, bundle);        // V_a = nabla^r Phi_ar
  const Jet gv = outer(v, bundle.metric());              // (a, b, s) = V_a g_bs
  return dphi - swap_slots(dphi, 0, 1) + (1.0 / 3.0) * (gv - swap_slots(gv, 0, 1));
}

inline Jet gauge_rank3(const Jet& lambda, const CurvatureBundle& bundle) {
  return rank3_from_rank2(gauge_scalar_and_rank2(lambda, bundle).second, bundle);
}

/// 1/2 nabla_a Phi - 1/3 nabla^b Phi_ab: the vector field the defining
/// first-order equation assigns to a given (Phi, Phi_ab).
inline Jet vector_from_defining_equation(const Jet& phi, const Jet& phi2, const CurvatureBundle& bundle) {
  const Jet dphi = covariant_derivative(phi, bundle);
  const Jet div2 = metric_trace(covariant_derivative(phi2, bundle), 0, 2, bundle);
  const int order = std::min(dphi.order(), div2.order());
  return 0.5 * dphi.truncated(order) - (1.0 / 3.0) * div2.truncated(order);
}

/// Full gauge multiplet; `lambda` needs partials to order 3.
inline Spin2Multiplet assemble_gauge_multiplet(const Jet& lambda, const CurvatureBundle& bundle) {
  require_order(lambda, 3, "assemble_gauge_multiplet");
  auto [phi, phi2] = gauge_scalar_and_rank2(lambda, bundle);
  Jet phi1 = gauge_vector(lambda, bundle);
  Jet phi3 = rank3_from_rank2(phi2, bundle);
  return {std::move(phi), std::move(phi1), std::move(phi2), std::move(phi3)};
}

inline Spin2Multiplet assemble_gauge_multiplet(const GaugeGenerator& gen, const MetricChart& chart, const Point& x) {
  return assemble_gauge_multiplet(gen.partials(x, kMaxJetOrder), curvature(chart, x));
}

/// Adds delta * (x^wrt - x0^wrt) to Phi_ab and Phi_ba: a linear perturbation
/// whose first partial is visible to every first-order equation.
inline Spin2Multiplet perturb_rank2(Spin2Multiplet m, int a, int b, int wrt, double delta) {
  m.phi2(1, a * kDim + b, wrt) += delta;
  if (a != b) m.phi2(1, b * kDim + a, wrt) += delta;
  return m;
}

}  // namespace spin2
