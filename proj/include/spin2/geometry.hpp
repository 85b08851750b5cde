#pragma once

// Christoffel symbols, curvature and covariant differentiation of jets.
//
// Conventions (fixed; locked by the commutator tests):
//   Gamma^l_{mn} = 1/2 g^{ls} (d_m g_{sn} + d_n g_{sm} - d_s g_{mn})
//   R^r_{smn}    = d_m Gamma^r_{ns} - d_n Gamma^r_{ms}
//                + Gamma^r_{ml} Gamma^l_{ns} - Gamma^r_{nl} Gamma^l_{ms}
//   R_{sn}       = R^r_{srn}
// With R_{abcd} = g_{ae} R^e_{bcd} this gives, for any covector,
//   (nabla_b nabla_a - nabla_a nabla_b) L_r = R_{bars} L^s.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "spin2/jet.hpp"
#include "spin2/metric.hpp"

namespace spin2 {

/// Absolute deviation of an identity together with the magnitude of the
/// largest summand that entered it.
struct Deviation {
  double absolute = 0.0;
  double scale = 0.0;

  [[nodiscard]] double relative() const {
    if (absolute == 0.0) return 0.0;
    if (scale == 0.0) return std::numeric_limits<double>::infinity();
    return absolute / scale;
  }

  /// Merges two checks reported as one: the worse relative deviation wins.
  [[nodiscard]] Deviation worst(const Deviation& o) const { return o.relative() > relative() ? o : *this; }
};

using Matrix4 = std::array<double, 16>;

/// Inverse of a 4x4 matrix by Gauss-Jordan elimination with partial pivoting.
inline Matrix4 invert4(const Matrix4& m) {
  std::array<std::array<double, 8>, 4> a{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) a[i][j] = m[static_cast<std::size_t>(i * 4 + j)];
    a[i][4 + i] = 1.0;
  }
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (a[piv][col] == 0.0) throw DomainError("metric is singular at this point");
    std::swap(a[col], a[piv]);
    const double inv = 1.0 / a[col][col];
    for (double& v : a[col]) v *= inv;
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (int c = 0; c < 8; ++c) a[r][c] -= f * a[col][c];
    }
  }
  Matrix4 out{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) out[static_cast<std::size_t>(i * 4 + j)] = a[i][4 + j];
  }
  return out;
}

/// Inverse-metric jet from a metric jet, using d_D(g^-1 g) = 0 level by level.
inline Jet inverse_metric_jet(const Jet& g) {
  Jet inv(2, g.order(), g.point());
  Matrix4 g0{};
  for (int c = 0; c < 16; ++c) g0[static_cast<std::size_t>(c)] = g.value(c);
  const Matrix4 i0 = invert4(g0);
  for (int c = 0; c < 16; ++c) inv.value(c) = i0[static_cast<std::size_t>(c)];

  MultiIndex sel;
  MultiIndex rest;
  for (int lv = 1; lv <= g.order(); ++lv) {
    for (int d = 0; d < pow4(lv); ++d) {
      const MultiIndex dm = MultiIndex::decode(d, lv);
      Matrix4 acc{};
      const unsigned full = (1U << lv) - 1U;
      for (unsigned mask = 0; mask < full; ++mask) {
        split_by_mask(dm, mask, sel, rest);
        const int ds = sel.encode();
        const int dr = rest.encode();
        for (int a = 0; a < 4; ++a) {
          for (int b = 0; b < 4; ++b) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += inv(sel.size, a * 4 + k, ds) * g(rest.size, k * 4 + b, dr);
            acc[static_cast<std::size_t>(a * 4 + b)] += s;
          }
        }
      }
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          double s = 0.0;
          for (int k = 0; k < 4; ++k) s += acc[static_cast<std::size_t>(a * 4 + k)] * i0[static_cast<std::size_t>(k * 4 + b)];
          inv(lv, a * 4 + b, d) = -s;
        }
      }
    }
  }
  return inv;
}

/// Christoffel symbols of the second kind as a jet: component (l, m, n) holds
/// Gamma^l_{mn}; the jet order is one less than the metric jet's.
inline Jet christoffel_jet(const Jet& g, const Jet& ginv) {
  if (g.order() < 1) throw JetDepthError("christoffel: metric jet needs first partials");
  const int order = g.order() - 1;
  Jet first(3, order, g.point());
  for (int lv = 0; lv <= order; ++lv) {
    for (int d = 0; d < pow4(lv); ++d) {
      MultiIndex dm = MultiIndex::decode(d, lv);
      for (int s = 0; s < kDim; ++s) {
        for (int m = 0; m < kDim; ++m) {
          for (int n = 0; n < kDim; ++n) {
            auto dg = [&](int wrt, int a, int b) {
              MultiIndex e = dm;
              e.push_back(wrt);
              return g(lv + 1, a * kDim + b, e.encode());
            };
            first(lv, encode({s, m, n}), d) = 0.5 * (dg(m, s, n) + dg(n, s, m) - dg(s, m, n));
          }
        }
      }
    }
  }
  return contract_slot(ginv, first, 0);
}

/// Riemann tensor R^r_{smn} as a jet of order Gamma.order() - 1.
inline Jet riemann_jet(const Jet& gamma) {
  if (gamma.order() < 1) throw JetDepthError("riemann: Christoffel jet needs first partials");
  const int order = gamma.order() - 1;
  Jet out(4, order, gamma.point());
  MultiIndex sel;
  MultiIndex rest;
  for (int lv = 0; lv <= order; ++lv) {
    for (int d = 0; d < pow4(lv); ++d) {
      const MultiIndex dm = MultiIndex::decode(d, lv);
      auto dgam = [&](int wrt, int l, int m, int n) {
        MultiIndex e = dm;
        e.push_back(wrt);
        return gamma(lv + 1, encode({l, m, n}), e.encode());
      };
      for (int r = 0; r < kDim; ++r) {
        for (int s = 0; s < kDim; ++s) {
          for (int m = 0; m < kDim; ++m) {
            for (int n = 0; n < kDim; ++n) {
              double v = dgam(m, r, n, s) - dgam(n, r, m, s);
              for (unsigned mask = 0; mask < (1U << lv); ++mask) {
                split_by_mask(dm, mask, sel, rest);
                const int ds = sel.encode();
                const int dr = rest.encode();
                for (int l = 0; l < kDim; ++l) {
                  v += gamma(sel.size, encode({r, m, l}), ds) * gamma(rest.size, encode({l, n, s}), dr) -
                       gamma(sel.size, encode({r, n, l}), ds) * gamma(rest.size, encode({l, m, s}), dr);
                }
              }
              out(lv, encode({r, s, m, n}), d) = v;
            }
          }
        }
      }
    }
  }
  return out;
}

/// Ricci tensor R_{sn} = R^r_{srn} as a jet.
inline Jet ricci_jet(const Jet& riemann) {
  Jet out(2, riemann.order(), riemann.point());
  for (int lv = 0; lv <= riemann.order(); ++lv) {
    for (int d = 0; d < pow4(lv); ++d) {
      for (int s = 0; s < kDim; ++s) {
        for (int n = 0; n < kDim; ++n) {
          double v = 0.0;
          for (int r = 0; r < kDim; ++r) v += riemann(lv, encode({r, s, r, n}), d);
          out(lv, s * kDim + n, d) = v;
        }
      }
    }
  }
  return out;
}

/// Geometry at one point: metric and inverse to order 3, Christoffel symbols
/// to order 2, Riemann and Ricci with first partials.
class CurvatureBundle {
 public:
  CurvatureBundle(Jet metric, const MetricChart* chart = nullptr)
      : chart_(chart),
        metric_(std::move(metric)),
        inverse_(inverse_metric_jet(metric_)),
        christoffel_(christoffel_jet(metric_, inverse_)),
        riemann_(christoffel_.order() >= 1 ? riemann_jet(christoffel_) : Jet(4, 0, metric_.point())),
        ricci_(ricci_jet(riemann_)) {}

  [[nodiscard]] const Point& point() const { return metric_.point(); }
  [[nodiscard]] const MetricChart* chart() const { return chart_; }

  [[nodiscard]] const Jet& metric() const { return metric_; }
  [[nodiscard]] const Jet& inverse_metric() const { return inverse_; }
  /// Gamma^l_{mn} with partials to order 2.
  [[nodiscard]] const Jet& christoffel() const { return christoffel_; }
  /// R^r_{smn} with first partials.
  [[nodiscard]] const Jet& riemann() const { return riemann_; }
  /// R_{ab} with first partials.
  [[nodiscard]] const Jet& ricci() const { return ricci_; }

  [[nodiscard]] double g(int a, int b) const { return metric_.value(a * kDim + b); }
  [[nodiscard]] double ginv(int a, int b) const { return inverse_.value(a * kDim + b); }
  [[nodiscard]] double gamma(int l, int m, int n) const { return christoffel_.value(encode({l, m, n})); }
  [[nodiscard]] double dgamma(int r, int l, int m, int n) const { return christoffel_(1, encode({l, m, n}), r); }
  [[nodiscard]] double d2gamma(int r, int s, int l, int m, int n) const {
    return christoffel_(2, encode({l, m, n}), encode({r, s}));
  }
  [[nodiscard]] double riemann(int r, int s, int m, int n) const { return riemann_.value(encode({r, s, m, n})); }
  [[nodiscard]] double driemann(int l, int r, int s, int m, int n) const {
    return riemann_(1, encode({r, s, m, n}), l);
  }
  [[nodiscard]] double ricci(int a, int b) const { return ricci_.value(a * kDim + b); }
  [[nodiscard]] double dricci(int l, int a, int b) const { return ricci_(1, a * kDim + b, l); }

 private:
  const MetricChart* chart_;
  Jet metric_;
  Jet inverse_;
  Jet christoffel_;
  Jet riemann_;
  Jet ricci_;
};

/// Christoffel symbols Gamma^l_{mn} at `x` (with partials to order 2).
inline Jet christoffel(const MetricChart& chart, const Point& x) {
  const Jet g = chart.metric_jet(x, kMaxJetOrder);
  return christoffel_jet(g, inverse_metric_jet(g));
}

inline CurvatureBundle curvature(const MetricChart& chart, const Point& x) {
  return CurvatureBundle(chart.metric_jet(x, kMaxJetOrder), &chart);
}

/// Covariant derivative of a fully covariant tensor jet.  The new derivative
/// index is slot 0 of the result: (nabla T)_{m a1..aq} = nabla_m T_{a1..aq}.
inline Jet covariant_derivative(const Jet& field, const Jet& gamma) {
  if (field.order() < 1) throw JetDepthError("covariant_derivative: jet order exhausted");
  if (gamma.order() < field.order() - 1) {
    throw JetDepthError("covariant_derivative: Christoffel jet too shallow for field");
  }
  const int order = field.order() - 1;
  const int q = field.rank();
  Jet out(q + 1, order, field.point());
  MultiIndex sel;
  MultiIndex rest;
  for (int lv = 0; lv <= order; ++lv) {
    for (int d = 0; d < pow4(lv); ++d) {
      const MultiIndex dm = MultiIndex::decode(d, lv);
      for (int oc = 0; oc < out.components(); ++oc) {
        const MultiIndex om = MultiIndex::decode(oc, q + 1);
        const int mu = om[0];
        MultiIndex a;
        a.size = q;
        for (int i = 0; i < q; ++i) a[i] = om[i + 1];
        MultiIndex dmu = dm;
        dmu.push_back(mu);
        double v = field(lv + 1, a.encode(), dmu.encode());
        for (int i = 0; i < q; ++i) {
          const int ai = a[i];
          for (unsigned mask = 0; mask < (1U << lv); ++mask) {
            split_by_mask(dm, mask, sel, rest);
            const int ds = sel.encode();
            const int dr = rest.encode();
            for (int l = 0; l < kDim; ++l) {
              const double gam = gamma(sel.size, encode({l, mu, ai}), ds);
              if (gam == 0.0) continue;
              a[i] = l;
              v -= gam * field(rest.size, a.encode(), dr);
            }
          }
          a[i] = ai;
        }
        out(lv, oc, d) = v;
      }
    }
  }
  return out;
}

inline Jet covariant_derivative(const Jet& field, const CurvatureBundle& bundle) {
  if (field.point() != bundle.point()) {
    throw std::invalid_argument("covariant_derivative: field and bundle evaluated at different points");
  }
  return covariant_derivative(field, bundle.christoffel());
}

/// g^{bc} T_{..b..c..}
inline Jet metric_trace(const Jet& t, int i, int j, const CurvatureBundle& bundle) {
  return trace_with(bundle.inverse_metric(), t, i, j);
}

/// R_{rsmn} = g_{re} R^e_{smn}, as a jet of order 1.
inline Jet riemann_lowered(const CurvatureBundle& bundle) {
  return contract_slot(bundle.metric(), bundle.riemann(), 0);
}

// ---------------------------------------------------------------------------
// Identity checks
// ---------------------------------------------------------------------------

/// Metric compatibility: max |nabla_a g_{bc}| over every stored jet level.
inline Deviation metric_compatibility_check(const CurvatureBundle& bundle) {
  const Jet dg = covariant_derivative(bundle.metric(), bundle);
  return {dg.max_abs(), std::max(bundle.metric().max_abs(0), bundle.metric().max_abs(1))};
}

/// Riemann antisymmetry in both pairs, pair exchange and the first cyclic identity.
inline Deviation riemann_symmetry_check(const CurvatureBundle& bundle) {
  const Jet lowered = riemann_lowered(bundle);
  Deviation dev{0.0, std::max(bundle.riemann().max_abs(0), lowered.max_abs(0))};
  for (int r = 0; r < kDim; ++r) {
    for (int s = 0; s < kDim; ++s) {
      for (int m = 0; m < kDim; ++m) {
        for (int n = 0; n < kDim; ++n) {
          dev.absolute = std::max(dev.absolute, std::abs(bundle.riemann(r, s, m, n) + bundle.riemann(r, s, n, m)));
          dev.absolute = std::max(dev.absolute, std::abs(bundle.riemann(r, s, m, n) + bundle.riemann(r, m, n, s) +
                                                         bundle.riemann(r, n, s, m)));
          // With all indices down: first-pair antisymmetry and pair exchange.
          const double low = lowered.value(encode({r, s, m, n}));
          dev.absolute = std::max(dev.absolute, std::abs(low + lowered.value(encode({s, r, m, n}))));
          dev.absolute = std::max(dev.absolute, std::abs(low - lowered.value(encode({m, n, r, s}))));
        }
      }
    }
  }
  return dev;
}

/// Ricci symmetry R_{ab} = R_{ba}.  The Riemann components summed into the
/// trace set the scale, which stays meaningful on Ricci-flat charts.
inline Deviation ricci_symmetry_check(const CurvatureBundle& bundle) {
  Deviation dev{0.0, bundle.riemann().max_abs(0)};
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) {
      dev.absolute = std::max(dev.absolute, std::abs(bundle.ricci(a, b) - bundle.ricci(b, a)));
    }
  }
  return dev;
}

/// Componentwise commutator on a covector:
///   (nabla_b nabla_a - nabla_a nabla_b) L_r  vs  R_{bars} L^s.
/// `lambda` must carry at least two jet levels.
inline Deviation covector_commutator_check(const CurvatureBundle& bundle, const Jet& lambda) {
  const Jet ddl = covariant_derivative(covariant_derivative(lambda.truncated(2), bundle), bundle);
  const Jet rlow = riemann_lowered(bundle);
  Deviation dev;
  for (int b = 0; b < kDim; ++b) {
    for (int a = 0; a < kDim; ++a) {
      for (int r = 0; r < kDim; ++r) {
        const double t1 = ddl.value(encode({b, a, r}));
        const double t2 = ddl.value(encode({a, b, r}));
        double rhs = 0.0;
        for (int s = 0; s < kDim; ++s) {
          for (int e = 0; e < kDim; ++e) {
            const double term = rlow.value(encode({b, a, r, s})) * bundle.ginv(s, e) * lambda.value(e);
            rhs += term;
            dev.scale = std::max(dev.scale, std::abs(term));
          }
        }
        dev.scale = std::max({dev.scale, std::abs(t1), std::abs(t2)});
        dev.absolute = std::max(dev.absolute, std::abs(t1 - t2 - rhs));
      }
    }
  }
  return dev;
}

/// nabla^a (R_{as} L^s) from the curvature bundle by the product rule.
inline double divergence_ricci_lambda(const CurvatureBundle& bundle, const Jet& lambda, double* scale = nullptr) {
  const Jet dl = covariant_derivative(lambda.truncated(1), bundle);
  const Jet dric = covariant_derivative(bundle.ricci(), bundle);
  double sum = 0.0;
  double sc = 0.0;
  for (int a = 0; a < kDim; ++a) {
    for (int c = 0; c < kDim; ++c) {
      const double gac = bundle.ginv(a, c);
      if (gac == 0.0) continue;
      for (int s = 0; s < kDim; ++s) {
        for (int e = 0; e < kDim; ++e) {
          const double gse = bundle.ginv(s, e);
          if (gse == 0.0) continue;
          const double t1 = gac * gse * dric.value(encode({c, a, s})) * lambda.value(e);
          const double t2 = gac * gse * bundle.ricci(a, s) * dl.value(encode({c, e}));
          sum += t1 + t2;
          sc = std::max({sc, std::abs(t1), std::abs(t2)});
        }
      }
    }
  }
  if (scale != nullptr) *scale = sc;
  return sum;
}

/// Wave-operator commutator on the divergence:
///   [nabla^a nabla_a, nabla^b] L_b + nabla^a (R_{as} L^s)
/// with the left side from nested jets and the right side from the bundle.
/// `lambda` must carry three jet levels.
inline Deviation commutator_check(const CurvatureBundle& bundle, const Jet& lambda) {
  if (lambda.order() < 3) throw JetDepthError("commutator_check: generator needs partials to order 3");
  const Jet dl = covariant_derivative(lambda, bundle);       // nabla_a L_b, order 2
  const Jet div = metric_trace(dl, 0, 1, bundle);            // nabla^b L_b, order 2
  const Jet ddiv = covariant_derivative(covariant_derivative(div, bundle), bundle);
  const double box_div = metric_trace(ddiv, 0, 1, bundle).value(0);

  const Jet ddl = covariant_derivative(dl, bundle);          // nabla_c nabla_a L_b, order 1
  const Jet box_l = metric_trace(ddl, 0, 1, bundle);         // box L_b, order 1
  const double div_box = metric_trace(covariant_derivative(box_l, bundle), 0, 1, bundle).value(0);

  double rscale = 0.0;
  const double rhs = divergence_ricci_lambda(bundle, lambda, &rscale);
  return {std::abs(box_div - div_box + rhs), std::max({std::abs(box_div), std::abs(div_box), rscale})};
}

inline Deviation commutator_check(const MetricChart& chart, const Point& x, const Jet& lambda) {
  return commutator_check(curvature(chart, x), lambda);
}

/// Contracted Bianchi identity
///   nabla_r R^r_{abs} + nabla_r R^r_{bas} = nabla_a R_{bs} + nabla_b R_{as} - 2 nabla_s R_{ba}.
/// Largest single term |d_mu T_a| or |Gamma^l_{mu a_i} T_{..l..}| in the
/// value of nabla T.  Both sides of an identity can cancel to zero (Ricci-flat
/// or maximally symmetric charts), so the summands set the scale instead.
inline double covariant_derivative_summand_scale(const Jet& field, const Jet& gamma) {
  const int q = field.rank();
  double scale = 0.0;
  for (int c = 0; c < field.components(); ++c) {
    for (int mu = 0; mu < kDim; ++mu) scale = std::max(scale, std::abs(field(1, c, mu)));
  }
  for (int mu = 0; mu < kDim; ++mu) {
    for (int c = 0; c < field.components(); ++c) {
      const MultiIndex a = MultiIndex::decode(c, q);
      for (int i = 0; i < q; ++i) {
        MultiIndex b = a;
        for (int l = 0; l < kDim; ++l) {
          b[i] = l;
          scale = std::max(scale, std::abs(gamma.value(encode({l, mu, a[i]})) * field.value(b.encode())));
        }
      }
    }
  }
  return scale;
}

inline Deviation bianchi_contracted_check(const CurvatureBundle& bundle) {
  const Jet rl = riemann_lowered(bundle);
  const Jet drl = covariant_derivative(rl, bundle);                      // (t, r, a, b, s)
  const Jet div = metric_trace(drl, 0, 1, bundle);                      // (a, b, s)
  const Jet dric = covariant_derivative(bundle.ricci(), bundle);         // (t, a, b)
  Deviation dev;
  dev.scale = std::max(covariant_derivative_summand_scale(rl, bundle.christoffel()) * max_abs_value(bundle.inverse_metric()),
                       covariant_derivative_summand_scale(bundle.ricci(), bundle.christoffel()));
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) {
      for (int s = 0; s < kDim; ++s) {
        const double l1 = div.value(encode({a, b, s}));
        const double l2 = div.value(encode({b, a, s}));
        const double r1 = dric.value(encode({a, b, s}));
        const double r2 = dric.value(encode({b, a, s}));
        const double r3 = 2.0 * dric.value(encode({s, b, a}));
        dev.absolute = std::max(dev.absolute, std::abs(l1 + l2 - (r1 + r2 - r3)));
        dev.scale = std::max({dev.scale, std::abs(l1), std::abs(l2), std::abs(r1), std::abs(r2), std::abs(r3)});
      }
    }
  }
  return dev;
}

inline Deviation bianchi_contracted_check(const MetricChart& chart, const Point& x) {
  return bianchi_contracted_check(curvature(chart, x));
}

}  // namespace spin2
