#pragma once

// Field-equation residuals and their closed-form curvature obstructions.
//
// Two computational routes are kept apart on purpose:
//  - residual_*: nested covariant derivatives of the multiplet jets; no
//    curvature tensor appears except in the explicit non-minimal term.
//  - obstruction_*: curvature contractions against L and nabla L only.
// Agreement of the two routes is the verification.

#include <algorithm>
#include <array>
#include <cmath>

#include "spin2/geometry.hpp"
#include "spin2/jet.hpp"
#include "spin2/spin2_fields.hpp"

namespace spin2 {

/// Non-minimal coupling constant multiplying the curvature-field term of the
/// rank-2 equation.
struct CouplingConfig {
  double A = 0.0;
};

/// Residual tensor (value level only) and the largest summand that fed it.
struct Residual {
  Jet value;
  double scale = 0.0;

  [[nodiscard]] Deviation deviation() const { return {max_abs_value(value), scale}; }
};

struct ObstructionComparison {
  Jet direct;
  Jet formula;
  double scale = 0.0;
  double deviation = 0.0;  // max |direct - formula| / scale
};

inline ObstructionComparison compare(const Residual& direct, const Jet& formula) {
  ObstructionComparison c{direct.value, formula, direct.scale, 0.0};
  c.deviation = Deviation{max_abs_diff(direct.value, formula), direct.scale}.relative();
  return c;
}

namespace detail {

inline double eta(int a, int b) { return a != b ? 0.0 : (a == 0 ? 1.0 : -1.0); }

/// Tracks the largest summand seen while an expression is accumulated.
struct ScaleTracker {
  double scale = 0.0;
  double operator()(double v) {
    scale = std::max(scale, std::abs(v));
    return v;
  }
  void absorb(const Jet& j) { scale = std::max(scale, j.max_abs(0)); }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Flat space (Minkowski, Cartesian): partial derivatives only
// ---------------------------------------------------------------------------

struct FlatFirstOrderResiduals {
  Residual scalar;  // d^a Phi_a
  Residual vector;  // 1/2 d_a Phi - 1/3 d^b Phi_ab - Phi_a
  Residual rank2;   // rank-2 equation
  Residual rank3;   // rank-3 defining equation minus Phi_abs

  [[nodiscard]] Deviation worst() const {
    return scalar.deviation().worst(vector.deviation()).worst(rank2.deviation()).worst(rank3.deviation());
  }
};

inline FlatFirstOrderResiduals flat_first_order_residuals(const Spin2Multiplet& m) {
  require_order(m.phi, 1, "flat_first_order_residuals(phi)");
  require_order(m.phi1, 1, "flat_first_order_residuals(phi_a)");
  require_order(m.phi2, 1, "flat_first_order_residuals(phi_ab)");
  require_order(m.phi3, 1, "flat_first_order_residuals(phi_abs)");
  using detail::eta;
  const Point& x = m.point();
  auto d1 = [](const Jet& j, int comp, int wrt) { return j(1, comp, wrt); };

  FlatFirstOrderResiduals r{{Jet(0, 0, x)}, {Jet(1, 0, x)}, {Jet(2, 0, x)}, {Jet(3, 0, x)}};

  {
    detail::ScaleTracker s;
    double v = 0.0;
    for (int a = 0; a < kDim; ++a) v += s(eta(a, a) * d1(m.phi1, a, a));
    r.scalar.value.value(0) = v;
    r.scalar.scale = s.scale;
  }
  {
    detail::ScaleTracker s;
    for (int a = 0; a < kDim; ++a) {
      double v = s(0.5 * d1(m.phi, 0, a)) - s(m.phi1.value(a));
      for (int b = 0; b < kDim; ++b) v -= s(eta(b, b) * d1(m.phi2, a * kDim + b, b) / 3.0);
      r.vector.value.value(a) = v;
    }
    r.vector.scale = s.scale;
  }
  {
    detail::ScaleTracker s;
    double trace_div = 0.0;  // d^k Phi_kn^n
    double div1 = 0.0;       // d^k Phi_k
    for (int k = 0; k < kDim; ++k) {
      div1 += eta(k, k) * d1(m.phi1, k, k);
      for (int n = 0; n < kDim; ++n) trace_div += eta(k, k) * eta(n, n) * d1(m.phi3, encode({k, n, n}), k);
    }
    for (int a = 0; a < kDim; ++a) {
      for (int b = 0; b < kDim; ++b) {
        double v = 0.0;
        for (int k = 0; k < kDim; ++k) {
          v += s(0.5 * eta(k, k) * d1(m.phi3, encode({k, a, b}), k));
          v += s(0.5 * eta(k, k) * d1(m.phi3, encode({k, b, a}), k));
        }
        v -= s(0.25 * eta(a, b) * trace_div);
        v += s(d1(m.phi1, b, a)) + s(d1(m.phi1, a, b));
        v -= s(0.5 * eta(a, b) * div1);
        r.rank2.value.value(a * kDim + b) = v;
      }
    }
    r.rank2.scale = s.scale;
  }
  {
    detail::ScaleTracker s;
    for (int a = 0; a < kDim; ++a) {
      for (int b = 0; b < kDim; ++b) {
        for (int c = 0; c < kDim; ++c) {
          double v = s(d1(m.phi2, b * kDim + c, a)) - s(d1(m.phi2, a * kDim + c, b));
          for (int k = 0; k < kDim; ++k) {
            v += s(eta(b, c) * eta(k, k) * d1(m.phi2, a * kDim + k, k) / 3.0);
            v -= s(eta(a, c) * eta(k, k) * d1(m.phi2, b * kDim + k, k) / 3.0);
          }
          v -= s(m.phi3.value(encode({a, b, c})));
          r.rank3.value.value(encode({a, b, c})) = v;
        }
      }
    }
    r.rank3.scale = s.scale;
  }
  return r;
}

struct FlatSecondOrderResiduals {
  Residual scalar;  // 1/2 box Phi - 1/3 d^k d^l Phi_kl
  Residual rank2;   // second-order rank-2 equation (rewritten form)

  [[nodiscard]] Deviation worst() const { return scalar.deviation().worst(rank2.deviation()); }
};

inline FlatSecondOrderResiduals flat_second_order_residuals(const Jet& phi, const Jet& phi2) {
  require_order(phi, 2, "flat_second_order_residuals(phi)");
  require_order(phi2, 2, "flat_second_order_residuals(phi_ab)");
  using detail::eta;
  const Point& x = phi2.point();
  auto d2 = [](const Jet& j, int comp, int m, int n) { return j(2, comp, m * kDim + n); };

  FlatSecondOrderResiduals r{{Jet(0, 0, x)}, {Jet(2, 0, x)}};
  {
    detail::ScaleTracker s;
    double v = 0.0;
    for (int k = 0; k < kDim; ++k) {
      v += s(0.5 * eta(k, k) * d2(phi, 0, k, k));
      for (int l = 0; l < kDim; ++l) v -= s(eta(k, k) * eta(l, l) * d2(phi2, k * kDim + l, k, l) / 3.0);
    }
    r.scalar.value.value(0) = v;
    r.scalar.scale = s.scale;
  }
  {
    detail::ScaleTracker s;
    double box_phi = 0.0;
    double box_trace = 0.0;
    for (int k = 0; k < kDim; ++k) {
      box_phi += eta(k, k) * d2(phi, 0, k, k);
      for (int c = 0; c < kDim; ++c) box_trace += eta(k, k) * eta(c, c) * d2(phi2, c * kDim + c, k, k);
    }
    for (int a = 0; a < kDim; ++a) {
      for (int b = 0; b < kDim; ++b) {
        double v = s(d2(phi, 0, a, b)) + s(0.5 * eta(a, b) * box_phi) - s(0.25 * eta(a, b) * box_trace);
        for (int l = 0; l < kDim; ++l) {
          v += s(eta(l, l) * d2(phi2, a * kDim + b, l, l));
          v -= s(eta(l, l) * d2(phi2, b * kDim + l, a, l));
          v -= s(eta(l, l) * d2(phi2, a * kDim + l, b, l));
        }
        r.rank2.value.value(a * kDim + b) = v;
      }
    }
    r.rank2.scale = s.scale;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Curved space: direct residuals by nested covariant differentiation
// ---------------------------------------------------------------------------

/// nabla^a Phi_a
inline Residual residual_scalar_eq(const Spin2Multiplet& m, const CurvatureBundle& bundle) {
  require_order(m.phi1, 1, "residual_scalar_eq");
  const Jet dv = covariant_derivative(m.phi1.truncated(1), bundle);
  Residual r{Jet(0, 0, m.point())};
  detail::ScaleTracker s;
  double v = 0.0;
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) v += s(bundle.ginv(a, b) * dv.value(a * kDim + b));
  }
  r.value.value(0) = v;
  r.scale = s.scale;
  return r;
}

/// (R^r_a_b^s + R^r_b_a^s) Phi_rs, with the mixed Riemann realized as
/// R^r_a_b^s = g^{sl} R^r_{abl}.
inline Jet riemann_contraction(const Jet& phi2, const CurvatureBundle& bundle) {
  Jet out(2, 0, bundle.point());
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) {
      double v = 0.0;
      for (int r = 0; r < kDim; ++r) {
        for (int s = 0; s < kDim; ++s) {
          for (int l = 0; l < kDim; ++l) {
            const double gsl = bundle.ginv(s, l);
            if (gsl == 0.0) continue;
            v += gsl * (bundle.riemann(r, a, b, l) + bundle.riemann(r, b, a, l)) * phi2.value(r * kDim + s);
          }
        }
      }
      out.value(a * kDim + b) = v;
    }
  }
  return out;
}

/// Rank-2 equation with non-minimal coupling A:
///   1/2 (nabla^r Phi_rab + nabla^r Phi_rba - 1/2 g_ab nabla^r Phi_rs^s)
///   + nabla_a Phi_b + nabla_b Phi_a - 1/2 g_ab nabla^r Phi_r
///   - A (R^r_a_b^s + R^r_b_a^s) Phi_rs
inline Residual residual_rank2_eq(const Spin2Multiplet& m, const CurvatureBundle& bundle,
                                  const CouplingConfig& c = {}) {
  require_order(m.phi3, 1, "residual_rank2_eq(phi_abs)");
  require_order(m.phi1, 1, "residual_rank2_eq(phi_a)");
  const Jet d3 = covariant_derivative(m.phi3.truncated(1), bundle);          // (c, r, a, b)
  const Jet div3 = metric_trace(d3, 0, 1, bundle);                           // nabla^r Phi_rab
  const Jet trace3 = metric_trace(m.phi3.truncated(1), 1, 2, bundle);        // Phi_rs^s
  const double div_trace3 = metric_trace(covariant_derivative(trace3, bundle), 0, 1, bundle).value(0);
  const Jet d1 = covariant_derivative(m.phi1.truncated(1), bundle);          // (a, b) = nabla_a Phi_b
  const double div1 = metric_trace(d1, 0, 1, bundle).value(0);

  const Jet t1 = 0.5 * div3;
  const Jet t2 = 0.5 * swap_slots(div3, 0, 1);
  Jet t3(2, 0, m.point());
  Jet t6(2, 0, m.point());
  for (int i = 0; i < 16; ++i) {
    t3.value(i) = -0.25 * bundle.metric().value(i) * div_trace3;
    t6.value(i) = -0.5 * bundle.metric().value(i) * div1;
  }
  const Jet t4 = d1;
  const Jet t5 = swap_slots(d1, 0, 1);

  Residual r{t1 + t2 + t3 + t4 + t5 + t6};
  detail::ScaleTracker s;
  for (const Jet& t : {t1, t2, t3, t4, t5, t6}) s.absorb(t);
  if (c.A != 0.0) {
    const Jet na = c.A * riemann_contraction(m.phi2, bundle);
    r.value -= na;
    s.absorb(na);
  }
  r.scale = s.scale;
  return r;
}

/// nabla_a Phi_bs - nabla_b Phi_as + 1/3 (g_bs nabla^r Phi_ar - g_as nabla^r Phi_br) - Phi_abs
inline Residual residual_rank3_eq(const Spin2Multiplet& m, const CurvatureBundle& bundle) {
  require_order(m.phi2, 1, "residual_rank3_eq");
  const Jet dphi = covariant_derivative(m.phi2.truncated(1), bundle);
  const Jet v = metric_trace(dphi, 0, 2, bundle);
  const Jet gv = outer(v, bundle.metric().truncated(0));
  const Jet t1 = dphi;
  const Jet t2 = -swap_slots(dphi, 0, 1);
  const Jet t3 = (1.0 / 3.0) * gv;
  const Jet t4 = (-1.0 / 3.0) * swap_slots(gv, 0, 1);
  const Jet t5 = -m.phi3.truncated(0);
  Residual r{t1 + t2 + t3 + t4 + t5};
  detail::ScaleTracker s;
  for (const Jet& t : {t1, t2, t3, t4, t5}) s.absorb(t);
  r.scale = s.scale;
  return r;
}

// ---------------------------------------------------------------------------
// Closed-form obstructions (curvature contractions, first derivatives of L)
// ---------------------------------------------------------------------------

namespace detail {

/// Point values shared by the obstruction formulas.
struct ObstructionInputs {
  std::array<double, 4> lam{};        // L_a
  std::array<double, 4> lam_up{};     // L^a
  std::array<double, 16> dl{};        // nabla_a L_b
  double div = 0.0;                   // nabla^a L_a
  std::array<double, 64> dric{};      // nabla_c R_ab
  std::array<double, 16> ric_mixed{};  // R_a^b
  std::array<double, 256> riem_up{};  // R^r_{ab}^s = g^{sl} R^r_{abl}, layout (r, a, b, s)

  ObstructionInputs(const Jet& lambda, const CurvatureBundle& bundle) {
    require_order(lambda, 1, "obstruction");
    const Jet d = covariant_derivative(lambda.truncated(1), bundle);
    const Jet dr = covariant_derivative(bundle.ricci(), bundle);
    for (int a = 0; a < kDim; ++a) {
      lam[static_cast<std::size_t>(a)] = lambda.value(a);
      for (int b = 0; b < kDim; ++b) {
        dl[static_cast<std::size_t>(a * 4 + b)] = d.value(a * 4 + b);
        for (int c = 0; c < kDim; ++c) dric[static_cast<std::size_t>(c * 16 + a * 4 + b)] = dr.value(encode({c, a, b}));
      }
    }
    for (int a = 0; a < kDim; ++a) {
      double up = 0.0;
      for (int b = 0; b < kDim; ++b) {
        up += bundle.ginv(a, b) * lam[static_cast<std::size_t>(b)];
        div += bundle.ginv(a, b) * dl[static_cast<std::size_t>(a * 4 + b)];
        double rm = 0.0;
        for (int l = 0; l < kDim; ++l) rm += bundle.ricci(a, l) * bundle.ginv(l, b);
        ric_mixed[static_cast<std::size_t>(a * 4 + b)] = rm;
      }
      lam_up[static_cast<std::size_t>(a)] = up;
    }
    for (int r = 0; r < kDim; ++r) {
      for (int a = 0; a < kDim; ++a) {
        for (int b = 0; b < kDim; ++b) {
          for (int s = 0; s < kDim; ++s) {
            double v = 0.0;
            for (int l = 0; l < kDim; ++l) v += bundle.ginv(s, l) * bundle.riemann(r, a, b, l);
            riem_up[static_cast<std::size_t>(encode({r, a, b, s}))] = v;
          }
        }
      }
    }
  }

  [[nodiscard]] double DL(int a, int b) const { return dl[static_cast<std::size_t>(a * 4 + b)]; }
  [[nodiscard]] double RM(int a, int b) const { return ric_mixed[static_cast<std::size_t>(a * 4 + b)]; }
  [[nodiscard]] double DRIC(int c, int a, int b) const { return dric[static_cast<std::size_t>(c * 16 + a * 4 + b)]; }
  [[nodiscard]] double RUP(int r, int a, int b, int s) const {
    return riem_up[static_cast<std::size_t>(encode({r, a, b, s}))];
  }
};

/// (nabla_r L_s) (R^r_a_b^s + R^r_b_a^s)
inline Jet riemann_term(const ObstructionInputs& in, const Point& x) {
  Jet out(2, 0, x);
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) {
      double v = 0.0;
      for (int r = 0; r < kDim; ++r) {
        for (int s = 0; s < kDim; ++s) v += in.DL(r, s) * (in.RUP(r, a, b, s) + in.RUP(r, b, a, s));
      }
      out.value(a * kDim + b) = v;
    }
  }
  return out;
}

/// The Ricci-only part shared by both rank-2 obstructions:
///   g_ab nabla_r (R^rs L_s) - 2 L^s nabla_s R_ab
///   - 3/2 [R_b^r nabla_a L_r + R_a^r nabla_b L_r] + 1/2 [R_b^r nabla_r L_a + R_a^r nabla_r L_b]
inline Jet ricci_terms(const ObstructionInputs& in, const CurvatureBundle& bundle, const Jet& lambda) {
  const double div_rl = divergence_ricci_lambda(bundle, lambda);
  Jet out(2, 0, bundle.point());
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) {
      double v = bundle.g(a, b) * div_rl;
      for (int s = 0; s < kDim; ++s) v -= 2.0 * in.lam_up[static_cast<std::size_t>(s)] * in.DRIC(s, a, b);
      for (int r = 0; r < kDim; ++r) {
        v -= 1.5 * (in.RM(b, r) * in.DL(a, r) + in.RM(a, r) * in.DL(b, r));
        v += 0.5 * (in.RM(b, r) * in.DL(r, a) + in.RM(a, r) * in.DL(r, b));
      }
      out.value(a * kDim + b) = v;
    }
  }
  return out;
}

}  // namespace detail

/// -2/3 nabla^a (R_ab L^b)
inline Jet obstruction_scalar(const Jet& lambda, const CurvatureBundle& bundle) {
  require_order(lambda, 1, "obstruction_scalar");
  Jet out(0, 0, bundle.point());
  out.value(0) = -2.0 / 3.0 * divergence_ricci_lambda(bundle, lambda);
  return out;
}

/// Rank-2 obstruction of the minimally coupled system after the contracted
/// Bianchi reduction (Ricci terms plus one bare-Riemann term).
inline Jet obstruction_rank2(const Jet& lambda, const CurvatureBundle& bundle) {
  const detail::ObstructionInputs in(lambda, bundle);
  return detail::ricci_terms(in, bundle, lambda) + detail::riemann_term(in, bundle.point());
}

/// The bare-Riemann part of obstruction_rank2 alone.
inline Jet riemann_obstruction_term(const Jet& lambda, const CurvatureBundle& bundle) {
  const detail::ObstructionInputs in(lambda, bundle);
  return detail::riemann_term(in, bundle.point());
}

/// Gauge contribution of the non-minimal term written through L:
///   2A (nabla_r L_s)(R^r_a_b^s + R^r_b_a^s) + A R_ab nabla^c L_c
inline Jet nonminimal_contribution(const Jet& lambda, const CurvatureBundle& bundle, const CouplingConfig& c) {
  const detail::ObstructionInputs in(lambda, bundle);
  Jet out = (2.0 * c.A) * detail::riemann_term(in, bundle.point());
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) out.value(a * kDim + b) += c.A * bundle.ricci(a, b) * in.div;
  }
  return out;
}

/// Same contribution evaluated directly on a rank-2 field: A (R^r_a_b^s + R^r_b_a^s) Phi_rs.
inline Jet nonminimal_direct(const Jet& phi2, const CurvatureBundle& bundle, const CouplingConfig& c) {
  return c.A * riemann_contraction(phi2, bundle);
}

/// Obstruction of the A = 1/2 system: every term carries a Ricci factor.
///   g_ab nabla_r (R^rs L_s) - 2 L^s nabla_s R_ab - 3/2 [..] + 1/2 [..] - 1/2 R_ab nabla^c L_c
inline Jet obstruction_rank2_nonminimal(const Jet& lambda, const CurvatureBundle& bundle) {
  const detail::ObstructionInputs in(lambda, bundle);
  Jet out = detail::ricci_terms(in, bundle, lambda);
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) out.value(a * kDim + b) -= 0.5 * bundle.ricci(a, b) * in.div;
  }
  return out;
}

}  // namespace spin2
