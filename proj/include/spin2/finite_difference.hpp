#pragma once

// Finite-difference oracle for the closed-form catalog partials.
//
// Everything here is deliberately written with plain arrays and loops and
// shares no code with the jet engine beyond metric values and invert4: the
// curvature it produces is an independent check on geometry.hpp.

#include <array>
#include <cmath>

#include "spin2/geometry.hpp"
#include "spin2/metric.hpp"

namespace spin2 {

/// Second-order central stencils: nominal convergence order of the oracle.
inline constexpr int kFiniteDifferenceOrder = 2;

struct MetricPartials {
  Matrix4 g{};
  std::array<double, 64> dg{};    // [m][a][b]
  std::array<double, 256> d2g{};  // [m][n][a][b]
};

struct PlainCurvature {
  std::array<double, 64> christoffel{};  // [l][m][n]
  std::array<double, 256> riemann{};     // [r][s][m][n]
  Matrix4 ricci{};
};

inline MetricPartials exact_metric_partials(const MetricChart& chart, const Point& x) {
  const Jet g = chart.metric_jet(x, 2);
  MetricPartials p;
  for (int c = 0; c < 16; ++c) {
    p.g[static_cast<std::size_t>(c)] = g.value(c);
    for (int m = 0; m < 4; ++m) {
      p.dg[static_cast<std::size_t>(m * 16 + c)] = g(1, c, m);
      for (int n = 0; n < 4; ++n) p.d2g[static_cast<std::size_t>((m * 4 + n) * 16 + c)] = g(2, c, m * 4 + n);
    }
  }
  return p;
}

/// Central differences of the metric values with step h in every coordinate.
inline MetricPartials fd_metric_partials(const MetricChart& chart, const Point& x, double h) {
  auto at = [&](int m, double sm, int n, double sn) {
    Point y = x;
    y[static_cast<std::size_t>(m)] += sm;
    y[static_cast<std::size_t>(n)] += sn;
    chart.check_point(y);
    return chart.metric_values(y);
  };
  MetricPartials p;
  chart.check_point(x);
  p.g = chart.metric_values(x);
  for (int m = 0; m < 4; ++m) {
    const Matrix4 gp = at(m, h, m, 0.0);
    const Matrix4 gm = at(m, -h, m, 0.0);
    for (int c = 0; c < 16; ++c) {
      const auto cu = static_cast<std::size_t>(c);
      p.dg[static_cast<std::size_t>(m * 16 + c)] = (gp[cu] - gm[cu]) / (2.0 * h);
      p.d2g[static_cast<std::size_t>((m * 4 + m) * 16 + c)] = (gp[cu] - 2.0 * p.g[cu] + gm[cu]) / (h * h);
    }
    for (int n = m + 1; n < 4; ++n) {
      const Matrix4 pp = at(m, h, n, h);
      const Matrix4 pm = at(m, h, n, -h);
      const Matrix4 mp = at(m, -h, n, h);
      const Matrix4 mm = at(m, -h, n, -h);
      for (int c = 0; c < 16; ++c) {
        const auto cu = static_cast<std::size_t>(c);
        const double v = (pp[cu] - pm[cu] - mp[cu] + mm[cu]) / (4.0 * h * h);
        p.d2g[static_cast<std::size_t>((m * 4 + n) * 16 + c)] = v;
        p.d2g[static_cast<std::size_t>((n * 4 + m) * 16 + c)] = v;
      }
    }
  }
  return p;
}

/// Central-difference estimate of jet level `level + 1` from the closed-form
/// level `level`.  Used to check the hand-written partials of each metric.
/// The result is a bare tensor with slots (a, b, d_1 .. d_level, m).
inline Jet fd_next_level(const MetricChart& chart, const Point& x, int level, double h) {
  Jet est(2 + level + 1, 0, x);
  for (int m = 0; m < 4; ++m) {
    Point xp = x;
    Point xm = x;
    xp[static_cast<std::size_t>(m)] += h;
    xm[static_cast<std::size_t>(m)] -= h;
    const Jet gp = chart.metric_jet(xp, level);
    const Jet gm = chart.metric_jet(xm, level);
    for (int c = 0; c < 16; ++c) {
      for (int d = 0; d < pow4(level); ++d) {
        est.value((c * pow4(level) + d) * 4 + m) = (gp(level, c, d) - gm(level, c, d)) / (2.0 * h);
      }
    }
  }
  return est;
}

inline PlainCurvature plain_curvature(const MetricPartials& p) {
  auto DG = [&](int m, int a, int b) { return p.dg[static_cast<std::size_t>(m * 16 + a * 4 + b)]; };
  auto D2G = [&](int m, int n, int a, int b) {
    return p.d2g[static_cast<std::size_t>((m * 4 + n) * 16 + a * 4 + b)];
  };
  const Matrix4 gi = invert4(p.g);
  auto GI = [&](int a, int b) { return gi[static_cast<std::size_t>(a * 4 + b)]; };

  // d_m g^{ab} = -g^{ac} d_m g_{cd} g^{db}
  std::array<double, 64> dgi{};
  for (int m = 0; m < 4; ++m) {
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        double s = 0.0;
        for (int c = 0; c < 4; ++c) {
          for (int d = 0; d < 4; ++d) s -= GI(a, c) * DG(m, c, d) * GI(d, b);
        }
        dgi[static_cast<std::size_t>(m * 16 + a * 4 + b)] = s;
      }
    }
  }

  PlainCurvature out;
  std::array<double, 256> dgam{};  // [r][l][m][n] = d_r Gamma^l_{mn}
  for (int l = 0; l < 4; ++l) {
    for (int m = 0; m < 4; ++m) {
      for (int n = 0; n < 4; ++n) {
        double gam = 0.0;
        for (int s = 0; s < 4; ++s) gam += 0.5 * GI(l, s) * (DG(m, s, n) + DG(n, s, m) - DG(s, m, n));
        out.christoffel[static_cast<std::size_t>(l * 16 + m * 4 + n)] = gam;
        for (int r = 0; r < 4; ++r) {
          double v = 0.0;
          for (int s = 0; s < 4; ++s) {
            v += 0.5 * dgi[static_cast<std::size_t>(r * 16 + l * 4 + s)] * (DG(m, s, n) + DG(n, s, m) - DG(s, m, n));
            v += 0.5 * GI(l, s) * (D2G(r, m, s, n) + D2G(r, n, s, m) - D2G(r, s, m, n));
          }
          dgam[static_cast<std::size_t>(r * 64 + l * 16 + m * 4 + n)] = v;
        }
      }
    }
  }
  auto GAM = [&](int l, int m, int n) { return out.christoffel[static_cast<std::size_t>(l * 16 + m * 4 + n)]; };
  auto DGAM = [&](int r, int l, int m, int n) { return dgam[static_cast<std::size_t>(r * 64 + l * 16 + m * 4 + n)]; };

  for (int r = 0; r < 4; ++r) {
    for (int s = 0; s < 4; ++s) {
      for (int m = 0; m < 4; ++m) {
        for (int n = 0; n < 4; ++n) {
          double v = DGAM(m, r, n, s) - DGAM(n, r, m, s);
          for (int l = 0; l < 4; ++l) v += GAM(r, m, l) * GAM(l, n, s) - GAM(r, n, l) * GAM(l, m, s);
          out.riemann[static_cast<std::size_t>(r * 64 + s * 16 + m * 4 + n)] = v;
        }
      }
    }
  }
  for (int s = 0; s < 4; ++s) {
    for (int n = 0; n < 4; ++n) {
      double v = 0.0;
      for (int r = 0; r < 4; ++r) v += out.riemann[static_cast<std::size_t>(r * 64 + s * 16 + r * 4 + n)];
      out.ricci[static_cast<std::size_t>(s * 4 + n)] = v;
    }
  }
  return out;
}

}  // namespace spin2
