#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "spin2/finite_difference.hpp"
#include "spin2/gauge_generator.hpp"
#include "spin2/geometry.hpp"

using namespace spin2;

namespace {

std::vector<Point> samples(const MetricChart& chart, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point> out;
  const Region reg = chart.default_region();
  for (int k = 0; k < n; ++k) {
    Point x{};
    for (std::size_t i = 0; i < 4; ++i) x[i] = std::uniform_real_distribution<double>(reg[i].first, reg[i].second)(rng);
    out.push_back(x);
  }
  return out;
}

Point center(const MetricChart& chart) {
  const Region r = chart.default_region();
  Point c{};
  for (std::size_t i = 0; i < 4; ++i) c[i] = 0.5 * (r[i].first + r[i].second);
  return c;
}

class CurvedTest : public ::testing::TestWithParam<std::string> {};

}  // namespace

TEST(Invert4, RoundTrip) {
  const Matrix4 m{2, 1, 0, 0, 1, 3, 0, 1, 0, 0, -1, 0, 0, 1, 0, -4};
  const Matrix4 inv = invert4(m);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += m[static_cast<std::size_t>(i * 4 + k)] * inv[static_cast<std::size_t>(k * 4 + j)];
      EXPECT_NEAR(s, i == j ? 1.0 : 0.0, 1e-14);
    }
  }
  EXPECT_THROW((void)invert4(Matrix4{}), std::domain_error);
}

TEST(Christoffel, MinkowskiVanishes) {
  const auto chart = make_chart("minkowski");
  const Jet g = christoffel(*chart, {0.1, 0.2, -0.3, 0.4});
  EXPECT_EQ(g.max_abs(), 0.0);
}

TEST(Christoffel, SchwarzschildClosedForm) {
  // r = 4M, M = 1: Gamma^r_tt = M(r-2M)/r^3, Gamma^t_tr = M/(r(r-2M)),
  // Gamma^r_rr = -M/(r(r-2M)), Gamma^th_rth = 1/r, Gamma^r_thth = -(r-2M).
  const auto chart = make_chart("schwarzschild", {{"M", 1.0}});
  const double r = 4.0;
  const double th = 1.2;
  const CurvatureBundle b = curvature(*chart, {0.0, r, th, 0.5});
  EXPECT_NEAR(b.gamma(1, 0, 0), 0.03125, 1e-15);
  EXPECT_NEAR(b.gamma(0, 0, 1), 0.125, 1e-15);
  EXPECT_NEAR(b.gamma(0, 1, 0), 0.125, 1e-15);
  EXPECT_NEAR(b.gamma(1, 1, 1), -0.125, 1e-15);
  EXPECT_NEAR(b.gamma(2, 1, 2), 0.25, 1e-15);
  EXPECT_NEAR(b.gamma(1, 2, 2), -(r - 2.0), 1e-14);
  EXPECT_NEAR(b.gamma(3, 2, 3), std::cos(th) / std::sin(th), 1e-14);
}

TEST(Christoffel, FrwClosedForm) {
  // a = t^q: Gamma^t_xx = a a' = q t^{2q-1}; Gamma^x_tx = q / t.
  const auto chart = make_chart("frw", {{"q", 2.0 / 3.0}});
  const CurvatureBundle b = curvature(*chart, {1.0, 0.2, 0.3, 0.4});
  EXPECT_NEAR(b.gamma(0, 1, 1), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(b.gamma(1, 0, 1), 2.0 / 3.0, 1e-15);
  const CurvatureBundle b2 = curvature(*chart, {2.0, 0.0, 0.0, 0.0});
  EXPECT_NEAR(b2.gamma(0, 3, 3), (2.0 / 3.0) * std::pow(2.0, 1.0 / 3.0), 1e-14);
  EXPECT_NEAR(b2.gamma(3, 3, 0), 1.0 / 3.0, 1e-15);
}

TEST_P(CurvedTest, JetCurvatureMatchesPlainLoops) {
  // plain_curvature shares no code with the jet engine.
  const auto chart = make_chart(GetParam());
  for (const Point& x : samples(*chart, 10, 21)) {
    const CurvatureBundle b = curvature(*chart, x);
    const PlainCurvature p = plain_curvature(exact_metric_partials(*chart, x));
    const double scale = std::max(1.0, b.riemann().max_abs(0));
    for (int i = 0; i < 64; ++i) EXPECT_NEAR(b.christoffel().value(i), p.christoffel[static_cast<std::size_t>(i)], 1e-13);
    for (int i = 0; i < 256; ++i) EXPECT_NEAR(b.riemann().value(i), p.riemann[static_cast<std::size_t>(i)], 1e-12 * scale);
    for (int i = 0; i < 16; ++i) EXPECT_NEAR(b.ricci().value(i), p.ricci[static_cast<std::size_t>(i)], 1e-12 * scale);
  }
}

TEST_P(CurvedTest, CurvatureDerivativeLevelsMatchDifferences) {
  // The stored first partials of Riemann and Ricci against central
  // differences of the values, and second partials of Christoffel likewise.
  const auto chart = make_chart(GetParam());
  const double h = 1e-4;
  const Point x = samples(*chart, 1, 5)[0];
  const CurvatureBundle b = curvature(*chart, x);
  for (int l = 0; l < 4; ++l) {
    Point xp = x;
    Point xm = x;
    xp[static_cast<std::size_t>(l)] += h;
    xm[static_cast<std::size_t>(l)] -= h;
    const CurvatureBundle bp = curvature(*chart, xp);
    const CurvatureBundle bm = curvature(*chart, xm);
    const double rs = std::max(1e-3, b.riemann().max_abs());
    for (int c = 0; c < 256; ++c) {
      EXPECT_NEAR(b.riemann()(1, c, l), (bp.riemann().value(c) - bm.riemann().value(c)) / (2 * h), 1e-6 * rs);
    }
    for (int c = 0; c < 16; ++c) {
      EXPECT_NEAR(b.ricci()(1, c, l), (bp.ricci().value(c) - bm.ricci().value(c)) / (2 * h), 1e-6 * rs);
    }
    for (int c = 0; c < 64; ++c) {
      for (int m = 0; m < 4; ++m) {
        EXPECT_NEAR(b.christoffel()(2, c, l * 4 + m),
                    (bp.christoffel()(1, c, m) - bm.christoffel()(1, c, m)) / (2 * h),
                    1e-6 * std::max(1.0, b.christoffel().max_abs()));
      }
    }
  }
}

TEST_P(CurvedTest, MetricCompatibility) {
  const auto chart = make_chart(GetParam());
  for (const Point& x : samples(*chart, 20, 1)) {
    const Deviation d = metric_compatibility_check(curvature(*chart, x));
    EXPECT_LE(d.relative(), 1e-12);
  }
}

TEST_P(CurvedTest, RiemannAndRicciSymmetries) {
  const auto chart = make_chart(GetParam());
  for (const Point& x : samples(*chart, 20, 2)) {
    const CurvatureBundle b = curvature(*chart, x);
    EXPECT_LE(riemann_symmetry_check(b).relative(), 1e-12);
    EXPECT_LE(ricci_symmetry_check(b).relative(), 1e-12);
  }
}

TEST_P(CurvedTest, CommutatorsLockTheSignConvention) {
  const auto chart = make_chart(GetParam());
  const Point c = center(*chart);
  int k = 0;
  for (const Point& x : samples(*chart, 20, 3)) {
    const auto gen = GaugeGenerator::random(1000 + static_cast<std::uint64_t>(k++), 4, GeneratorFamily::polynomial, c);
    const CurvatureBundle b = curvature(*chart, x);
    const Jet lam = gen.partials(x);
    EXPECT_LE(commutator_check(b, lam).relative(), 1e-10);
    EXPECT_LE(covector_commutator_check(b, lam).relative(), 1e-10);
  }
}

TEST_P(CurvedTest, ContractedBianchi) {
  const auto chart = make_chart(GetParam());
  for (const Point& x : samples(*chart, 20, 4)) EXPECT_LE(bianchi_contracted_check(*chart, x).relative(), 1e-9);
}

INSTANTIATE_TEST_SUITE_P(AllMetrics, CurvedTest, ::testing::ValuesIn(catalog_names()));

TEST(Curvature, MinkowskiIsFlat) {
  const CurvatureBundle b = curvature(*make_chart("minkowski"), {1, 2, 3, 4});
  EXPECT_EQ(b.riemann().max_abs(), 0.0);
  EXPECT_EQ(b.ricci().max_abs(), 0.0);
  EXPECT_EQ(bianchi_contracted_check(b).absolute, 0.0);
}

TEST(Curvature, SchwarzschildIsRicciFlatNotFlat) {
  const auto chart = make_chart("schwarzschild");
  const CurvatureBundle b = curvature(*chart, {0.0, 4.0, 1.0, 0.3});
  EXPECT_GT(std::abs(b.riemann(0, 1, 0, 1)), 0.01);
  EXPECT_LE(b.ricci().max_abs(0), 1e-10 * b.riemann().max_abs(0));
}

TEST(Curvature, SchwarzschildKretschmann) {
  // R_abcd R^abcd = 48 M^2 / r^6, independent of sign conventions.
  const auto chart = make_chart("schwarzschild", {{"M", 1.0}});
  for (double r : {3.0, 4.0, 7.5}) {
    const CurvatureBundle b = curvature(*chart, {0.0, r, 0.9, 1.0});
    const Jet low = riemann_lowered(b);
    double k = 0.0;
    // Diagonal metric: raising is multiplication by 1/g_aa.
    for (int c = 0; c < 256; ++c) {
      const MultiIndex m = MultiIndex::decode(c, 4);
      double up = low.value(c);
      for (int i = 0; i < 4; ++i) up *= b.ginv(m[i], m[i]);
      k += low.value(c) * up;
    }
    EXPECT_NEAR(k, 48.0 / std::pow(r, 6), 1e-12);
  }
}

TEST(Curvature, DeSitterRicciIsMinusThreeHSquaredG) {
  // Under (+,-,-,-) with R_sn = R^r_srn the maximally symmetric space has
  // R_ab = -3 H^2 g_ab (the sign flips with the signature, |c| = 3 does not).
  const double hub = 0.1;
  const auto chart = make_chart("de_sitter", {{"H", hub}});
  for (const Point& x : samples(*chart, 20, 6)) {
    const CurvatureBundle b = curvature(*chart, x);
    for (int a = 0; a < 4; ++a) {
      for (int c = 0; c < 4; ++c) EXPECT_NEAR(b.ricci(a, c), -3.0 * hub * hub * b.g(a, c), 1e-9 * 3 * hub * hub * std::abs(b.g(1, 1)));
    }
  }
}

TEST(Curvature, FrwRicciScalar) {
  // R = -6 q (2q - 1) / t^2 in (+,-,-,-).
  const double q = 2.0 / 3.0;
  const auto chart = make_chart("frw", {{"q", q}});
  for (double t : {0.5, 1.0, 1.7}) {
    const CurvatureBundle b = curvature(*chart, {t, 0.1, 0.2, 0.3});
    const double scalar = trace_with(b.inverse_metric(), b.ricci(), 0, 1).value(0);
    EXPECT_NEAR(scalar, -6.0 * q * (2 * q - 1) / (t * t), 1e-12);
  }
}

TEST(CovariantDerivative, ScalarIsGradient) {
  const auto chart = make_chart("frw");
  const Point x{1.2, 0.1, -0.2, 0.3};
  const CurvatureBundle b = curvature(*chart, x);
  Jet f(0, 2, x);
  for (int m = 0; m < 4; ++m) {
    f(1, 0, m) = m + 1.0;
    for (int n = 0; n < 4; ++n) f(2, 0, m * 4 + n) = (m + 1) * (n + 1);
  }
  const Jet df = covariant_derivative(f, b);
  EXPECT_EQ(df.rank(), 1);
  EXPECT_EQ(df.order(), 1);
  for (int m = 0; m < 4; ++m) {
    EXPECT_EQ(df.value(m), m + 1.0);
    for (int n = 0; n < 4; ++n) EXPECT_EQ(df(1, m, n), (m + 1) * (n + 1));
  }
}

TEST(CovariantDerivative, CovectorAgainstIndependentComposition) {
  // nabla_a L_b = d_a L_b - Gamma^c_ab L_c with Gamma from the plain-loop
  // path, and the next jet level against differences of that value.
  const auto chart = make_chart("schwarzschild");
  const Point x{0.4, 5.0, 1.0, 2.0};
  const auto gen = GaugeGenerator::random(77, 3, GeneratorFamily::polynomial_trig, x);
  auto plain = [&](const Point& y) {
    const PlainCurvature p = plain_curvature(exact_metric_partials(*chart, y));
    const Jet l = gen.partials(y, 1);
    std::array<double, 16> out{};
    for (int a = 0; a < 4; ++a) {
      for (int c = 0; c < 4; ++c) {
        double v = l(1, c, a);
        for (int e = 0; e < 4; ++e) v -= p.christoffel[static_cast<std::size_t>(e * 16 + a * 4 + c)] * l.value(e);
        out[static_cast<std::size_t>(a * 4 + c)] = v;
      }
    }
    return out;
  };
  const Jet dl = covariant_derivative(gen.partials(x), curvature(*chart, x));
  const auto want = plain(x);
  for (int i = 0; i < 16; ++i) EXPECT_NEAR(dl.value(i), want[static_cast<std::size_t>(i)], 1e-13);

  const double h = 1e-5;
  for (int m = 0; m < 4; ++m) {
    Point xp = x;
    Point xm = x;
    xp[static_cast<std::size_t>(m)] += h;
    xm[static_cast<std::size_t>(m)] -= h;
    const auto vp = plain(xp);
    const auto vm = plain(xm);
    for (int i = 0; i < 16; ++i) EXPECT_NEAR(dl(1, i, m), (vp[static_cast<std::size_t>(i)] - vm[static_cast<std::size_t>(i)]) / (2 * h), 1e-7);
  }
}

TEST(CovariantDerivative, OrderDropsByOneAndExhausts) {
  const auto chart = make_chart("de_sitter");
  const Point x{0.1, 0.2, 0.3, 0.4};
  const CurvatureBundle b = curvature(*chart, x);
  Jet t(1, 3, x);
  const Jet d1 = covariant_derivative(t, b);
  const Jet d2 = covariant_derivative(d1, b);
  const Jet d3 = covariant_derivative(d2, b);
  EXPECT_EQ(d1.order(), 2);
  EXPECT_EQ(d3.order(), 0);
  EXPECT_EQ(d3.rank(), 4);
  EXPECT_THROW((void)covariant_derivative(d3, b), JetDepthError);
  EXPECT_THROW((void)commutator_check(b, t.truncated(2)), JetDepthError);
}

TEST(CovariantDerivative, RejectsBundleAtAnotherPoint) {
  const auto chart = make_chart("de_sitter");
  const CurvatureBundle b = curvature(*chart, {0.1, 0.2, 0.3, 0.4});
  EXPECT_THROW((void)covariant_derivative(Jet(1, 1, {0.0, 0.0, 0.0, 0.0}), b), std::invalid_argument);
}

TEST(Domain, CurvatureOutsideValidRegion) {
  const auto chart = make_chart("schwarzschild");
  EXPECT_THROW((void)christoffel(*chart, {0.0, 2.2, 1.0, 0.0}), DomainError);
  EXPECT_THROW((void)curvature(*make_chart("frw"), {0.01, 0.0, 0.0, 0.0}), DomainError);
}
