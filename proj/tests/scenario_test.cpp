#include <cstdlib>
#include <set>

#include <gtest/gtest.h>

#include "spin2/scenario.hpp"

using namespace spin2;
using nlohmann::json;

namespace {

std::string field_of(const json& j) {
  try {
    (void)resolve(parse_config(j));
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

std::string dump_without_wall_time(const ResidualReport& r) { return report_to_json(r, false).dump(); }

}  // namespace

TEST(Config, DefaultsAndRoundTrip) {
  const ScenarioConfig c = parse_config(json::parse(R"({
    "metric": {"name": "schwarzschild", "params": {"M": 2.0}},
    "n_points": 3, "seed": 99,
    "generator": {"family": "polynomial_trig", "degree": 2, "count": 4},
    "couplings": [0.5], "tolerance": 1e-8, "checks": ["uniqueness", "geometry"]
  })"));
  EXPECT_EQ(c.metric, "schwarzschild");
  EXPECT_EQ(c.params.at("M"), 2.0);
  EXPECT_EQ(c.family, GeneratorFamily::polynomial_trig);
  EXPECT_EQ(c.n_generators, 4);
  const ResolvedScenario r = resolve(c);
  // Checks come back in canonical order; the chart's default parameters and
  // region are filled in.
  EXPECT_EQ(r.checks, (std::vector<std::string>{"geometry", "uniqueness"}));
  EXPECT_EQ(r.config.params.at("epsilon"), 0.5);
  EXPECT_EQ(r.region[1].first, 6.0);
  const ScenarioConfig again = parse_config(json::parse(config_to_json(r.config).dump()));
  EXPECT_EQ(config_to_json(again).dump(), config_to_json(r.config).dump());

  const ScenarioConfig d = parse_config(json::object());
  EXPECT_EQ(d.metric, "minkowski");
  EXPECT_EQ(d.couplings, (std::vector<double>{0.0, 0.25, 0.5, 1.0}));
  EXPECT_EQ(d.tolerance, 1e-9);
  EXPECT_EQ(resolve(d).checks.size(), check_names().size());
  EXPECT_EQ(resolve(parse_config(json{{"metric", "frw"}})).checks.size(), check_names().size() - 1);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(field_of(json{{"bogus", 1}}), "bogus");
  EXPECT_EQ(field_of(json{{"metric", "kerr"}}), "metric");
  EXPECT_EQ(field_of(json::parse(R"({"metric": {"name": "frw", "params": {"H": 1}}})")), "metric");
  EXPECT_EQ(field_of(json::parse(R"({"metric": {"params": {}}})")), "metric.name");
  EXPECT_EQ(field_of(json{{"n_points", 0}}), "n_points");
  EXPECT_EQ(field_of(json{{"n_points", "ten"}}), "n_points");
  EXPECT_EQ(field_of(json{{"tolerance", 0.0}}), "tolerance");
  EXPECT_EQ(field_of(json{{"tolerance", -1e-9}}), "tolerance");
  EXPECT_EQ(field_of(json{{"couplings", json::array()}}), "couplings");
  EXPECT_EQ(field_of(json{{"checks", {"geometry", "magic"}}}), "checks");
  EXPECT_EQ(field_of(json{{"checks", {"geometry", "geometry"}}}), "checks");
  EXPECT_EQ(field_of(json::parse(R"({"metric": "frw", "checks": ["flat"]})")), "checks");
  EXPECT_EQ(field_of(json::parse(R"({"generator": {"degree": 7}})")), "generator.degree");
  EXPECT_EQ(field_of(json::parse(R"({"generator": {"family": "wavelet"}})")), "generator.family");
  EXPECT_EQ(field_of(json::parse(R"({"generator": {"count": 0}})")), "generator.count");
  EXPECT_EQ(field_of(json::parse(R"({"generator": {"colour": 1}})")), "generator.colour");
  EXPECT_EQ(field_of(json{{"region", {{0, 1}, {0, 1}}}}), "region");
  EXPECT_EQ(field_of(json{{"region", {{0, 1}, {0, 1}, {1, 0}, {0, 1}}}}), "region[2]");
  // Touches the horizon guard r >= 2.5 M.
  EXPECT_EQ(field_of(json::parse(R"({"metric": "schwarzschild",
                                      "region": [[0, 1], [2.0, 5.0], [1, 2], [0, 1]]})")),
            "region");
  EXPECT_EQ(field_of(json::parse(R"({"metric": "frw", "region": [[0.0, 1], [0, 1], [0, 1], [0, 1]]})")), "region");
  EXPECT_EQ(field_of(json::array()), "config");
  EXPECT_EQ(field_of(json::object()), "");
}

TEST(Sampling, SeededAndInsideRegion) {
  const Region r{Interval{0, 1}, Interval{3, 10}, Interval{0.5, 2.5}, Interval{-1, -1}};
  const auto a = sample_points(r, 50, 7);
  const auto b = sample_points(r, 50, 7);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, sample_points(r, 50, 8));
  for (const Point& x : a) {
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_GE(x[i], r[i].first);
      EXPECT_LE(x[i], r[i].second);
    }
  }
  const auto s = generator_seeds(7, 5);
  EXPECT_EQ(std::set<std::uint64_t>(s.begin(), s.end()).size(), 5U);
  EXPECT_EQ(s, generator_seeds(7, 5));
}

TEST(Run, MinkowskiFlatPassesAtMachinePrecision) {
  ScenarioConfig c;
  c.metric = "minkowski";
  c.checks = {"flat"};
  c.n_points = 20;
  c.tolerance = 1e-12;
  const ResidualReport r = run(c);
  EXPECT_TRUE(r.all_pass);
  ASSERT_EQ(r.records.size(), 20U * 10U * 2U);
  for (const Record& rec : r.records) {
    EXPECT_EQ(rec.verdict, "pass");
    EXPECT_LE(rec.deviation, 1e-12);
  }
}

TEST(Run, SchwarzschildNonminimalAndUniqueness) {
  ScenarioConfig c;
  c.metric = "schwarzschild";
  c.checks = {"nonminimal_chain", "uniqueness"};
  c.couplings = {0.0, 0.5};
  c.n_points = 8;
  c.n_generators = 4;
  const ResidualReport r = run(c);
  EXPECT_TRUE(r.all_pass);
  double best_a0 = 0.0;
  for (const Record& rec : r.records) {
    if (rec.check == "nonminimal_chain") {
      EXPECT_EQ(rec.verdict, "pass");
      continue;
    }
    ASSERT_TRUE(rec.coupling.has_value());
    if (*rec.coupling == 0.5) {
      EXPECT_FALSE(rec.expected_nonzero);
      EXPECT_LE(*rec.residual, 1e-9);
    } else {
      EXPECT_TRUE(rec.expected_nonzero);
      best_a0 = std::max(best_a0, *rec.residual);
    }
    EXPECT_EQ(rec.verdict, "pass");
  }
  EXPECT_GE(best_a0, 1e-3);
}

TEST(Run, FrwScalarChain) {
  ScenarioConfig c;
  c.metric = "frw";
  c.checks = {"scalar_chain"};
  c.n_points = 20;
  const ResidualReport r = run(c);
  ASSERT_EQ(r.summary.size(), 1U);
  EXPECT_EQ(r.summary[0].verdict, "pass");
  EXPECT_LE(r.summary[0].max_deviation, 1e-9);
  EXPECT_GE(r.summary[0].max_obstruction.value_or(0.0), 1e-3);
}

TEST(Run, CompletenessAndOrdering) {
  ScenarioConfig c;
  c.metric = "de_sitter";
  c.n_points = 3;
  c.n_generators = 2;
  c.couplings = {0.0, 1.0, 0.5};
  const ResidualReport r = run(c);
  // Per point: geometry 4 + gens; scalar gens; rank2 gens*A; nonminimal 2*gens; uniqueness gens*A.
  const std::size_t g = 2;
  const std::size_t a = 3;
  const std::size_t per_point = (4 + g) + g + g * a + 2 * g + g * a;
  EXPECT_EQ(r.records.size(), 3 * per_point);
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    const Record& p = r.records[i - 1];
    const Record& q = r.records[i];
    const auto kp = std::make_pair(check_rank(p.check), p.point_index);
    const auto kq = std::make_pair(check_rank(q.check), q.point_index);
    EXPECT_LE(kp, kq);
  }
  EXPECT_TRUE(r.all_pass);
}

TEST(Run, FailingToleranceFails) {
  ScenarioConfig c;
  c.metric = "frw";
  c.checks = {"rank2_chain"};
  c.n_points = 2;
  c.n_generators = 2;
  c.tolerance = 1e-30;
  const ResidualReport r = run(c);
  EXPECT_FALSE(r.all_pass);
  EXPECT_EQ(report_to_json(r)["summary"]["verdict"], "fail");
}

TEST(Run, DeterministicAcrossRunsAndThreadCounts) {
  ScenarioConfig c;
  c.metric = "schwarzschild";
  c.n_points = 6;
  c.n_generators = 3;
  c.seed = 1234;
  ::setenv("SPIN2_THREADS", "1", 1);
  const std::string one = dump_without_wall_time(run(c));
  ::setenv("SPIN2_THREADS", "4", 1);
  const std::string four = dump_without_wall_time(run(c));
  ::unsetenv("SPIN2_THREADS");
  const std::string dflt = dump_without_wall_time(run(c));
  EXPECT_EQ(one, four);
  EXPECT_EQ(one, dflt);
  c.seed = 1235;
  EXPECT_NE(one, dump_without_wall_time(run(c)));
}

TEST(Run, ReportShape) {
  ScenarioConfig c;
  c.metric = "frw";
  c.n_points = 1;
  c.n_generators = 1;
  c.checks = {"geometry", "rank2_chain"};
  const auto j = report_to_json(run(c));
  for (const char* k : {"config", "records", "summary", "versions"}) EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_TRUE(j["summary"].contains("wall_time_s"));
  EXPECT_FALSE(report_to_json(run(c), false)["summary"].contains("wall_time_s"));
  const auto& rec = j["records"].back();
  for (const char* k : {"check", "quantity", "point_index", "point", "generator_seed", "A", "deviation", "scale", "verdict"}) {
    EXPECT_TRUE(rec.contains(k)) << k;
  }
  EXPECT_EQ(j["records"][0]["generator_seed"], nullptr);
  EXPECT_EQ(j["versions"]["signature"], "+,-,-,-");
}

TEST(Run, SingularPointsAreSkippedWithWarning) {
  ScenarioConfig c;
  c.metric = "schwarzschild";
  c.checks = {"geometry", "scalar_chain"};
  const ResolvedScenario s = resolve(c);
  const std::vector<GaugeGenerator> gens{GaugeGenerator::random(1, 2, GeneratorFamily::polynomial, {})};
  const auto recs = detail::evaluate_point(s, 0, {0.0, 2.1, 1.0, 0.0}, gens);
  ASSERT_EQ(recs.size(), 2U);
  for (const Record& r : recs) {
    EXPECT_EQ(r.verdict, "skipped");
    EXPECT_NE(r.warning.find("r >= "), std::string::npos);
  }
  ResidualReport rep;
  rep.records = recs;
  const auto sum = detail::summarize(s, recs);
  EXPECT_EQ(sum[0].skipped, 1);
  EXPECT_EQ(sum[0].verdict, "fail");  // nothing was actually checked
}

TEST(Sweep, MinkowskiIsExact) {
  ScenarioConfig c;
  c.n_points = 3;
  const auto r = convergence_sweep(c, {1e-2, 5e-3, 2.5e-3});
  EXPECT_TRUE(r.all_pass);
  for (const auto& q : r.quantities) EXPECT_TRUE(q.exact) << q.name;
  EXPECT_EQ(convergence_to_json(r)["quantities"][0]["order"], "exact");
}

TEST(Sweep, SecondOrderOnCurvedMetrics) {
  for (const char* m : {"schwarzschild", "de_sitter", "frw"}) {
    ScenarioConfig c;
    c.metric = m;
    c.n_points = 4;
    const auto r = convergence_sweep(c, {1e-2, 5e-3, 2.5e-3});
    EXPECT_TRUE(r.all_pass) << m;
    for (const auto& q : r.quantities) {
      EXPECT_TRUE(q.monotone);
      for (double p : q.orders) EXPECT_NEAR(p, kFiniteDifferenceOrder, 0.5) << m << " " << q.name;
    }
  }
}

TEST(Sweep, RoundoffDominatedStepsAreFlaggedNotFatal) {
  ScenarioConfig c;
  c.metric = "schwarzschild";
  c.n_points = 2;
  ConvergenceReport r;
  ASSERT_NO_THROW(r = convergence_sweep(c, {1e-6, 5e-7, 2.5e-7, 1.25e-7}));
  EXPECT_FALSE(r.all_pass);
  bool flagged = false;
  for (const auto& q : r.quantities) flagged = flagged || !q.monotone;
  EXPECT_TRUE(flagged);
}

TEST(Sweep, StepValidation) {
  ScenarioConfig c;
  EXPECT_THROW((void)convergence_sweep(c, {1e-2, 5e-3}), ConfigError);
  EXPECT_THROW((void)convergence_sweep(c, {1e-2, 1e-2, 5e-3}), ConfigError);
  EXPECT_THROW((void)convergence_sweep(c, {1e-2, -5e-3, -1e-2}), ConfigError);
}
