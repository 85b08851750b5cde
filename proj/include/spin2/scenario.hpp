#pragma once

// Scenario runner: config parsing, seeded sampling, parallel evaluation of the
// verification checks and the JSON report.  The CLI is a thin shell over this.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "spin2/field_equations.hpp"
#include "spin2/finite_difference.hpp"
#include "spin2/gauge_generator.hpp"
#include "spin2/geometry.hpp"
#include "spin2/metric.hpp"
#include "spin2/spin2_fields.hpp"

namespace spin2 {

inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr int kReportSchema = 1;
/// A residual counts as "visibly nonzero" above this fraction of its scale.
inline constexpr double kWitnessThreshold = 1e-3;

/// Invalid configuration; `field` names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& msg)
      : std::runtime_error(field + ": " + msg), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Canonical check order; records are sorted by this rank first.
inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{"geometry",         "flat",      "scalar_chain", "rank2_chain",
                                              "nonminimal_chain", "uniqueness"};
  return names;
}

inline int check_rank(const std::string& name) {
  const auto& n = check_names();
  const auto it = std::find(n.begin(), n.end(), name);
  return it == n.end() ? -1 : static_cast<int>(it - n.begin());
}

struct ScenarioConfig {
  std::string metric = "minkowski";
  ParamMap params;
  std::optional<Region> region;  // defaults to the chart's sampling box
  int n_points = 20;
  std::uint64_t seed = 1;
  GeneratorFamily family = GeneratorFamily::polynomial;
  int degree = 4;
  int n_generators = 10;
  std::vector<double> couplings{0.0, 0.25, 0.5, 1.0};
  double tolerance = 1e-9;
  std::vector<std::string> checks;  // empty: every check the metric supports
};

namespace detail {

template <class T>
T get_field(const nlohmann::json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(field, std::string("wrong type (") + e.what() + ")");
  }
}

inline void reject_unknown(const nlohmann::json& j, const std::vector<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw ConfigError(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
    }
  }
}

}  // namespace detail

/// Parses the config schema documented in the README.  Missing keys keep
/// their defaults; unknown keys are errors.
inline ScenarioConfig parse_config(const nlohmann::json& j) {
  using detail::get_field;
  if (!j.is_object()) throw ConfigError("config", "top level must be a JSON object");
  detail::reject_unknown(j, {"metric", "region", "n_points", "seed", "generator", "couplings", "tolerance", "checks"},
                         "");
  ScenarioConfig c;
  if (j.contains("metric")) {
    const auto& m = j.at("metric");
    if (m.is_string()) {
      c.metric = m.get<std::string>();
    } else if (m.is_object()) {
      detail::reject_unknown(m, {"name", "params"}, "metric");
      if (!m.contains("name")) throw ConfigError("metric.name", "missing");
      c.metric = get_field<std::string>(m.at("name"), "metric.name");
      if (m.contains("params")) {
        const auto& p = m.at("params");
        if (!p.is_object()) throw ConfigError("metric.params", "must be an object");
        for (auto it = p.begin(); it != p.end(); ++it) {
          c.params[it.key()] = get_field<double>(it.value(), "metric.params." + it.key());
        }
      }
    } else {
      throw ConfigError("metric", "must be a name or {name, params}");
    }
  }
  if (j.contains("region")) {
    const auto& r = j.at("region");
    if (!r.is_array() || r.size() != kDim) throw ConfigError("region", "must be 4 [lo, hi] intervals");
    Region reg{};
    for (std::size_t i = 0; i < kDim; ++i) {
      const std::string f = "region[" + std::to_string(i) + "]";
      if (!r[i].is_array() || r[i].size() != 2) throw ConfigError(f, "must be [lo, hi]");
      reg[i] = {get_field<double>(r[i][0], f), get_field<double>(r[i][1], f)};
    }
    c.region = reg;
  }
  if (j.contains("n_points")) c.n_points = get_field<int>(j.at("n_points"), "n_points");
  if (j.contains("seed")) c.seed = get_field<std::uint64_t>(j.at("seed"), "seed");
  if (j.contains("generator")) {
    const auto& g = j.at("generator");
    if (!g.is_object()) throw ConfigError("generator", "must be an object");
    detail::reject_unknown(g, {"family", "degree", "count"}, "generator");
    if (g.contains("family")) {
      try {
        c.family = parse_family(get_field<std::string>(g.at("family"), "generator.family"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("generator.family", e.what());
      }
    }
    if (g.contains("degree")) c.degree = get_field<int>(g.at("degree"), "generator.degree");
    if (g.contains("count")) c.n_generators = get_field<int>(g.at("count"), "generator.count");
  }
  if (j.contains("couplings")) c.couplings = get_field<std::vector<double>>(j.at("couplings"), "couplings");
  if (j.contains("tolerance")) c.tolerance = get_field<double>(j.at("tolerance"), "tolerance");
  if (j.contains("checks")) c.checks = get_field<std::vector<std::string>>(j.at("checks"), "checks");
  return c;
}

inline nlohmann::ordered_json config_to_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["metric"]["name"] = c.metric;
  j["metric"]["params"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : c.params) j["metric"]["params"][k] = v;
  if (c.region) {
    j["region"] = nlohmann::ordered_json::array();
    for (const auto& [lo, hi] : *c.region) j["region"].push_back({lo, hi});
  }
  j["n_points"] = c.n_points;
  j["seed"] = c.seed;
  j["generator"] = {{"family", to_string(c.family)}, {"degree", c.degree}, {"count", c.n_generators}};
  j["couplings"] = c.couplings;
  j["tolerance"] = c.tolerance;
  j["checks"] = c.checks;
  return j;
}

/// A config with every default resolved against its metric.
struct ResolvedScenario {
  ScenarioConfig config;
  std::unique_ptr<MetricChart> chart;
  Region region{};
  std::vector<std::string> checks;
};

/// Validates `c` and fills in metric-dependent defaults.  Throws ConfigError.
inline ResolvedScenario resolve(const ScenarioConfig& c) {
  ResolvedScenario r;
  r.config = c;
  try {
    r.chart = make_chart(c.metric, c.params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("metric", e.what());
  }
  // The chart may have merged in default parameters; echo them.
  r.config.params = r.chart->params();

  if (c.n_points < 1) throw ConfigError("n_points", "must be >= 1");
  if (c.n_generators < 1) throw ConfigError("generator.count", "must be >= 1");
  if (c.degree < 0 || c.degree > 4) throw ConfigError("generator.degree", "must be in [0, 4]");
  if (!(c.tolerance > 0.0) || !std::isfinite(c.tolerance)) throw ConfigError("tolerance", "must be finite and > 0");
  if (c.couplings.empty()) throw ConfigError("couplings", "must not be empty");
  for (double a : c.couplings) {
    if (!std::isfinite(a)) throw ConfigError("couplings", "values must be finite");
  }

  r.region = c.region.value_or(r.chart->default_region());
  for (std::size_t i = 0; i < kDim; ++i) {
    const auto [lo, hi] = r.region[i];
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
      throw ConfigError("region[" + std::to_string(i) + "]", "need finite lo <= hi");
    }
  }
  // Every guard is a bound on a single coordinate, so the corners decide.
  for (int corner = 0; corner < 16; ++corner) {
    Point x{};
    for (std::size_t i = 0; i < kDim; ++i) x[i] = (corner >> i) & 1 ? r.region[i].second : r.region[i].first;
    try {
      r.chart->check_point(x);
    } catch (const DomainError& e) {
      throw ConfigError("region", std::string("not inside the metric's valid region (") + e.what() + ")");
    }
  }

  if (c.checks.empty()) {
    for (const auto& n : check_names()) {
      if (n != "flat" || r.chart->is_flat()) r.checks.push_back(n);
    }
  } else {
    for (const auto& n : c.checks) {
      if (check_rank(n) < 0) throw ConfigError("checks", "unknown check '" + n + "'");
      if (std::find(r.checks.begin(), r.checks.end(), n) != r.checks.end()) {
        throw ConfigError("checks", "duplicate check '" + n + "'");
      }
      r.checks.push_back(n);
    }
    if (std::find(r.checks.begin(), r.checks.end(), "flat") != r.checks.end() && !r.chart->is_flat()) {
      throw ConfigError("checks", "'flat' requires metric 'minkowski'");
    }
    std::sort(r.checks.begin(), r.checks.end(),
              [](const std::string& a, const std::string& b) { return check_rank(a) < check_rank(b); });
  }
  r.config.checks = r.checks;
  r.config.region = r.region;
  return r;
}

/// Uniform seeded samples over `region`.
inline std::vector<Point> sample_points(const Region& region, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point> pts(static_cast<std::size_t>(n));
  for (Point& x : pts) {
    for (std::size_t i = 0; i < kDim; ++i) {
      std::uniform_real_distribution<double> u(region[i].first, region[i].second);
      x[i] = region[i].first == region[i].second ? region[i].first : u(rng);
    }
  }
  return pts;
}

/// Generator seeds come from a stream separate from the point stream, so
/// changing n_points does not reshuffle the generators.
inline std::vector<std::uint64_t> generator_seeds(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::uint64_t> out(static_cast<std::size_t>(n));
  for (auto& s : out) s = rng();
  return out;
}

inline Point region_center(const Region& r) {
  Point c{};
  for (std::size_t i = 0; i < kDim; ++i) c[i] = 0.5 * (r[i].first + r[i].second);
  return c;
}

struct Record {
  std::string check;
  std::string quantity;
  int point_index = 0;
  Point point{};
  int generator_index = -1;  // -1: not generator dependent
  std::uint64_t generator_seed = 0;
  std::optional<double> coupling;
  double deviation = 0.0;
  double scale = 0.0;
  std::string verdict;                // pass, fail, skipped
  std::optional<double> obstruction;  // |closed-form side| / scale
  std::optional<double> residual;     // |direct residual| / scale
  bool expected_nonzero = false;
  std::string warning;
};

struct CheckSummary {
  std::string check;
  int records = 0;
  int skipped = 0;
  double max_deviation = 0.0;
  std::optional<double> max_obstruction;
  std::map<double, double> max_residual_by_coupling;  // uniqueness only
  std::string verdict;
  std::string note;
};

struct ResidualReport {
  ScenarioConfig config;  // resolved
  std::vector<Record> records;
  std::vector<CheckSummary> summary;
  bool all_pass = true;
  double wall_time_s = 0.0;
};

namespace detail {

inline void finish(Record& r, double tol) {
  if (r.verdict.empty()) r.verdict = std::isfinite(r.deviation) && r.deviation <= tol ? "pass" : "fail";
}

inline Record make_record(const std::string& check, const std::string& quantity, int pi, const Point& x) {
  Record r;
  r.check = check;
  r.quantity = quantity;
  r.point_index = pi;
  r.point = x;
  return r;
}

inline Record from_deviation(Record r, const Deviation& d) {
  r.deviation = d.relative();
  r.scale = d.scale;
  return r;
}

/// All records of one point, in (check, generator, coupling) order.
inline std::vector<Record> evaluate_point(const ResolvedScenario& s, int pi, const Point& x,
                                          const std::vector<GaugeGenerator>& gens) {
  const double tol = s.config.tolerance;
  const MetricChart& chart = *s.chart;
  std::vector<Record> out;
  auto push = [&](Record r) {
    finish(r, tol);
    out.push_back(std::move(r));
  };

  std::optional<CurvatureBundle> bundle;
  try {
    bundle.emplace(curvature(chart, x));
  } catch (const DomainError& e) {
    for (const auto& check : s.checks) {
      Record r = make_record(check, "", pi, x);
      r.verdict = "skipped";
      r.warning = e.what();
      out.push_back(std::move(r));
    }
    return out;
  }
  const CurvatureBundle& b = *bundle;
  const bool curved_ricci_flat = chart.is_ricci_flat() && !chart.is_flat();

  std::vector<Jet> lambdas;
  std::vector<Spin2Multiplet> multiplets;
  for (const auto& g : gens) {
    lambdas.push_back(g.partials(x, kMaxJetOrder));
    multiplets.push_back(assemble_gauge_multiplet(lambdas.back(), b));
  }
  auto for_generators = [&](const std::string& check, const std::string& quantity, auto&& fn) {
    for (std::size_t gi = 0; gi < gens.size(); ++gi) {
      Record r = make_record(check, quantity, pi, x);
      r.generator_index = static_cast<int>(gi);
      r.generator_seed = gens[gi].seed();
      fn(r, lambdas[gi], multiplets[gi]);
      push(std::move(r));
    }
  };

  for (const auto& check : s.checks) {
    if (check == "geometry") {
      push(from_deviation(make_record(check, "metric_compatibility", pi, x), metric_compatibility_check(b)));
      push(from_deviation(make_record(check, "riemann_symmetry", pi, x), riemann_symmetry_check(b)));
      push(from_deviation(make_record(check, "ricci_symmetry", pi, x), ricci_symmetry_check(b)));
      push(from_deviation(make_record(check, "bianchi", pi, x), bianchi_contracted_check(b)));
      if (curved_ricci_flat) {
        const Deviation d{max_abs_value(b.ricci()), max_abs_value(b.riemann())};
        push(from_deviation(make_record(check, "ricci_flatness", pi, x), d));
      }
      for_generators(check, "commutator", [&](Record& r, const Jet& lam, const Spin2Multiplet&) {
        r = from_deviation(r, commutator_check(b, lam).worst(covector_commutator_check(b, lam)));
      });
    } else if (check == "flat") {
      for_generators(check, "first_order", [&](Record& r, const Jet&, const Spin2Multiplet& m) {
        r = from_deviation(r, flat_first_order_residuals(m).worst());
      });
      for_generators(check, "second_order", [&](Record& r, const Jet&, const Spin2Multiplet& m) {
        r = from_deviation(r, flat_second_order_residuals(m.phi, m.phi2).worst());
      });
    } else if (check == "scalar_chain") {
      for_generators(check, "scalar", [&](Record& r, const Jet& lam, const Spin2Multiplet& m) {
        const auto cmp = compare(residual_scalar_eq(m, b), obstruction_scalar(lam, b));
        r.deviation = cmp.deviation;
        r.scale = cmp.scale;
        r.obstruction = Deviation{max_abs_value(cmp.formula), cmp.scale}.relative();
      });
    } else if (check == "rank2_chain") {
      for (std::size_t gi = 0; gi < gens.size(); ++gi) {
        for (double a : s.config.couplings) {
          Record r = make_record(check, "rank2", pi, x);
          r.generator_index = static_cast<int>(gi);
          r.generator_seed = gens[gi].seed();
          r.coupling = a;
          const CouplingConfig cc{a};
          const Jet formula = obstruction_rank2(lambdas[gi], b) - nonminimal_contribution(lambdas[gi], b, cc);
          const auto cmp = compare(residual_rank2_eq(multiplets[gi], b, cc), formula);
          r.deviation = cmp.deviation;
          r.scale = cmp.scale;
          r.obstruction = Deviation{max_abs_value(formula), cmp.scale}.relative();
          push(std::move(r));
        }
      }
    } else if (check == "nonminimal_chain") {
      const CouplingConfig half{0.5};
      for_generators(check, "cancellation", [&](Record& r, const Jet& lam, const Spin2Multiplet& m) {
        r.coupling = 0.5;
        const Residual res = residual_rank2_eq(m, b, half);
        const auto cmp = compare(res, obstruction_rank2_nonminimal(lam, b));
        r.deviation = cmp.deviation;
        r.scale = cmp.scale;
        r.obstruction = Deviation{max_abs_value(cmp.formula), cmp.scale}.relative();
        r.residual = Deviation{max_abs_value(res.value), res.scale}.relative();
        // On a Ricci-flat background the residual itself must vanish.
        if (curved_ricci_flat) r.deviation = std::max(r.deviation, *r.residual);
      });
      for_generators(check, "contribution", [&](Record& r, const Jet& lam, const Spin2Multiplet& m) {
        r.coupling = 0.5;
        const Jet direct = nonminimal_direct(m.phi2, b, half);
        const Jet via_l = nonminimal_contribution(lam, b, half);
        r = from_deviation(r, {max_abs_diff(direct, via_l), std::max(max_abs_value(direct), max_abs_value(via_l))});
      });
    } else if (check == "uniqueness") {
      for (std::size_t gi = 0; gi < gens.size(); ++gi) {
        const Residual half = residual_rank2_eq(multiplets[gi], b, {0.5});
        const Jet kernel = nonminimal_contribution(lambdas[gi], b, {0.5});
        for (double a : s.config.couplings) {
          Record r = make_record(check, "proportionality", pi, x);
          r.generator_index = static_cast<int>(gi);
          r.generator_seed = gens[gi].seed();
          r.coupling = a;
          const Residual res = residual_rank2_eq(multiplets[gi], b, {a});
          // res(A) - res(1/2) = (1 - 2A) (Riemann term + 1/2 R_ab div L)
          const Jet predicted = (1.0 - 2.0 * a) * kernel;
          r.scale = std::max(res.scale, half.scale);
          r.deviation = Deviation{max_abs_diff(res.value - half.value, predicted), r.scale}.relative();
          r.residual = Deviation{max_abs_value(res.value), res.scale}.relative();
          r.expected_nonzero = curved_ricci_flat && a != 0.5;
          if (curved_ricci_flat && a == 0.5) r.deviation = std::max(r.deviation, *r.residual);
          push(std::move(r));
        }
      }
    }
  }
  return out;
}

inline unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SPIN2_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) n = std::min(n, static_cast<unsigned>(v));
    } catch (const std::exception&) {
      // ignored: an unparsable cap leaves the default
    }
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

inline std::vector<CheckSummary> summarize(const ResolvedScenario& s, const std::vector<Record>& records) {
  std::vector<CheckSummary> out;
  for (const auto& check : s.checks) {
    CheckSummary cs;
    cs.check = check;
    bool ok = true;
    for (const Record& r : records) {
      if (r.check != check) continue;
      ++cs.records;
      if (r.verdict == "skipped") {
        ++cs.skipped;
        continue;
      }
      if (r.verdict != "pass") ok = false;
      cs.max_deviation = std::max(cs.max_deviation, r.deviation);
      if (r.obstruction) cs.max_obstruction = std::max(cs.max_obstruction.value_or(0.0), *r.obstruction);
      if (check == "uniqueness" && r.coupling && r.residual) {
        double& m = cs.max_residual_by_coupling[*r.coupling];
        m = std::max(m, *r.residual);
      }
    }
    if (check == "uniqueness" && s.chart->is_ricci_flat() && !s.chart->is_flat()) {
      for (const auto& [a, m] : cs.max_residual_by_coupling) {
        if (a != 0.5 && m < kWitnessThreshold) {
          ok = false;
          cs.note = "coupling " + std::to_string(a) + " never produced a visibly nonzero residual";
        }
      }
    }
    if (cs.records == cs.skipped) {
      ok = false;
      cs.note = "every record was skipped";
    }
    cs.verdict = ok ? "pass" : "fail";
    out.push_back(std::move(cs));
  }
  return out;
}

}  // namespace detail

/// Runs every requested check at every sampled point.  Deterministic in the
/// config; SPIN2_THREADS caps the number of worker threads.
inline ResidualReport run(const ScenarioConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const ResolvedScenario s = resolve(config);
  const auto points = sample_points(s.region, s.config.n_points, s.config.seed);
  const Point center = region_center(s.region);
  std::vector<GaugeGenerator> gens;
  for (std::uint64_t gs : generator_seeds(s.config.seed, s.config.n_generators)) {
    gens.push_back(GaugeGenerator::random(gs, s.config.degree, s.config.family, center));
  }

  std::vector<std::vector<Record>> per_point(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      per_point[i] = detail::evaluate_point(s, static_cast<int>(i), points[i], gens);
    }
  };
  const unsigned n_workers = detail::worker_count(points.size());
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ResidualReport rep;
  rep.config = s.config;
  for (auto& v : per_point) {
    for (auto& r : v) rep.records.push_back(std::move(r));
  }
  // Production order within a point is (check, generator, coupling); the
  // stable sort only needs to pull checks ahead of points.
  std::stable_sort(rep.records.begin(), rep.records.end(), [](const Record& a, const Record& b) {
    const int ca = check_rank(a.check);
    const int cb = check_rank(b.check);
    return ca != cb ? ca < cb : a.point_index < b.point_index;
  });
  rep.summary = detail::summarize(s, rep.records);
  rep.all_pass = std::all_of(rep.summary.begin(), rep.summary.end(),
                             [](const CheckSummary& c) { return c.verdict == "pass"; });
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

namespace detail {

/// Non-finite doubles have no JSON spelling; they become null.
inline nlohmann::ordered_json number(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json versions_json() {
  return {
      {"artifact", kArtifactVersion},
      {"report_schema", kReportSchema},
      {"signature", "+,-,-,-"},
      {"riemann", "R^r_smn = d_m G^r_ns - d_n G^r_ms + G^r_ml G^l_ns - G^r_nl G^l_ms"},
      {"ricci", "R_sn = R^r_srn"},
      {"commutator", "(nabla_b nabla_a - nabla_a nabla_b) L_r = R_bars L^s"},
      {"jet_order", kMaxJetOrder},
      {"fd_order", kFiniteDifferenceOrder},
  };
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const ResidualReport& rep, bool include_wall_time = true) {
  using detail::number;
  nlohmann::ordered_json j;
  j["config"] = config_to_json(rep.config);
  j["records"] = nlohmann::ordered_json::array();
  for (const Record& r : rep.records) {
    nlohmann::ordered_json o;
    o["check"] = r.check;
    o["quantity"] = r.quantity;
    o["point_index"] = r.point_index;
    o["point"] = r.point;
    o["generator_seed"] = r.generator_index < 0 ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.generator_seed);
    o["A"] = r.coupling ? number(*r.coupling) : nlohmann::ordered_json(nullptr);
    o["deviation"] = number(r.deviation);
    o["scale"] = number(r.scale);
    o["verdict"] = r.verdict;
    if (r.obstruction) o["obstruction"] = number(*r.obstruction);
    if (r.residual) o["residual"] = number(*r.residual);
    if (r.expected_nonzero) o["expected_nonzero"] = true;
    if (!r.warning.empty()) o["warning"] = r.warning;
    j["records"].push_back(std::move(o));
  }
  nlohmann::ordered_json checks = nlohmann::ordered_json::object();
  for (const CheckSummary& c : rep.summary) {
    nlohmann::ordered_json o;
    o["records"] = c.records;
    o["skipped"] = c.skipped;
    o["max_deviation"] = number(c.max_deviation);
    if (c.max_obstruction) o["max_obstruction"] = number(*c.max_obstruction);
    if (!c.max_residual_by_coupling.empty()) {
      o["max_residual_by_A"] = nlohmann::ordered_json::array();
      for (const auto& [a, m] : c.max_residual_by_coupling) o["max_residual_by_A"].push_back({{"A", a}, {"max", number(m)}});
    }
    o["verdict"] = c.verdict;
    if (!c.note.empty()) o["note"] = c.note;
    checks[c.check] = std::move(o);
  }
  j["summary"]["checks"] = std::move(checks);
  j["summary"]["verdict"] = rep.all_pass ? "pass" : "fail";
  if (include_wall_time) j["summary"]["wall_time_s"] = rep.wall_time_s;
  j["versions"] = detail::versions_json();
  return j;
}

// ---------------------------------------------------------------------------
// Finite-difference convergence sweep
// ---------------------------------------------------------------------------

struct ConvergenceQuantity {
  std::string name;
  std::vector<double> errors;  // max over points, one per step
  std::vector<double> orders;  // observed order between consecutive steps
  bool exact = false;
  bool monotone = true;
  bool pass = false;
};

struct ConvergenceReport {
  ScenarioConfig config;
  std::vector<double> steps;
  int nominal_order = kFiniteDifferenceOrder;
  std::vector<ConvergenceQuantity> quantities;
  bool all_pass = true;
};

/// Finite-difference curvature against the closed form over decreasing steps.
/// Observed orders must sit within 0.5 of the stencil's nominal order.
inline ConvergenceReport convergence_sweep(const ScenarioConfig& config, const std::vector<double>& steps) {
  if (steps.size() < 3) throw ConfigError("steps", "need at least 3 step sizes");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(steps[i] > 0.0) || !std::isfinite(steps[i])) throw ConfigError("steps", "must be finite and > 0");
    if (i > 0 && !(steps[i] < steps[i - 1])) throw ConfigError("steps", "must be strictly decreasing");
  }
  const ResolvedScenario s = resolve(config);
  // Stencil points reach one step past the sampled point in each direction.
  Region inner = s.region;
  for (std::size_t i = 0; i < kDim; ++i) {
    const double pad = std::min(steps.front(), 0.5 * (inner[i].second - inner[i].first));
    inner[i] = {inner[i].first + pad, inner[i].second - pad};
  }
  const auto points = sample_points(inner, s.config.n_points, s.config.seed);

  ConvergenceReport rep;
  rep.config = s.config;
  rep.steps = steps;
  std::vector<ConvergenceQuantity> q(3);
  q[0].name = "christoffel";
  q[1].name = "riemann";
  q[2].name = "ricci";
  for (auto& qq : q) qq.errors.assign(steps.size(), 0.0);

  for (const Point& x : points) {
    const PlainCurvature exact = plain_curvature(exact_metric_partials(*s.chart, x));
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const PlainCurvature fd = plain_curvature(fd_metric_partials(*s.chart, x, steps[k]));
      auto diff = [](const auto& a, const auto& b) {
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
        return m;
      };
      q[0].errors[k] = std::max(q[0].errors[k], diff(exact.christoffel, fd.christoffel));
      q[1].errors[k] = std::max(q[1].errors[k], diff(exact.riemann, fd.riemann));
      q[2].errors[k] = std::max(q[2].errors[k], diff(exact.ricci, fd.ricci));
    }
  }

  for (auto& qq : q) {
    qq.exact = std::all_of(qq.errors.begin(), qq.errors.end(), [](double e) { return e == 0.0; });
    if (qq.exact) {
      qq.pass = true;
    } else {
      qq.pass = true;
      for (std::size_t k = 1; k < steps.size(); ++k) {
        if (!(qq.errors[k] < qq.errors[k - 1])) qq.monotone = false;
        const double p = std::log(qq.errors[k - 1] / qq.errors[k]) / std::log(steps[k - 1] / steps[k]);
        qq.orders.push_back(p);
        if (!std::isfinite(p) || std::abs(p - rep.nominal_order) > 0.5) qq.pass = false;
      }
    }
    rep.all_pass = rep.all_pass && qq.pass;
  }
  rep.quantities = std::move(q);
  return rep;
}

inline nlohmann::ordered_json convergence_to_json(const ConvergenceReport& rep) {
  nlohmann::ordered_json j;
  j["config"] = config_to_json(rep.config);
  j["steps"] = rep.steps;
  j["nominal_order"] = rep.nominal_order;
  j["quantities"] = nlohmann::ordered_json::array();
  for (const auto& q : rep.quantities) {
    nlohmann::ordered_json o;
    o["name"] = q.name;
    o["errors"] = nlohmann::ordered_json::array();
    for (double e : q.errors) o["errors"].push_back(detail::number(e));
    if (q.exact) {
      o["order"] = "exact";
    } else {
      o["order"] = nlohmann::ordered_json::array();
      for (double p : q.orders) o["order"].push_back(detail::number(p));
    }
    o["monotone"] = q.monotone;
    o["verdict"] = q.pass ? "pass" : "fail";
    j["quantities"].push_back(std::move(o));
  }
  j["verdict"] = rep.all_pass ? "pass" : "fail";
  j["versions"] = detail::versions_json();
  return j;
}

}  // namespace spin2
