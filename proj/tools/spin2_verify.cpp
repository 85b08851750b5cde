// spin2-verify: runs verification scenarios and finite-difference sweeps.
//
//   spin2-verify run   --config cfg.json [overrides] [--out report.json]
//   spin2-verify sweep --config cfg.json --steps 1e-2,5e-3,2.5e-3 [--out sweep.json]
//
// Exit status: 0 all checks pass, 1 some check failed, 2 usage or config error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spin2/scenario.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

spin2::ScenarioConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw spin2::ConfigError("config", "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw spin2::ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return spin2::parse_config(j);
}

struct Overrides {
  std::string metric;
  std::vector<std::string> params;
  int points = 0;
  std::string seed;
  std::vector<double> couplings;
  double tolerance = 0.0;
  std::vector<std::string> checks;
};

void apply(spin2::ScenarioConfig& c, const Overrides& o) {
  if (!o.metric.empty() && o.metric != c.metric) {
    // Parameters and region belong to the metric they were written for.
    c.metric = o.metric;
    c.params.clear();
    c.region.reset();
  }
  for (const auto& kv : o.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw spin2::ConfigError("--param", "expected key=value, got '" + kv + "'");
    try {
      std::size_t used = 0;
      const std::string value = kv.substr(eq + 1);
      c.params[kv.substr(0, eq)] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw spin2::ConfigError("--param", "value of '" + kv + "' is not a number");
    }
  }
  if (o.points != 0) c.n_points = o.points;
  if (!o.seed.empty()) {
    try {
      std::size_t used = 0;
      c.seed = std::stoull(o.seed, &used);
      if (used != o.seed.size()) throw std::invalid_argument(o.seed);
    } catch (const std::exception&) {
      throw spin2::ConfigError("--seed", "not an unsigned 64-bit integer: '" + o.seed + "'");
    }
  }
  if (!o.couplings.empty()) c.couplings = o.couplings;
  if (o.tolerance != 0.0) c.tolerance = o.tolerance;
  if (!o.checks.empty()) c.checks = o.checks;
}

void emit(const nlohmann::ordered_json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw spin2::ConfigError("--out", "cannot write '" + out + "'");
  f << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-2 gauge-structure verification on curved backgrounds", "spin2-verify"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  Overrides ov;

  auto* run = app.add_subcommand("run", "Run the configured checks and write a JSON report");
  run->add_option("--config", config_path, "Scenario config (JSON)");
  run->add_option("--metric", ov.metric, "Catalog metric: minkowski, schwarzschild, de_sitter, frw");
  run->add_option("--param", ov.params, "Metric parameter key=value (repeatable)");
  run->add_option("--points", ov.points, "Number of sample points");
  run->add_option("--seed", ov.seed, "Sampling seed");
  run->add_option("--coupling", ov.couplings, "Non-minimal coupling A (repeatable; replaces the list)");
  run->add_option("--tolerance", ov.tolerance, "Relative deviation bound");
  run->add_option("--check", ov.checks, "Check to run (repeatable; replaces the list)");
  run->add_option("--out", out, "Report path (default: stdout)");

  std::string steps_arg = "1e-2,5e-3,2.5e-3";
  auto* sweep = app.add_subcommand("sweep", "Finite-difference convergence of the curvature oracle");
  sweep->add_option("--config", config_path, "Scenario config (JSON)");
  sweep->add_option("--metric", ov.metric, "Catalog metric");
  sweep->add_option("--param", ov.params, "Metric parameter key=value (repeatable)");
  sweep->add_option("--points", ov.points, "Number of sample points");
  sweep->add_option("--seed", ov.seed, "Sampling seed");
  sweep->add_option("--steps", steps_arg, "Comma-separated decreasing step sizes");
  sweep->add_option("--out", out, "Report path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitUsage;
  }

  try {
    spin2::ScenarioConfig cfg = load_config(config_path);
    apply(cfg, ov);

    if (*run) {
      const spin2::ResidualReport rep = spin2::run(cfg);
      emit(spin2::report_to_json(rep), out);
      for (const auto& c : rep.summary) {
        std::cerr << (c.verdict == "pass" ? "PASS " : "FAIL ") << c.check << "  records=" << c.records
                  << " skipped=" << c.skipped << " max_deviation=" << c.max_deviation;
        if (!c.note.empty()) std::cerr << "  (" << c.note << ")";
        std::cerr << '\n';
      }
      return rep.all_pass ? kExitPass : kExitFail;
    }

    std::vector<double> steps;
    std::stringstream ss(steps_arg);
    for (std::string tok; std::getline(ss, tok, ',');) {
      try {
        steps.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw spin2::ConfigError("--steps", "not a number: '" + tok + "'");
      }
    }
    const spin2::ConvergenceReport rep = spin2::convergence_sweep(cfg, steps);
    emit(spin2::convergence_to_json(rep), out);
    for (const auto& q : rep.quantities) {
      std::cerr << (q.pass ? "PASS " : "FAIL ") << q.name;
      if (q.exact) {
        std::cerr << "  exact";
      } else {
        for (double p : q.orders) std::cerr << "  p=" << p;
      }
      if (!q.monotone) std::cerr << "  (non-monotone)";
      std::cerr << '\n';
    }
    return rep.all_pass ? kExitPass : kExitFail;
  } catch (const spin2::ConfigError& e) {
    std::cerr << "spin2-verify: config error: " << e.what() << '\n';
    return kExitUsage;
  }
}
