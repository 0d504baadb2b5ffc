#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "carbonplace/baselines.hpp"
#include "carbonplace/experiments.hpp"
#include "carbonplace/gen.hpp"

using namespace carbonplace;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kUsage = 2;
constexpr int kInvalid = 3;
constexpr int kInfeasible = 4;

struct Global {
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string out = "out";
  std::string config;
  std::vector<std::string> sets;
};

// --set key=value; the value is parsed as JSON when possible so numbers and booleans keep their type.
json overrides(const Global& g) {
  json c = json::object();
  if (!g.config.empty()) {
    try {
      c = json::parse(read_file(g.config));
    } catch (const json::parse_error& e) {
      throw ValidationError(g.config + ": " + e.what());
    }
  }
  for (const auto& kv : g.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    json v = json::parse(value, nullptr, false);
    if (v.is_discarded()) v = value;
    auto dot = key.find('.');
    if (dot == std::string::npos)
      c[key] = v;
    else
      c[key.substr(0, dot)][key.substr(dot + 1)] = v;
  }
  return c;
}

Scenario load(const std::string& path, const Global& g) {
  Scenario sc = load_scenario(path);
  json c = overrides(g);
  if (!c.empty()) apply_config(sc, c);
  if (g.seed_set) sc.seed = g.seed;
  validate_scenario(sc);
  return sc;
}

void write_out(const Global& g, const std::string& name, const std::string& content) {
  fs::create_directories(g.out);
  write_file((fs::path(g.out) / name).string(), content);
}

std::vector<std::uint64_t> seed_list(const std::vector<std::uint64_t>& seeds, int n, const Global& g) {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  for (int i = 0; i < n; ++i) out.push_back(g.seed + static_cast<std::uint64_t>(i));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"carbonplace: carbon- and cost-aware microservice placement simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "Root random seed")->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--config", g.config, "JSON file of scenario overrides");
  app.add_option("--set", g.sets, "Scenario override key=value (repeatable)");

  std::string scenario, strategy = "aceso";
  auto* run_cmd = app.add_subcommand("run", "Simulate one strategy on a scenario");
  run_cmd->add_option("--scenario", scenario)->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--strategy", strategy)->check(CLI::IsMember(strategy_names()));

  std::vector<std::string> strategies{"static", "aceso", "vanilla-ga", "sampling"};
  std::vector<std::uint64_t> seeds;
  int n_seeds = 1, threads = 1;
  auto* cmp = app.add_subcommand("compare", "Run strategies over seeds and normalize against static");
  cmp->add_option("--scenario", scenario)->required()->check(CLI::ExistingFile);
  cmp->add_option("--strategies", strategies)->delimiter(',')->check(CLI::IsMember(strategy_names()));
  cmp->add_option("--seeds", seeds, "Explicit seeds")->delimiter(',');
  cmp->add_option("--n-seeds", n_seeds, "Consecutive seeds starting at --seed")->check(CLI::PositiveNumber);
  cmp->add_option("--threads", threads)->check(CLI::PositiveNumber);

  auto* abl = app.add_subcommand("ablate", "Search-space ablation of the two prunings");
  abl->add_option("--scenario", scenario)->required()->check(CLI::ExistingFile);

  ScaleConfig scfg;
  std::string infra_dir = "fixtures/infra";
  auto* scl = app.add_subcommand("scale", "Solve time against application size, region set and SLO level");
  scl->add_option("--counts", scfg.counts)->delimiter(',')->check(CLI::PositiveNumber);
  scl->add_option("--regions", scfg.region_sets)->delimiter(',')->check(CLI::IsMember({"eu", "all"}));
  scl->add_option("--slo", scfg.slo_levels)->delimiter(',')->check(CLI::IsMember({"relaxed", "medium", "strict"}));
  scl->add_option("--seeds", scfg.seeds)->check(CLI::PositiveNumber);
  scl->add_option("--infra-dir", infra_dir, "Directory holding eu/ and all/ fixtures")->check(CLI::ExistingDirectory);
  scl->add_option("--generations", scfg.ga.max_generations);
  scl->add_option("--patience", scfg.ga.patience);

  std::string trace;
  double split = 0.7;
  auto* fc = app.add_subcommand("forecast-eval", "Held-out MAE of the traffic forecasters");
  fc->add_option("--trace", trace)->required()->check(CLI::ExistingFile);
  fc->add_option("--split", split)->check(CLI::Range(0.05, 0.95));

  std::string fixtures = "fixtures";
  int dag_size = 0;
  auto* gen = app.add_subcommand("gen", "Write synthetic fixtures");
  gen->add_option("--fixtures", fixtures, "Target directory");
  gen->add_option("--dag", dag_size, "Only write a random layered DAG with this many compute services to --out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*run_cmd) {
      Scenario sc = load(scenario, g);
      require_feasible_start(sc);
      auto strat = make_strategy(strategy);
      MetricsLog log = run(sc, *strat);
      json summary = summary_json(log);
      if (strategy != "static") {
        auto st = static_strategy();
        MetricsLog ref = run(sc, *st);
        summary["carbon_norm"] = log.total_carbon() / ref.total_carbon();
        summary["cost_norm"] = log.total_cost() / ref.total_cost();
        summary["latency_norm"] = log.mean_latency() / ref.mean_latency();
      } else {
        summary["carbon_norm"] = summary["cost_norm"] = summary["latency_norm"] = 1.0;
      }
      summary["mean_e2e_ms"] = mean_e2e(log);
      summary["artifacts"] = {"metrics.csv", "events.jsonl", "summary.json", "timing.json"};
      write_out(g, "metrics.csv", metrics_csv(log));
      write_out(g, "events.jsonl", events_jsonl(log));
      write_out(g, "summary.json", summary.dump(2) + "\n");
      write_out(g, "timing.json",
                json{{"total_solve_time_s", log.total_solve_time}, {"total_evaluations", log.total_evaluations}}.dump(2) +
                    "\n");
      std::cout << summary.dump(2) << "\n";
    } else if (*cmp) {
      Scenario sc = load(scenario, g);
      require_feasible_start(sc);
      Comparison c = compare(sc, strategies, seed_list(seeds, n_seeds, g), threads);
      write_out(g, "compare.csv", comparison_csv(c));
      write_out(g, "regions.csv", region_distribution_csv(c));
      std::cout << comparison_csv(c);
    } else if (*abl) {
      Scenario sc = load(scenario, g);
      auto rows = ablate(sc);
      write_out(g, "ablation.csv", ablation_csv(rows));
      std::cout << ablation_csv(rows);
    } else if (*scl) {
      scfg.seed = g.seed;
      scfg.ga.time_budget = 600;
      std::string text;
      for (const auto& set : scfg.region_sets) {
        Infra infra = load_infra((fs::path(infra_dir) / set).string());
        ScaleConfig one = scfg;
        one.region_sets = {set};
        auto rows = scale(infra, one);
        std::string csv = scale_csv(rows);
        text += text.empty() ? csv : csv.substr(csv.find('\n') + 1);
      }
      write_out(g, "scale.csv", text);
      std::cout << text;
    } else if (*fc) {
      auto scores = evaluate_forecasters(load_traffic(trace), split);
      write_out(g, "forecast.csv", forecast_csv(scores));
      std::cout << forecast_csv(scores);
    } else if (*gen) {
      if (dag_size > 0) {
        DagGenConfig dc;
        dc.compute = dag_size;
        dc.seed = g.seed;
        write_out(g, "app.json", app_to_json(random_layered_dag(dc)).dump(2) + "\n");
      } else {
        auto sum = write_fixtures(fixtures, g.seed);
        for (const auto& f : sum.files) std::cout << f << "\n";
      }
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
