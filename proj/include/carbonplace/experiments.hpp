#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "carbonplace/simulator.hpp"
#include "json.hpp"

namespace carbonplace {

struct CompareRow {
  std::string strategy;
  std::uint64_t seed = 0;
  double carbon_g = 0.0;
  double cost_usd = 0.0;
  double mean_latency_ms = 0.0;
  double mean_e2e_ms = 0.0;
  double violation_rate = 0.0;
  double solve_time_s = 0.0;
  double carbon_norm = 0.0;
  double cost_norm = 0.0;
  double latency_norm = 0.0;
  double solve_time_norm = 0.0;
  double changes_per_day = 0.0;
  double adaptation_rate = -1.0;  // negative when no trigger fired
  int changes = 0;
  std::vector<double> region_share;  // mean fraction of services per allowed region
};

struct Comparison {
  std::vector<std::string> regions;
  std::vector<CompareRow> rows;
};

// Runs every (strategy, seed) cell; metrics are normalized against the static run with the same seed.
Comparison compare(const Scenario& sc, const std::vector<std::string>& strategies,
                   const std::vector<std::uint64_t>& seeds, int threads = 1);
std::string comparison_csv(const Comparison& c);
std::string region_distribution_csv(const Comparison& c);

double mean_e2e(const MetricsLog& log);

// One decision context at the scenario start, used by the ablation and static experiments.
OptContext initial_context(const Scenario& sc);
// Throws InfeasibleError when all-in-base already violates the SLO at the scenario start.
void require_feasible_start(const Scenario& sc);

struct AblationRow {
  std::string variant;
  std::size_t retained = 0;
  std::size_t movable = 0;
  double search_space_log10 = 0.0;
  double solve_time_s = 0.0;
  double objective = 0.0;
  std::int64_t evaluations = 0;
};
std::vector<AblationRow> ablate(const Scenario& sc);
std::string ablation_csv(const std::vector<AblationRow>& rows);

struct ScaleConfig {
  std::vector<int> counts{100};
  std::vector<std::string> region_sets{"eu"};
  std::vector<std::string> slo_levels{"relaxed", "medium", "strict"};
  int seeds = 1;
  std::uint64_t seed = 1;
  GaConfig ga;
};

struct ScaleRow {
  int services = 0;
  std::string region_set;
  std::string slo_level;
  std::uint64_t seed = 0;
  std::size_t movable = 0;
  std::size_t retained = 0;
  double slo_ms = 0.0;
  double base_latency_ms = 0.0;
  double search_space_log10 = 0.0;
  int generations = 0;
  std::int64_t evaluations = 0;
  double solve_time_s = 0.0;
};

// Synthetic layered apps of each size solved once on a region fixture at its first hour.
std::vector<ScaleRow> scale(const Infra& infra, const ScaleConfig& cfg);
std::string scale_csv(const std::vector<ScaleRow>& rows);
// Least-squares slope of log(solve time) against log(services).
double fitted_exponent(const std::vector<double>& services, const std::vector<double>& seconds);

std::string forecast_csv(const std::vector<ForecastScore>& scores);

}  // namespace carbonplace
