#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "carbonplace/app_model.hpp"
#include "carbonplace/forecaster.hpp"
#include "carbonplace/infra.hpp"
#include "carbonplace/optimizer.hpp"
#include "carbonplace/profiler.hpp"
#include "json.hpp"

namespace carbonplace {

enum class CiForecast { kLookahead, kPersistence };

struct Scenario {
  std::string id;
  AppDag app;
  Infra infra;
  TrafficTrace traffic;
  BucketTable profiles;
  std::string base_region;
  std::vector<std::string> regions_allowed;
  double slo_ms = 300.0;
  // Latency quantile the optimizer protects; 0 constrains the jitter-free
  // latency directly.
  double slo_percentile = 0.99;
  Weights weights;
  PinPolicy pin;
  bool region_filter = true;
  GaConfig ga;
  Timestamp start = 0;
  Timestamp end = 0;
  double jitter_sigma = 0.15;
  int migration_delay = 1;  // ticks
  double request_payload_gb = 0.0;
  double image_gb = 0.5;
  int violation_draws = 1000;
  bool use_forecaster = true;  // false: react to observed traffic every tick
  CiForecast ci_forecast = CiForecast::kLookahead;
  GbdtConfig forecaster;
  int retrain_hours = 168;
  std::uint64_t seed = 1;
};

// Loads scenario.json; referenced files resolve relative to its directory.
Scenario load_scenario(const std::string& path);
// Applies config keys (w_carbon, w_cost, slo_ms, theta, regions_allowed, ga.*, seed, ...).
void apply_config(Scenario& sc, const nlohmann::json& config);
void validate_scenario(const Scenario& sc);

// Bound handed to the optimizer so the jittered latency quantile stays within the SLO.
double effective_slo(const Scenario& sc);

double e2e_latency(const AppDag& dag, const Placement& p, const std::vector<Metrics>& profiles, const RttMatrix& rtt);
double e2e_latency(const AppDag& dag, const Placement& p, const BucketTable& table, double traffic, const RttMatrix& rtt);

struct ViolationStats {
  double violation_frac = 0.0;
  double mean_latency = 0.0;
};
ViolationStats jittered_latency(double e2e_ms, double slo, double jitter_sigma, int n_draws, std::uint64_t seed);
double violation_rate(double e2e_ms, double slo, double jitter_sigma, int n_draws, std::uint64_t seed);

double carbon_step(const AppDag& dag, const Placement& p, const std::vector<Metrics>& profiles,
                   const std::map<std::string, double>& ci_at_t, Timestamp dt = kTick);

struct CostInputs {
  double traffic = 0.0;
  double request_payload_gb = 0.0;
  double image_gb = 0.0;
  std::size_t replicated_regions = 1;
};
struct CostBreakdown {
  double compute = 0.0;
  double storage = 0.0;
  double egress = 0.0;
  double total() const { return compute + storage + egress; }
};
CostBreakdown cost_step(const AppDag& dag, const Placement& p, const std::vector<Metrics>& profiles,
                        const PricingCatalog& catalog, const CostInputs& in, Timestamp dt = kTick);

struct DecisionContext {
  OptContext opt;
  Placement current;
  Timestamp time = 0;
  int index = 0;
};

struct Decision {
  Placement placement;
  double solve_time = 0.0;
  std::int64_t evaluations = 0;
  double search_space_log10 = 0.0;
  std::vector<std::string> retained;
  bool infeasible = false;
};

class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::string name() const = 0;
  virtual void configure(const Scenario&) {}
  virtual Decision decide(const DecisionContext& ctx) = 0;
};

struct TickRecord {
  Timestamp t = 0;
  double traffic = 0.0;
  double carbon_g = 0.0;
  double cost_usd = 0.0;
  CostBreakdown cost;
  double migration_usd = 0.0;
  double mean_latency_ms = 0.0;
  double e2e_ms = 0.0;
  double slo_violation_frac = 0.0;
  bool carbon_trigger = false;
  bool workload_trigger = false;
  bool migrating = false;
  std::vector<int> snapshot;  // services per allowed region
};

struct TriggerEvent {
  Timestamp t = 0;
  bool carbon = false;
  bool workload = false;
  std::vector<std::string> carbon_regions;
  double load_estimate = 0.0;
  std::size_t bucket_from = 0;
  std::size_t bucket_to = 0;
  bool changed = false;
  double moved_frac = 0.0;
  bool infeasible = false;
  double solve_time = 0.0;
  std::int64_t evaluations = 0;
  double search_space_log10 = 0.0;
};

struct StabilitySummary {
  std::optional<double> adaptation_rate;
  double avg_ms_moved_frac = 0.0;
  double changes_per_day = 0.0;
  int triggers = 0;
  int changes = 0;
};

struct MetricsLog {
  std::string scenario;
  std::string strategy;
  std::uint64_t seed = 0;
  std::vector<std::string> regions;
  std::vector<TickRecord> ticks;
  std::vector<TriggerEvent> triggers;
  std::vector<nlohmann::json> events;  // full event stream incl. applies and retrains
  double horizon_days = 0.0;
  std::size_t movable_total = 0;
  double total_solve_time = 0.0;
  std::int64_t total_evaluations = 0;

  double total_carbon() const;
  double total_cost() const;
  double mean_latency() const;
  double violation_rate() const;
};

StabilitySummary stability_summary(const MetricsLog& log);

MetricsLog run(const Scenario& sc, Strategy& strategy);

std::string metrics_csv(const MetricsLog& log);
std::string events_jsonl(const MetricsLog& log);
nlohmann::json summary_json(const MetricsLog& log);

}  // namespace carbonplace
