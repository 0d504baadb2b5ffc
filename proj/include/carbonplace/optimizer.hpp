#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "carbonplace/app_model.hpp"
#include "carbonplace/infra.hpp"
#include "carbonplace/profiler.hpp"
#include "json.hpp"

namespace carbonplace {

struct Placement {
  std::map<int, std::string> assign;  // movable services only
  std::string base_region;

  const std::string& region_of(int id) const;
  bool operator==(const Placement& o) const { return assign == o.assign && base_region == o.base_region; }
};

struct Weights {
  double w_carbon = 1.0;
  double w_cost = 1.0;
};

struct GaConfig {
  int population = 64;
  int max_generations = 300;
  double mutation_rate = -1.0;  // negative means 1/M
  double crossover_rate = 0.9;
  int elitism = 2;
  int patience = 30;
  double time_budget = 120.0;  // seconds
  std::uint64_t seed = 1;
  int tournament = 3;
  int threads = 1;
  bool seed_greenest = true;

  void validate() const;
};

struct PinPolicy {
  double theta = 0.85;
  bool enabled = true;
};

// Per-service representatives indexed like AppDag nodes.
std::vector<Metrics> profiles_for(const AppDag& dag, const std::map<std::string, Metrics>& reps);

struct OptContext {
  const AppDag* dag = nullptr;
  ActivationSchedule schedule;
  std::vector<Metrics> profiles;
  const Infra* infra = nullptr;
  std::map<std::string, double> ci_now;
  std::string base_region;
  std::vector<std::string> candidates;  // allowed regions, base included
  Weights weights;
  double slo_ms = 300.0;
  PinPolicy pin;
  GaConfig ga;
  double traffic = 0.0;
  double request_payload_gb = 0.0;
  double image_gb = 0.0;
  bool region_filter = true;
};

struct Evaluation {
  double latency_ms = 0.0;
  double carbon = 0.0;  // gCO2eq per hour
  double compute_cost = 0.0;  // USD per hour
  double storage_cost = 0.0;
  double egress_cost = 0.0;
  double cost() const { return compute_cost + storage_cost + egress_cost; }
};

// Precomputed carbon, price, egress and RTT tables for one decision.
class PlacementModel {
 public:
  PlacementModel(const OptContext& ctx, const std::vector<std::string>& regions, std::size_t storage_regions);

  const std::vector<std::string>& regions() const { return regions_; }
  std::size_t region_index(const std::string& r) const;
  std::size_t base() const { return base_; }
  const AppDag& dag() const { return *dag_; }

  // node_region holds a region index for every node.
  double latency(const std::vector<std::uint16_t>& node_region) const;
  Evaluation evaluate(const std::vector<std::uint16_t>& node_region) const;
  std::vector<std::uint16_t> expand(const Placement& p) const;
  double carbon_of(std::size_t node, std::size_t region) const { return carbon_[node * regions_.size() + region]; }

 private:
  const AppDag* dag_;
  std::vector<std::string> regions_;
  std::size_t base_ = 0;
  std::vector<double> lat_;
  std::vector<double> rtt_;
  std::vector<double> carbon_;
  std::vector<double> price_;
  struct CallEdge {
    std::size_t u, v;
    double usd_per_crossing_hour;
  };
  std::vector<CallEdge> edges_;
  std::vector<double> egress_;  // per region pair, USD per GB
  double storage_ = 0.0;
};

struct ObjectiveValue {
  double objective = 0.0;
  double carbon_term = 0.0;
  double cost_term = 0.0;
};

// Terms are normalized by the all-in-base placement's carbon and cost.
ObjectiveValue objective(const Evaluation& e, const Evaluation& base, const Weights& w);

struct OptResult {
  Placement placement;
  double objective = 0.0;
  double carbon = 0.0;
  double cost = 0.0;
  double latency = 0.0;
  double solve_time = 0.0;
  std::int64_t evaluations = 0;
  double search_space_log10 = 0.0;
  int generations = 0;
  std::vector<std::string> retained;
  std::vector<int> movable;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const OptResult& r);
nlohmann::json to_json(const Placement& p);

std::vector<std::string> region_filter(const std::string& base, const std::vector<std::string>& candidates,
                                       const std::map<std::string, double>& ci_now,
                                       const std::map<std::string, double>& prices, bool conservative = true);

std::set<int> pin_services(const AppDag& dag, const ActivationSchedule& schedule, double base_latency, double slo,
                           const PinPolicy& policy);

double search_space_log10(std::size_t movable, std::size_t retained);

bool carbon_trigger(double recent_trend, double forecast, double threshold = 0.2);
bool workload_trigger(std::size_t current_bucket, std::size_t forecast_bucket);

// Regions kept for the search and services left movable for a context.
struct SearchSpace {
  std::vector<std::string> retained;
  std::vector<int> movable;
  double base_latency = 0.0;
};
SearchSpace search_space(const OptContext& ctx);

Evaluation evaluate_placement(const OptContext& ctx, const Placement& p);
bool feasible(const OptContext& ctx, const Placement& p);

OptResult optimize(const OptContext& ctx);
OptResult brute_force_optimize(const OptContext& ctx);

}  // namespace carbonplace
