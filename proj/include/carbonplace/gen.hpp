#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "carbonplace/app_model.hpp"
#include "carbonplace/forecaster.hpp"
#include "carbonplace/infra.hpp"
#include "carbonplace/profiler.hpp"

namespace carbonplace {

struct Burst {
  Timestamp start = 0;
  Timestamp minutes = 0;
  double multiplier = 1.0;
};

struct TrafficGenConfig {
  Timestamp start = 0;
  int days = 1;
  double base_rate = 100.0;       // req/s at the diurnal mean
  double diurnal_amplitude = 0.4;  // fraction of base_rate
  double peak_hour = 15.0;         // UTC hour of the diurnal maximum
  double weekend_factor = 1.0;
  double bursts_per_day = 2.0;
  double burst_multiplier = 1.8;
  int burst_min_minutes = 15;
  int burst_max_minutes = 45;
  double tick_noise = 0.0;  // lognormal sigma on the per-tick intensity
  std::uint64_t seed = 1;
};

struct GeneratedTraffic {
  TrafficTrace trace;
  std::vector<double> rate;  // underlying Poisson intensity per tick
  std::vector<Burst> bursts;
};

GeneratedTraffic generate_traffic(const TrafficGenConfig& cfg);

struct CarbonProfile {
  double mean = 200.0;
  double solar_depth = 0.0;  // fractional midday dip
  double solar_peak_hour = 12.0;
  double noise = 0.03;  // relative AR(1) innovation
};

CarbonTrace generate_carbon(const std::string& region, const CarbonProfile& profile, Timestamp start, int hours,
                            std::uint64_t seed);

struct DagGenConfig {
  int compute = 100;
  double db_fraction = 0.15;  // databases per compute service
  int layers = 0;             // 0 picks round(sqrt(compute))
  double second_parent_prob = 0.35;
  std::uint64_t seed = 1;
};

AppDag random_layered_dag(const DagGenConfig& cfg);

// Load-dependent service behaviour used to synthesize profile samples.
struct ServicePerf {
  double latency_ms = 5.0;   // at zero load
  double utilization = 0.5;  // queueing utilisation at reference load
  double idle_w = 8.0;
  double dynamic_w = 20.0;
  double cpu_idle = 0.2;
  double cpu_dynamic = 1.0;
  double mem_gb = 2.0;
  double net_mbps = 10.0;
};

std::map<std::string, ServicePerf> random_service_perf(const AppDag& dag, std::uint64_t seed);
Metrics perf_at(const ServicePerf& perf, double traffic, double reference_traffic);

std::vector<ProfileSample> generate_profile(const std::map<std::string, ServicePerf>& perf,
                                            const std::vector<std::pair<Timestamp, double>>& traffic,
                                            double reference_traffic, double noise, std::uint64_t seed);

// Regional fixtures: "eu" (10 regions) and "all" (EU, North America and others).
Infra make_region_infra(const std::string& set, Timestamp start, int hours, std::uint64_t seed);
std::vector<std::string> region_set(const Infra& infra, const std::string& name);

// DeathStar social network on a Spain/Sweden pair.
AppDag deathstar_app();
Infra deathstar_infra(Timestamp start, int hours);
std::vector<ProfileSample> deathstar_profile(Timestamp start);
nlohmann::json deathstar_note();

struct FixtureSummary {
  std::vector<std::string> files;
};

// Writes every shipped fixture below `dir`.
FixtureSummary write_fixtures(const std::string& dir, std::uint64_t seed);

}  // namespace carbonplace
