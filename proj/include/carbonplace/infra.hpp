#pragma once

#include <map>
#include <string>
#include <vector>

#include "carbonplace/common.hpp"
#include "json.hpp"

namespace carbonplace {

struct Region {
  std::string id;
  std::string display_name;
  std::string sovereignty_group;
};

// Hourly samples starting at `start`; sample i covers [start + i h, start + (i+1) h).
struct CarbonTrace {
  std::string region_id;
  Timestamp start = 0;
  std::vector<double> values;

  Timestamp end() const { return start + static_cast<Timestamp>(values.size()) * kHour; }
};

double ci_at(const CarbonTrace& trace, Timestamp t);

struct InstanceType {
  std::string type_name;
  double vcpu = 0.0;
  double mem_gb = 0.0;
  double price = 0.0;  // USD per hour
};

struct PricingCatalog {
  std::map<std::string, std::vector<InstanceType>> instances;
  double storage_price = 0.0;  // USD per GB-month
  std::map<std::string, std::map<std::string, double>> egress;  // USD per GB

  double egress_price(const std::string& from, const std::string& to) const;
};

struct InstanceChoice {
  std::string type_name;
  double price = 0.0;
};

InstanceChoice smallest_instance(const PricingCatalog& catalog, const std::string& region, double cpu, double mem);

// Median shape of the region's sorted instance list.
InstanceType canonical_shape(const PricingCatalog& catalog, const std::string& region);
double reference_price(const PricingCatalog& catalog, const std::string& region, const InstanceType& shape);

class RttMatrix {
 public:
  RttMatrix() = default;
  RttMatrix(std::vector<std::string> regions, std::vector<double> values);

  const std::vector<std::string>& regions() const { return regions_; }
  std::size_t index_of(const std::string& region) const;
  double at(std::size_t i, std::size_t j) const { return ms_[i * regions_.size() + j]; }

 private:
  std::vector<std::string> regions_;
  std::vector<double> ms_;
  std::map<std::string, std::size_t> index_;
};

double rtt(const RttMatrix& matrix, const std::string& r1, const std::string& r2);

struct Infra {
  std::vector<Region> regions;
  std::map<std::string, CarbonTrace> carbon;
  PricingCatalog pricing;
  RttMatrix rtt;

  const Region& region(const std::string& id) const;
  bool has_region(const std::string& id) const;
};

CarbonTrace parse_carbon_csv(const std::string& region_id, const std::string& text);
std::string carbon_to_csv(const CarbonTrace& trace);
PricingCatalog parse_pricing(const nlohmann::json& j);
nlohmann::json pricing_to_json(const PricingCatalog& catalog);
RttMatrix parse_rtt_csv(const std::string& text);
std::string rtt_to_csv(const RttMatrix& matrix);
std::vector<Region> parse_regions(const nlohmann::json& j);
nlohmann::json regions_to_json(const std::vector<Region>& regions);

// Checks region coverage across traces, pricing and RTTs.
void validate_infra(const Infra& infra);

// Directory layout: regions.json, carbon/<region>.csv, pricing.json, rtt.csv.
Infra load_infra(const std::string& dir);
void save_infra(const Infra& infra, const std::string& dir);

std::string format_double(double v);

}  // namespace carbonplace
