#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "carbonplace/common.hpp"

namespace carbonplace {

struct Metrics {
  double energy_j = 0.0;  // joules per 5-min interval
  double latency_ms = 0.0;
  double cpu_cores = 0.0;
  double mem_gb = 0.0;
  double net_mbps = 0.0;
};

struct ProfileSample {
  Timestamp timestamp = 0;
  double traffic = 0.0;
  std::map<std::string, Metrics> per_ms;
};

enum class RepMode { kMeanPlusSigma, kP85 };

struct Bucket {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
  std::map<std::string, Metrics> per_ms;
};

struct BucketParams {
  int n_min = 100;
  int k_max = 10;
  int k_min = 3;
  RepMode mode = RepMode::kMeanPlusSigma;
};

struct BucketTable {
  std::vector<Bucket> buckets;
  RepMode mode = RepMode::kMeanPlusSigma;
  BucketParams params;
  std::vector<int> split_counts;  // bucket sizes before merging
  std::vector<std::string> warnings;
  std::shared_ptr<const std::vector<ProfileSample>> samples;  // sorted by timestamp
};

// Start offsets of K equal-frequency groups over n sorted values; sizes differ by at most one.
std::vector<std::size_t> equal_frequency_starts(std::size_t n, std::size_t k);

BucketTable build_buckets(std::vector<ProfileSample> samples, const BucketParams& params = {});
BucketTable build_buckets(std::vector<ProfileSample> samples, int n_min, int k_max, int k_min, RepMode mode);

std::size_t bucket_index(const BucketTable& table, double traffic);
const std::map<std::string, Metrics>& lookup(const BucketTable& table, double traffic);

BucketTable refresh(const BucketTable& table, const std::vector<ProfileSample>& new_samples,
                    Timestamp window = 7 * kDay, std::size_t cap = 2000);

std::vector<ProfileSample> parse_profile_csv(const std::string& text);
std::vector<ProfileSample> load_profile(const std::string& path);
std::string profile_to_csv(const std::vector<ProfileSample>& samples);

// Holds the live table; refreshes swap in a complete new table so readers
// never observe a partial rebuild.
class ProfileStore {
 public:
  explicit ProfileStore(BucketTable table) : table_(std::make_shared<const BucketTable>(std::move(table))) {}

  std::shared_ptr<const BucketTable> current() const {
    std::lock_guard<std::mutex> lock(mu_);
    return table_;
  }
  void refresh(const std::vector<ProfileSample>& new_samples, Timestamp window = 7 * kDay, std::size_t cap = 2000);

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const BucketTable> table_;
};

}  // namespace carbonplace
