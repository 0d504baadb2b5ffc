#include "carbonplace/profiler.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "carbonplace/infra.hpp"

namespace carbonplace {

namespace {

constexpr int kMetricCount = 5;

double& field(Metrics& m, int k) {
  switch (k) {
    case 0:
      return m.energy_j;
    case 1:
      return m.latency_ms;
    case 2:
      return m.cpu_cores;
    case 3:
      return m.mem_gb;
    default:
      return m.net_mbps;
  }
}

double representative(std::vector<double>& v, RepMode mode) {
  if (mode == RepMode::kP85) {
    std::sort(v.begin(), v.end());
    auto rank = static_cast<std::size_t>(std::ceil(0.85 * static_cast<double>(v.size())));
    return v[std::max<std::size_t>(rank, 1) - 1];
  }
  double n = static_cast<double>(v.size());
  double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return mean + std::sqrt(ss / n);
}

Bucket make_bucket(const std::vector<const ProfileSample*>& sorted, std::size_t begin, std::size_t end, RepMode mode) {
  Bucket b;
  b.count = static_cast<int>(end - begin);
  b.lo = sorted[begin]->traffic;
  std::map<std::string, std::array<std::vector<double>, kMetricCount>> cols;
  for (std::size_t i = begin; i < end; ++i)
    for (const auto& [key, m] : sorted[i]->per_ms) {
      auto& c = cols[key];
      Metrics copy = m;
      for (int k = 0; k < kMetricCount; ++k) c[static_cast<std::size_t>(k)].push_back(field(copy, k));
    }
  for (auto& [key, c] : cols) {
    Metrics rep;
    for (int k = 0; k < kMetricCount; ++k) field(rep, k) = representative(c[static_cast<std::size_t>(k)], mode);
    b.per_ms.emplace(key, rep);
  }
  return b;
}

}  // namespace

std::vector<std::size_t> equal_frequency_starts(std::size_t n, std::size_t k) {
  std::vector<std::size_t> starts;
  std::size_t base = n / k, extra = n % k, pos = 0;
  for (std::size_t i = 0; i < k; ++i) {
    starts.push_back(pos);
    pos += base + (i < extra ? 1 : 0);
  }
  return starts;
}

BucketTable build_buckets(std::vector<ProfileSample> samples, int n_min, int k_max, int k_min, RepMode mode) {
  return build_buckets(std::move(samples), BucketParams{n_min, k_max, k_min, mode});
}

BucketTable build_buckets(std::vector<ProfileSample> samples, const BucketParams& params) {
  if (samples.empty()) throw ValidationError("cannot build buckets from an empty sample list");
  if (params.n_min < 1 || params.k_min < 1 || params.k_max < params.k_min) throw ValidationError("invalid bucket parameters");
  std::stable_sort(samples.begin(), samples.end(),
                   [](const ProfileSample& a, const ProfileSample& b) { return a.timestamp < b.timestamp; });
  BucketTable table;
  table.mode = params.mode;
  table.params = params;
  table.samples = std::make_shared<const std::vector<ProfileSample>>(std::move(samples));
  const auto& all = *table.samples;

  std::vector<const ProfileSample*> sorted;
  sorted.reserve(all.size());
  for (const auto& s : all) sorted.push_back(&s);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ProfileSample* a, const ProfileSample* b) { return a->traffic < b->traffic; });

  std::size_t n = sorted.size();
  auto k = static_cast<std::size_t>(std::clamp<long long>(static_cast<long long>(n) / params.n_min, params.k_min, params.k_max));
  k = std::min(k, n);
  auto starts = equal_frequency_starts(n, k);
  for (std::size_t i = 0; i < k; ++i) table.split_counts.push_back(static_cast<int>((i + 1 < k ? starts[i + 1] : n) - starts[i]));

  // A boundary inside a run of equal traffic values would give an empty
  // range; move it past the run (dropping it if it reaches the next one).
  std::vector<std::size_t> cuts{0};
  for (std::size_t i = 1; i < k; ++i) {
    std::size_t c = std::max(starts[i], cuts.back() + 1);
    while (c < n && sorted[c]->traffic == sorted[c - 1]->traffic) ++c;
    if (c < n && c > cuts.back()) cuts.push_back(c);
  }
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < cuts.size(); ++i) sizes.push_back((i + 1 < cuts.size() ? cuts[i + 1] : n) - cuts[i]);

  // Merge undersized groups into the right neighbour; the last one merges left.
  auto need = static_cast<std::size_t>(params.n_min);
  std::vector<std::size_t> merged_cuts, merged_sizes;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (merged_sizes.empty() || merged_sizes.back() >= need) {
      merged_cuts.push_back(cuts[i]);
      merged_sizes.push_back(sizes[i]);
    } else {
      merged_sizes.back() += sizes[i];
    }
  }
  if (merged_sizes.size() > 1 && merged_sizes.back() < need) {
    std::size_t last = merged_sizes.back();
    merged_sizes.pop_back();
    merged_cuts.pop_back();
    merged_sizes.back() += last;
  }

  for (std::size_t i = 0; i < merged_cuts.size(); ++i)
    table.buckets.push_back(make_bucket(sorted, merged_cuts[i], merged_cuts[i] + merged_sizes[i], params.mode));
  for (std::size_t i = 0; i + 1 < table.buckets.size(); ++i) table.buckets[i].hi = table.buckets[i + 1].lo;
  table.buckets.back().hi = sorted.back()->traffic;

  if (n < need)
    table.warnings.push_back("only " + std::to_string(n) + " samples; bucket holds fewer than N_min = " +
                             std::to_string(params.n_min));
  if (table.buckets.size() < static_cast<std::size_t>(params.k_min))
    table.warnings.push_back("merging left " + std::to_string(table.buckets.size()) + " bucket(s), fewer than K_min = " +
                             std::to_string(params.k_min));
  return table;
}

std::size_t bucket_index(const BucketTable& table, double traffic) {
  const auto& b = table.buckets;
  auto it = std::upper_bound(b.begin(), b.end(), traffic, [](double t, const Bucket& bk) { return t < bk.lo; });
  if (it == b.begin()) return 0;
  return static_cast<std::size_t>(std::distance(b.begin(), it)) - 1;
}

const std::map<std::string, Metrics>& lookup(const BucketTable& table, double traffic) {
  return table.buckets[bucket_index(table, traffic)].per_ms;
}

BucketTable refresh(const BucketTable& table, const std::vector<ProfileSample>& new_samples, Timestamp window,
                    std::size_t cap) {
  if (new_samples.empty()) return table;
  std::vector<ProfileSample> all(table.samples->begin(), table.samples->end());
  all.insert(all.end(), new_samples.begin(), new_samples.end());
  std::stable_sort(all.begin(), all.end(),
                   [](const ProfileSample& a, const ProfileSample& b) { return a.timestamp < b.timestamp; });
  Timestamp newest = all.back().timestamp;
  auto first = std::find_if(all.begin(), all.end(), [&](const ProfileSample& s) { return s.timestamp > newest - window; });
  all.erase(all.begin(), first);
  if (all.size() > cap) all.erase(all.begin(), all.end() - static_cast<std::ptrdiff_t>(cap));
  return build_buckets(std::move(all), table.params);
}

void ProfileStore::refresh(const std::vector<ProfileSample>& new_samples, Timestamp window, std::size_t cap) {
  auto old = current();
  auto next = std::make_shared<const BucketTable>(carbonplace::refresh(*old, new_samples, window, cap));
  std::lock_guard<std::mutex> lock(mu_);
  table_ = std::move(next);
}

std::vector<ProfileSample> parse_profile_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::map<Timestamp, ProfileSample> by_time;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (f[0] == "timestamp") continue;
    if (f.size() != 8) throw ValidationError("profile.csv line " + std::to_string(lineno) + ": expected 8 fields");
    std::array<double, 6> v{};
    for (std::size_t k = 0; k < 6; ++k) {
      const std::string& s = f[k == 0 ? 1 : k + 2];
      auto res = std::from_chars(s.data(), s.data() + s.size(), v[k]);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v[k] < 0 || !std::isfinite(v[k]))
        throw ValidationError("profile.csv line " + std::to_string(lineno) + ": bad value '" + s + "'");
    }
    Timestamp t = parse_timestamp(f[0]);
    auto& s = by_time[t];
    if (!s.per_ms.empty() && s.traffic != v[0])
      throw ValidationError("profile.csv line " + std::to_string(lineno) + ": inconsistent traffic for timestamp");
    s.timestamp = t;
    s.traffic = v[0];
    s.per_ms[f[2]] = Metrics{v[1], v[2], v[3], v[4], v[5]};
  }
  std::vector<ProfileSample> out;
  for (auto& [t, s] : by_time) out.push_back(std::move(s));
  if (!out.empty()) {
    for (const auto& s : out)
      if (s.per_ms.size() != out.front().per_ms.size())
        throw ValidationError("profile.csv: sample at " + format_timestamp(s.timestamp) + " does not cover every service");
  }
  return out;
}

std::vector<ProfileSample> load_profile(const std::string& path) { return parse_profile_csv(read_file(path)); }

std::string profile_to_csv(const std::vector<ProfileSample>& samples) {
  std::string out = "timestamp,traffic,profile_key,energy_j,latency_ms,cpu_cores,mem_gb,net_mbps\n";
  for (const auto& s : samples) {
    std::string prefix = format_timestamp(s.timestamp) + "," + format_double(s.traffic) + ",";
    for (const auto& [key, m] : s.per_ms)
      out += prefix + key + "," + format_double(m.energy_j) + "," + format_double(m.latency_ms) + "," +
             format_double(m.cpu_cores) + "," + format_double(m.mem_gb) + "," + format_double(m.net_mbps) + "\n";
  }
  return out;
}

}  // namespace carbonplace
