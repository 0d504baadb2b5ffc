#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "carbonplace/app_model.hpp"
#include "carbonplace/infra.hpp"
#include "carbonplace/optimizer.hpp"
#include "carbonplace/profiler.hpp"

// Independent reference implementations shared by the unit tests and the acceptance binary.
namespace carbonplace::testing {

// ---- region filter ----

// Survivors per the two dominance rules, checked candidate by candidate against all others.
inline std::vector<std::string> filter_oracle(const std::vector<std::string>& names, const std::vector<double>& ci,
                                              const std::vector<double>& price, std::size_t base, bool conservative) {
  auto dominated_by_base = [&](std::size_t c) {
    return ci[c] >= ci[base] && price[c] >= price[base] && (ci[c] > ci[base] || price[c] > price[base]);
  };
  auto better_both = [&](std::size_t c) { return ci[c] < ci[base] && price[c] < price[base]; };
  auto better_one = [&](std::size_t c) { return (ci[c] < ci[base]) != (price[c] < price[base]); };
  std::vector<std::string> out;
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (c == base) {
      out.push_back(names[c]);
      continue;
    }
    if (dominated_by_base(c)) continue;
    bool dropped = false;
    if (conservative && better_one(c))
      for (std::size_t d = 0; d < names.size(); ++d)
        if (d != base && better_both(d)) dropped = true;
    if (!dropped) out.push_back(names[c]);
  }
  return out;
}

struct FilterCase {
  std::vector<std::string> names;
  std::vector<double> ci, price;
  std::map<std::string, double> ci_map, price_map;
  std::size_t base = 0;
};

// Coarse CI/price levels so ties with the base are common.
inline FilterCase random_filter_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 12), level(0, 6);
  FilterCase c;
  int n = count(rng);
  for (int i = 0; i < n; ++i) {
    c.names.push_back("r" + std::to_string(i));
    c.ci.push_back(50.0 * level(rng));
    c.price.push_back(0.01 * level(rng));
    c.ci_map[c.names.back()] = c.ci.back();
    c.price_map[c.names.back()] = c.price.back();
  }
  c.base = std::uniform_int_distribution<std::size_t>(0, static_cast<std::size_t>(n - 1))(rng);
  return c;
}

// ---- end-to-end latency ----

inline Microservice small_svc(int id, ServiceKind kind = ServiceKind::kCompute) {
  std::string name = "n" + std::to_string(id);
  return {id, name, kind, kind != ServiceKind::kCompute, name};
}

// Random DAG over n nodes: node 0 is the frontend, every other node has 1-3 earlier parents,
// a few compute-compute order edges, and databases hang off compute nodes.
inline AppDag random_small_dag(std::mt19937_64& rng, int n) {
  std::vector<Microservice> nodes{small_svc(0, ServiceKind::kFrontend)};
  std::vector<Edge> edges;
  std::vector<std::pair<int, int>> order;
  int dbs = n > 3 ? static_cast<int>(rng() % 3) : 0;
  int compute = n - 1 - dbs;
  for (int v = 1; v <= compute; ++v) {
    nodes.push_back(small_svc(v));
    std::set<int> parents{static_cast<int>(rng() % static_cast<std::uint64_t>(v))};
    int extra = static_cast<int>(rng() % 3);
    for (int k = 0; k < extra; ++k) parents.insert(static_cast<int>(rng() % static_cast<std::uint64_t>(v)));
    for (int p : parents) {
      bool as_order = p > 0 && rng() % 4 == 0;
      if (as_order && p != *parents.begin())
        order.push_back({p, v});
      else
        edges.push_back({p, v, 1 + static_cast<int>(rng() % 2)});
    }
  }
  for (int d = 0; d < dbs; ++d) {
    int id = compute + 1 + d;
    nodes.push_back(small_svc(id, ServiceKind::kDatabase));
    edges.push_back({1 + static_cast<int>(rng() % static_cast<std::uint64_t>(compute)), id, 1});
  }
  return AppDag::build(nodes, edges, order, 0);
}

// Longest frontend-to-target path by explicit enumeration of every path.
inline double longest_path_to(const AppDag& g, const std::vector<std::size_t>& reg, const std::vector<double>& lat,
                              const RttMatrix& rtt, std::size_t target) {
  double best = -1;
  std::function<void(std::size_t, double)> walk = [&](std::size_t v, double acc) {
    acc += lat[v];
    if (v == target) best = std::max(best, acc);
    for (const auto& s : g.succs(v)) walk(s.node, acc + s.calls * rtt.at(reg[v], reg[s.node]));
  };
  walk(g.index_of(g.frontend_id()), 0.0);
  return best;
}

struct E2eCase {
  AppDag dag;
  RttMatrix rtt;
  Placement placement;
  std::vector<Metrics> profiles;
  double oracle = 0.0;
};

// A random placement of a random DAG with at most 12 nodes over three regions; every fifth case has zero RTT
// diagonals. The oracle is the slowest sink by path enumeration plus the reply hop back to the frontend.
inline E2eCase random_e2e_case(std::mt19937_64& rng, int trial) {
  static const std::vector<std::string> regions{"a", "b", "c"};
  E2eCase c;
  c.dag = random_small_dag(rng, 2 + static_cast<int>(rng() % 11));
  std::uniform_real_distribution<double> u(1, 50);
  std::vector<double> m(9);
  for (auto& x : m) x = u(rng);
  for (int i = 0; i < 3; ++i) m[static_cast<std::size_t>(i * 4)] = trial % 5 == 0 ? 0.0 : u(rng) / 50;
  c.rtt = RttMatrix(regions, m);
  c.placement.base_region = "a";
  const AppDag& g = c.dag;
  std::vector<std::size_t> reg(g.size(), 0);
  std::vector<double> lat(g.size());
  c.profiles.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    lat[i] = u(rng);
    c.profiles[i].latency_ms = lat[i];
    if (!g.node(i).structurally_pinned) {
      reg[i] = rng() % 3;
      c.placement.assign[g.node(i).id] = regions[reg[i]];
    }
  }
  std::size_t last = g.sinks().front();
  double done = -1;
  for (std::size_t s : g.sinks()) {
    double d = longest_path_to(g, reg, lat, c.rtt, s);
    if (d > done) {
      done = d;
      last = s;
    }
  }
  c.oracle = done + c.rtt.at(reg[g.owner(last)], 0);
  return c;
}

// ---- profiler ----

inline ProfileSample profile_sample(Timestamp t, double traffic, double energy, double latency = 1.0) {
  ProfileSample s;
  s.timestamp = t;
  s.traffic = traffic;
  s.per_ms["a"] = Metrics{energy, latency, 0.5, 1.0, 2.0};
  return s;
}

// One of four traffic shapes (uniform, heavy-tailed, coarse ties, rounded) with 1-1500 samples.
inline std::vector<ProfileSample> random_sample_set(std::mt19937_64& rng, int trial, Timestamp start) {
  std::uniform_int_distribution<int> size(1, 1500);
  int n = size(rng);
  int kind = trial % 4;
  std::vector<ProfileSample> v;
  std::lognormal_distribution<double> heavy(4, 1);
  std::uniform_real_distribution<double> flat(0, 900);
  std::uniform_int_distribution<int> coarse(0, 8);
  std::normal_distribution<double> energy(100, 15);
  for (int i = 0; i < n; ++i) {
    double tr = kind == 0 ? flat(rng) : kind == 1 ? heavy(rng) : kind == 2 ? 100.0 * coarse(rng) : std::round(flat(rng));
    v.push_back(profile_sample(start + i * kTick, tr, std::max(0.0, energy(rng))));
  }
  return v;
}

// Checks every table invariant against the raw samples; returns the first violation or "".
inline std::string table_violation(const BucketTable& t, const std::vector<ProfileSample>& samples, int n_min,
                                   int k_max, int k_min) {
  std::vector<double> traffic;
  for (const auto& s : samples) traffic.push_back(s.traffic);
  std::sort(traffic.begin(), traffic.end());
  std::size_t n = traffic.size();

  std::size_t k = std::clamp<std::size_t>(n / static_cast<std::size_t>(n_min), static_cast<std::size_t>(k_min),
                                          static_cast<std::size_t>(k_max));
  k = std::min(k, n);
  if (t.split_counts.size() != k) return "initial split count " + std::to_string(t.split_counts.size());
  auto [mn, mx] = std::minmax_element(t.split_counts.begin(), t.split_counts.end());
  if (*mx - *mn > 1) return "unequal initial split";
  if (static_cast<std::size_t>(std::accumulate(t.split_counts.begin(), t.split_counts.end(), 0)) != n)
    return "split counts do not cover the samples";

  if (t.buckets.empty() || t.buckets.size() > static_cast<std::size_t>(k_max)) return "bucket count out of range";
  if (t.buckets.front().lo != traffic.front() || t.buckets.back().hi != traffic.back()) return "range not covered";
  int total = 0;
  for (std::size_t b = 0; b < t.buckets.size(); ++b) {
    const Bucket& bk = t.buckets[b];
    std::string at = "bucket " + std::to_string(b) + ": ";
    if (b + 1 < t.buckets.size() && (bk.hi != t.buckets[b + 1].lo || !(bk.lo < bk.hi)))
      return at + "not contiguous and non-empty";
    if (bk.count < std::min<int>(static_cast<int>(n), n_min)) return at + "below minimum count";
    bool last = b + 1 == t.buckets.size();
    std::vector<double> energy;
    for (const auto& s : samples)
      if (s.traffic >= bk.lo && (s.traffic < bk.hi || (last && s.traffic <= bk.hi)))
        energy.push_back(s.per_ms.at("a").energy_j);
    if (static_cast<int>(energy.size()) != bk.count) return at + "count does not match members";
    total += bk.count;
    double mean = std::accumulate(energy.begin(), energy.end(), 0.0) / static_cast<double>(energy.size());
    double var = 0;
    for (double e : energy) var += (e - mean) * (e - mean);
    double rep = bk.per_ms.at("a").energy_j;
    if (std::abs(rep - (mean + std::sqrt(var / static_cast<double>(energy.size())))) > 1e-9 * (1 + mean))
      return at + "representative is not mean + sigma";
    if (rep + 1e-12 < mean) return at + "representative below the mean";
  }
  if (static_cast<std::size_t>(total) != n) return "bucket counts do not cover the samples";
  for (double x : traffic) {
    std::size_t i = bucket_index(t, x);
    if (i >= t.buckets.size() || x < t.buckets[i].lo || x > t.buckets[i].hi) return "sample maps outside its bucket";
  }
  return "";
}

}  // namespace carbonplace::testing
