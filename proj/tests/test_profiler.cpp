#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "carbonplace/profiler.hpp"
#include "oracles.hpp"

namespace carbonplace {
namespace {

constexpr Timestamp kT0 = 1690848000;  // 2023-08-01T00:00:00Z

ProfileSample sample(Timestamp t, double traffic, double energy, double latency = 1.0) {
  return testing::profile_sample(t, traffic, energy, latency);
}

std::vector<ProfileSample> ramp(int n, Timestamp start = kT0) {
  std::vector<ProfileSample> v;
  for (int i = 0; i < n; ++i) v.push_back(sample(start + i * kTick, i, 10.0 + i % 7));
  return v;
}

TEST(Buckets, KFromSampleCount) {
  BucketTable t = build_buckets(ramp(1000));
  EXPECT_EQ(t.split_counts.size(), 10u);
  EXPECT_EQ(t.buckets.size(), 10u);
  for (const auto& b : t.buckets) EXPECT_EQ(b.count, 100);

  BucketTable big = build_buckets(ramp(5000));
  EXPECT_EQ(big.buckets.size(), 10u);
  BucketTable small = build_buckets(ramp(400));
  EXPECT_EQ(small.buckets.size(), 4u);
}

TEST(Buckets, MeanPlusSigmaRepresentative) {
  // energies 8 and 12 alternate: mean 10, population sigma 2
  std::vector<ProfileSample> v;
  for (int i = 0; i < 100; ++i) v.push_back(sample(kT0 + i * kTick, 50, i % 2 ? 12 : 8));
  BucketTable t = build_buckets(v, 100, 10, 1, RepMode::kMeanPlusSigma);
  ASSERT_EQ(t.buckets.size(), 1u);
  EXPECT_NEAR(t.buckets[0].per_ms.at("a").energy_j, 12.0, 1e-12);
}

TEST(Buckets, P85NearestRank) {
  std::vector<ProfileSample> v;
  for (int i = 1; i <= 20; ++i) v.push_back(sample(kT0 + i * kTick, 5, 21 - i));
  BucketTable t = build_buckets(v, 1, 1, 1, RepMode::kP85);
  // ceil(0.85 * 20) = 17th smallest of 1..20
  EXPECT_DOUBLE_EQ(t.buckets[0].per_ms.at("a").energy_j, 17.0);
}

TEST(Buckets, SmallSampleMergesDown) {
  BucketTable t = build_buckets(ramp(150));
  EXPECT_EQ(t.split_counts, (std::vector<int>{50, 50, 50}));
  ASSERT_EQ(t.buckets.size(), 1u);
  EXPECT_EQ(t.buckets[0].count, 150);
  EXPECT_FALSE(t.warnings.empty());
  EXPECT_THROW(build_buckets(std::vector<ProfileSample>{}), ValidationError);
}

TEST(Buckets, BucketIndexHalfOpen) {
  BucketTable t;
  t.buckets = {Bucket{100, 500, 1, {}}, Bucket{500, 700, 1, {}}};
  EXPECT_EQ(bucket_index(t, 300), 0u);
  EXPECT_EQ(bucket_index(t, 600), 1u);
  EXPECT_EQ(bucket_index(t, 500), 1u);
  EXPECT_EQ(bucket_index(t, 100), 0u);
  EXPECT_EQ(bucket_index(t, 0), 0u);
  EXPECT_EQ(bucket_index(t, 700), 1u);
  EXPECT_EQ(bucket_index(t, 1e9), 1u);
}

TEST(Buckets, LookupSaturates) {
  std::vector<ProfileSample> v;
  for (int i = 0; i < 300; ++i) v.push_back(sample(kT0 + i * kTick, 50 + i, i < 100 ? 1 : (i < 200 ? 2 : 3)));
  BucketTable t = build_buckets(v);
  ASSERT_EQ(t.buckets.size(), 3u);
  EXPECT_DOUBLE_EQ(lookup(t, 0).at("a").energy_j, 1.0);
  EXPECT_DOUBLE_EQ(lookup(t, 180).at("a").energy_j, 2.0);
  EXPECT_DOUBLE_EQ(lookup(t, 349).at("a").energy_j, 3.0);
  EXPECT_DOUBLE_EQ(lookup(t, 5000).at("a").energy_j, 3.0);
}

TEST(Buckets, InvariantsOnRandomSampleSets) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> nmin(1, 200);
  for (int trial = 0; trial < 1000; ++trial) {
    auto v = testing::random_sample_set(rng, trial, kT0);
    int n_min = trial % 5 == 0 ? 100 : nmin(rng);
    BucketTable t = build_buckets(v, n_min, 10, 3, RepMode::kMeanPlusSigma);
    ASSERT_EQ(testing::table_violation(t, v, n_min, 10, 3), "") << "trial " << trial;
  }
}

TEST(Refresh, CapsToNewest) {
  BucketTable t = build_buckets(ramp(500));
  std::vector<ProfileSample> more;
  for (int i = 500; i < 2500; ++i) more.push_back(sample(kT0 + 500 * kTick + i * 60, i, 1));
  BucketTable r = refresh(t, more, 7 * kDay, 2000);
  ASSERT_EQ(r.samples->size(), 2000u);
  EXPECT_EQ(r.samples->front().traffic, 500);
  EXPECT_EQ(r.samples->back().traffic, 2499);
}

TEST(Refresh, ForgetsOutsideWindow) {
  BucketTable t = build_buckets(ramp(1000));
  std::vector<ProfileSample> fresh;
  Timestamp later = kT0 + 30 * kDay;
  for (int i = 0; i < 120; ++i) fresh.push_back(sample(later + i * kTick, i, 1));
  BucketTable r = refresh(t, fresh);
  EXPECT_EQ(r.samples->size(), 120u);
  EXPECT_EQ(r.buckets.size(), 1u);
}

TEST(Refresh, NoNewSamplesKeepsTable) {
  BucketTable t = build_buckets(ramp(700));
  BucketTable r = refresh(t, {});
  ASSERT_EQ(r.buckets.size(), t.buckets.size());
  for (std::size_t i = 0; i < t.buckets.size(); ++i) {
    EXPECT_EQ(r.buckets[i].lo, t.buckets[i].lo);
    EXPECT_EQ(r.buckets[i].count, t.buckets[i].count);
  }
  EXPECT_EQ(r.samples, t.samples);
}

TEST(ProfileStore, ReadersSeeWholeTables) {
  ProfileStore store(build_buckets(ramp(300)));
  std::atomic<bool> stop{false};
  std::atomic<int> bad{0};
  std::thread reader([&] {
    while (!stop) {
      auto t = store.current();
      int sum = 0;
      for (const auto& b : t->buckets) sum += b.count;
      if (static_cast<std::size_t>(sum) != t->samples->size()) ++bad;
    }
  });
  for (int round = 0; round < 50; ++round) {
    std::vector<ProfileSample> more;
    for (int i = 0; i < 40; ++i) more.push_back(sample(kT0 + (300 + round * 40 + i) * kTick, i * 3, 2));
    store.refresh(more, 7 * kDay, 1000);
  }
  stop = true;
  reader.join();
  EXPECT_EQ(bad.load(), 0);
  EXPECT_EQ(store.current()->samples->size(), 1000u);
}

TEST(ProfileCsv, RoundTripAndErrors) {
  std::vector<ProfileSample> v;
  for (int i = 0; i < 3; ++i) {
    ProfileSample s = sample(kT0 + i * kTick, 10.5 * i, 3.25);
    s.per_ms["b"] = Metrics{1, 2, 3, 4, 5};
    v.push_back(s);
  }
  std::string csv = profile_to_csv(v);
  auto back = parse_profile_csv(csv);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(profile_to_csv(back), csv);
  EXPECT_DOUBLE_EQ(back[2].per_ms.at("b").net_mbps, 5);

  EXPECT_THROW(parse_profile_csv("2023-08-01T00:00:00Z,1,a,1,2,3,4\n"), ValidationError);
  EXPECT_THROW(parse_profile_csv("2023-08-01T00:00:00Z,1,a,-1,2,3,4,5\n"), ValidationError);
  EXPECT_THROW(parse_profile_csv("2023-08-01T00:00:00Z,1,a,1,2,3,4,5\n2023-08-01T00:05:00Z,1,a,1,2,3,4,5\n"
                                 "2023-08-01T00:05:00Z,1,b,1,2,3,4,5\n"),
               ValidationError);
}

TEST(EqualFrequency, SizesDifferByAtMostOne) {
  for (std::size_t n = 1; n < 300; n += 7)
    for (std::size_t k = 1; k <= std::min<std::size_t>(n, 10); ++k) {
      auto s = equal_frequency_starts(n, k);
      ASSERT_EQ(s.size(), k);
      std::size_t lo = n, hi = 0;
      for (std::size_t i = 0; i < k; ++i) {
        std::size_t size = (i + 1 < k ? s[i + 1] : n) - s[i];
        lo = std::min(lo, size);
        hi = std::max(hi, size);
      }
      EXPECT_LE(hi - lo, 1u);
    }
}

}  // namespace
}  // namespace carbonplace
