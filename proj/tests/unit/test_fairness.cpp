#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "oracles/fair_bruteforce.hpp"
#include "spl/bench.hpp"
#include "spl/fairness.hpp"
#include "spl/instance.hpp"
#include "spl/lp.hpp"
#include "spl/rng.hpp"

using namespace spl;

namespace {

DaInstance tiny(std::uint64_t seed) {
  Rng rng(seed);
  DaInstance da;
  const std::size_t m = 2 + rng.below(2);
  const std::size_t n = 2 + rng.below(3);
  for (std::size_t j = 0; j < m; ++j) da.advertisers.push_back({"a" + std::to_string(j), 1 + std::int64_t(rng.below(2))});
  for (std::size_t i = 0; i < n; ++i) {
    Impression imp{"i" + std::to_string(i), {}};
    for (std::size_t j = 0; j < m; ++j)
      // Small integer weights make ties common.
      if (rng.uniform() < 0.7) imp.edges.push_back({j, double(1 + rng.below(4))});
    da.impressions.push_back(imp);
  }
  return da;
}

std::vector<std::vector<double>> dense(const FairAllocation& a, const DaInstance& da) {
  std::vector<std::vector<double>> x(da.num_impressions(), std::vector<double>(da.num_advertisers(), 0.0));
  for (std::size_t i = 0; i < a.x.size(); ++i)
    for (const auto& s : a.x[i]) x[i][s.advertiser] += s.fraction;
  return x;
}

oracle::Share to_oracle(SharingPolicy p) {
  if (p == SharingPolicy::equal) return oracle::Share::equal;
  if (p == SharingPolicy::proportional) return oracle::Share::proportional;
  return oracle::Share::top;
}

}  // namespace

TEST(Fair, TwoByTwoEqualSharing) {
  const auto da = two_by_two_example();
  const auto alloc = compute_fair(da, SharingPolicy::equal);
  EXPECT_EQ(total_value(alloc.x, da), 106.0);
  const auto x = dense(alloc, da);
  EXPECT_EQ(x[0][0], 1.0);
  EXPECT_EQ(x[1][1], 1.0);
  EXPECT_TRUE(check_fair(da, alloc).ok);

  const std::vector<std::size_t> all{2, 2};
  const auto halves = allocation_from_prefixes(da, SharingPolicy::equal, all);
  EXPECT_TRUE(check_fair(da, halves).ok);
  EXPECT_EQ(total_value(halves.x, da), 60.0);
}

TEST(Fair, OneImpressionTwoAdvertisers) {
  DaInstance da{{{"a", 1}, {"b", 1}}, {{"i", {{0, 2.0}, {1, 3.0}}}}};
  const auto alloc = compute_fair(da, SharingPolicy::equal);
  const auto x = dense(alloc, da);
  EXPECT_DOUBLE_EQ(x[0][0], 0.5);
  EXPECT_DOUBLE_EQ(x[0][1], 0.5);
  EXPECT_EQ(alloc.prefix, std::vector<std::size_t>({1, 1}));
  EXPECT_TRUE(check_fair(da, alloc).ok);
}

TEST(Fair, ProportionalShareOnSharedImpression) {
  for (int K : {3, 5, 10}) {
    const auto da = shared_impression_example(K, 0.5 / (K * K));
    const auto alloc = compute_fair(da, SharingPolicy::proportional);
    double first = 0.0;
    for (const auto& s : alloc.x[0])
      if (s.advertiser == 0) first = s.fraction;
    EXPECT_NEAR(first, double(K) / (K + (K * K - 1.0)), 1e-12) << "K=" << K;
    EXPECT_TRUE(check_fair(da, alloc).ok);
  }
}

TEST(Fair, StableMatchingGivesSharedImpressionToTop) {
  const auto da = shared_impression_example(4, 0.01);
  const auto alloc = compute_fair(da, SharingPolicy::stable_matching);
  const auto x = dense(alloc, da);
  for (std::size_t j = 0; j < da.num_advertisers(); ++j) EXPECT_EQ(x[0][j], j == 0 ? 1.0 : 0.0);
  EXPECT_TRUE(check_fair(da, alloc).ok);
}

TEST(Fair, MatchesBruteForceShortest) {
  for (auto policy : {SharingPolicy::equal, SharingPolicy::proportional, SharingPolicy::stable_matching}) {
    for (std::uint64_t s = 0; s < 150; ++s) {
      const auto da = tiny(s);
      const auto alloc = compute_fair(da, policy);
      const auto fair = oracle::all_fair(da, to_oracle(policy));
      ASSERT_FALSE(fair.empty());
      const auto* shortest = oracle::pointwise_shortest(fair);
      ASSERT_NE(shortest, nullptr) << "seed " << s;
      EXPECT_EQ(alloc.prefix, shortest->prefix) << to_string(policy) << " seed " << s;
      EXPECT_NEAR(total_value(alloc.x, da), shortest->value, 1e-9);
      // Longer prefixes can hand an advertiser more than n(j) units, so the
      // shortest allocation is the most efficient once each advertiser keeps
      // only its best n(j) units.
      double best = 0.0;
      for (const auto& c : fair) best = std::max(best, c.capped_value);
      EXPECT_NEAR(shortest->capped_value, best, 1e-9) << to_string(policy) << " seed " << s;
      EXPECT_TRUE(check_fair(da, alloc).ok);
      EXPECT_LE(alloc.advances, da.num_edges());
    }
  }
}

TEST(Fair, ProcessingOrderInvariance) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    SyntheticParams p;
    p.advertisers = 8;
    p.impressions = 300;
    p.demand_min = 5;
    p.demand_max = 40;
    p.density = 0.4;
    p.seed = 500 + s;
    const auto da = generate_synthetic(p);
    const auto base = compute_fair(da, SharingPolicy::equal);
    for (std::uint64_t t = 0; t < 10; ++t) {
      const auto order = random_order(da.num_advertisers(), 1000 * s + t);
      EXPECT_EQ(compute_fair(da, SharingPolicy::equal, order).prefix, base.prefix);
    }
  }
}

TEST(Fair, InvalidProcessingOrderRejected) {
  const auto da = two_by_two_example();
  const std::vector<std::size_t> bad{0, 0};
  EXPECT_THROW(compute_fair(da, SharingPolicy::equal, bad), std::invalid_argument);
}

TEST(Fair, SyntheticAllocationsSatisfyDefinition) {
  for (auto policy : {SharingPolicy::equal, SharingPolicy::proportional, SharingPolicy::stable_matching}) {
    SyntheticParams p;
    p.advertisers = 10;
    p.impressions = 800;
    p.demand_min = 10;
    p.demand_max = 90;
    p.seed = 3;
    const auto da = generate_synthetic(p);
    const auto alloc = compute_fair(da, policy);
    EXPECT_TRUE(check_fair(da, alloc).ok) << check_fair(da, alloc).reason;
    for (const auto& shares : alloc.x) {
      double sum = 0.0;
      for (const auto& s : shares) sum += s.fraction;
      EXPECT_LE(sum, 1.0 + 1e-12);
    }
  }
}

TEST(Fair, CheckerRejectsUnsatisfiedAdvertiser) {
  const auto da = two_by_two_example();
  const std::vector<std::size_t> none{0, 0};
  const auto empty = allocation_from_prefixes(da, SharingPolicy::equal, none);
  EXPECT_FALSE(check_fair(da, empty).ok);
}

TEST(Fair, CheckerRejectsWrongShares) {
  const auto da = two_by_two_example();
  auto alloc = compute_fair(da, SharingPolicy::equal);
  alloc.x[0][0].fraction = 0.7;
  EXPECT_FALSE(check_fair(da, alloc).ok);
}

TEST(Fair, StableMatchingIsHalfEfficient) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    SyntheticParams p;
    p.advertisers = 6;
    p.impressions = 300;
    p.demand_min = 3;
    p.demand_max = 50;
    p.seed = 40 + s;
    const auto da = generate_synthetic(p);
    const auto alloc = compute_fair(da, SharingPolicy::stable_matching);
    EXPECT_GE(total_value(alloc.x, da), 0.5 * solve_primal(da_to_plp(da)).objective) << "seed " << s;
  }
}

TEST(Policies, Shares) {
  const std::vector<Claim> claims{{0, 1.0}, {1, 3.0}, {2, 3.0}};
  EXPECT_EQ(policy_shares(SharingPolicy::equal, claims), std::vector<double>(3, 1.0 / 3.0));
  const auto prop = policy_shares(SharingPolicy::proportional, claims);
  EXPECT_DOUBLE_EQ(prop[0], 1.0 / 7.0);
  EXPECT_DOUBLE_EQ(prop[1], 3.0 / 7.0);
  EXPECT_EQ(policy_shares(SharingPolicy::stable_matching, claims), std::vector<double>({0.0, 1.0, 0.0}));
}

TEST(Policies, AddingAClaimNeverRaisesOtherShares) {
  Rng rng(9);
  for (auto policy : {SharingPolicy::equal, SharingPolicy::proportional, SharingPolicy::stable_matching})
    for (int t = 0; t < 200; ++t) {
      std::vector<Claim> claims;
      const std::size_t k = 1 + rng.below(5);
      for (std::size_t j = 0; j < k; ++j) claims.push_back({j, double(1 + rng.below(4))});
      const auto before = policy_shares(policy, claims);
      auto more = claims;
      more.push_back({k, double(1 + rng.below(4))});
      const auto after = policy_shares(policy, more);
      for (std::size_t j = 0; j < k; ++j) EXPECT_LE(after[j], before[j] + 1e-15);
    }
}

TEST(Policies, NamesRoundTrip) {
  for (auto p : {SharingPolicy::equal, SharingPolicy::proportional, SharingPolicy::stable_matching})
    EXPECT_EQ(parse_policy(to_string(p)), p);
  EXPECT_EQ(parse_policy("stable-matching"), SharingPolicy::stable_matching);
  EXPECT_THROW(parse_policy("lottery"), std::invalid_argument);
}

TEST(Values, SingleTermAndEmpty) {
  const auto da = two_by_two_example();
  FractionalX x(2);
  x[0].push_back({0, 1.0});
  EXPECT_DOUBLE_EQ(advertiser_value(x, da, 0), 100.0);
  EXPECT_DOUBLE_EQ(total_value(FractionalX(2), da), 0.0);
}

TEST(Metric, Identity) {
  const auto da = two_by_two_example();
  const auto star = compute_fair(da, SharingPolicy::equal);
  EXPECT_EQ(fairness_metric(star.x, star.x, da), 0.0);
}

TEST(Metric, ProportionalValuesAreFair) {
  const std::vector<double> v{5, 5}, star{10, 10};
  EXPECT_DOUBLE_EQ(fairness_metric(v, star), 0.0);
}

TEST(Metric, HandValue) {
  const std::vector<double> v{10, 0}, star{10, 10};
  EXPECT_DOUBLE_EQ(fairness_metric(v, star), 20.0);
}

TEST(Metric, ZeroValueConvention) {
  const std::vector<double> v{0, 0}, star{3, 4};
  EXPECT_DOUBLE_EQ(fairness_metric(v, star), 7.0);
}

TEST(Metric, ScalingInvariance) {
  const auto da = two_by_two_example();
  const auto star = compute_fair(da, SharingPolicy::equal);
  FractionalX x(2);
  x[0] = {{0, 0.6}, {1, 0.2}};
  x[1] = {{1, 0.9}};
  FractionalX scaled = x;
  for (auto& shares : scaled)
    for (auto& s : shares) s.fraction *= 0.25;
  EXPECT_NEAR(fairness_metric(x, star.x, da), fairness_metric(scaled, star.x, da), 1e-12);
}

TEST(Metric, ToFractionalFromIntegral) {
  const auto da = two_by_two_example();
  DaAllocation a;
  a.assignment = {0, std::nullopt};
  const auto x = to_fractional(a);
  ASSERT_EQ(x.size(), 2u);
  EXPECT_DOUBLE_EQ(total_value(x, da), 100.0);
}
