#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "spl/instance.hpp"
#include "spl/lp.hpp"
#include "spl/rng.hpp"

using namespace spl;

namespace {

PlpInstance random_plp(std::uint64_t seed, std::size_t m, std::size_t n, std::size_t q) {
  Rng rng(seed);
  PlpInstance inst;
  for (std::size_t j = 0; j < m; ++j) inst.resources.push_back({"r" + std::to_string(j), 0.5 + 3.0 * rng.uniform()});
  for (std::size_t i = 0; i < n; ++i) {
    Agent a{"a" + std::to_string(i), {}};
    for (std::size_t o = 0; o < q; ++o) {
      Option opt{"o" + std::to_string(o), 10.0 * rng.uniform(), {}};
      for (std::size_t j = 0; j < m; ++j)
        if (rng.uniform() < 0.7) opt.usage.push_back({j, 2.0 * rng.uniform()});
      a.options.push_back(std::move(opt));
    }
    inst.agents.push_back(std::move(a));
  }
  return inst;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("spl_test_" + name);
}

}  // namespace

TEST(Normalize, DividesUsageByCapacity) {
  PlpInstance inst{{{"x", 2.0}, {"y", 4.0}}, {{"a", {{"o", 1.0, {{0, 1.0}, {1, 2.0}}}}}}};
  const auto out = normalize(inst);
  EXPECT_DOUBLE_EQ(out.resources[0].capacity, 1.0);
  EXPECT_DOUBLE_EQ(out.resources[1].capacity, 1.0);
  EXPECT_DOUBLE_EQ(out.agents[0].options[0].usage[0].amount, 0.5);
  EXPECT_DOUBLE_EQ(out.agents[0].options[0].usage[1].amount, 0.5);
  EXPECT_DOUBLE_EQ(out.agents[0].options[0].weight, 1.0);
}

TEST(Normalize, UnitCapacitiesUnchanged) {
  PlpInstance inst{{{"x", 1.0}}, {{"a", {{"o", 3.0, {{0, 0.25}}}}}}};
  EXPECT_EQ(normalize(inst), inst);
}

TEST(Normalize, IdempotentAndPreservesOptimum) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto inst = random_plp(s, 3, 8, 3);
    const auto once = normalize(inst);
    EXPECT_EQ(normalize(once), once);
    EXPECT_NEAR(solve_primal(inst).objective, solve_primal(once).objective, 1e-9);
  }
}

TEST(DaToPlp, SingleEdge) {
  DaInstance da{{{"adv", 2}}, {{"imp", {{0, 7.0}}}}};
  const auto plp = da_to_plp(da);
  ASSERT_EQ(plp.num_resources(), 1u);
  EXPECT_DOUBLE_EQ(plp.resources[0].capacity, 2.0);
  ASSERT_EQ(plp.num_agents(), 1u);
  ASSERT_EQ(plp.agents[0].options.size(), 1u);
  EXPECT_DOUBLE_EQ(plp.agents[0].options[0].weight, 7.0);
  ASSERT_EQ(plp.agents[0].options[0].usage.size(), 1u);
  EXPECT_EQ(plp.agents[0].options[0].usage[0].resource, 0u);
  EXPECT_DOUBLE_EQ(plp.agents[0].options[0].usage[0].amount, 1.0);
}

TEST(DaToPlp, ImpressionWithoutEdges) {
  DaInstance da{{{"adv", 1}}, {{"imp", {}}}};
  const auto plp = da_to_plp(da);
  ASSERT_EQ(plp.num_agents(), 1u);
  EXPECT_TRUE(plp.agents[0].options.empty());
}

TEST(DaToPlp, TwoByTwo) {
  const auto plp = da_to_plp(two_by_two_example());
  ASSERT_EQ(plp.num_resources(), 2u);
  EXPECT_DOUBLE_EQ(plp.resources[0].capacity, 1.0);
  EXPECT_DOUBLE_EQ(plp.resources[1].capacity, 1.0);
  ASSERT_EQ(plp.num_agents(), 2u);
  EXPECT_EQ(plp.agents[0].options.size(), 2u);
  EXPECT_EQ(plp.agents[1].options.size(), 2u);
}

TEST(DaToPlp, MatchesDirectBMatchingLp) {
  SyntheticParams p;
  p.advertisers = 4;
  p.impressions = 30;
  p.demand_min = 2;
  p.demand_max = 6;
  p.seed = 11;
  const auto da = generate_synthetic(p);
  // The same b-matching written by hand, capacities as plain numbers.
  PlpInstance direct;
  for (const auto& a : da.advertisers) direct.resources.push_back({a.id, double(a.demand)});
  for (const auto& imp : da.impressions) {
    Agent agent{imp.id, {}};
    for (const auto& e : imp.edges) agent.options.push_back({"e", e.weight, {{e.advertiser, 1.0}}});
    direct.agents.push_back(agent);
  }
  EXPECT_NEAR(solve_primal(da_to_plp(da)).objective, solve_primal(direct).objective, 1e-9);
}

TEST(Synthetic, Deterministic) {
  SyntheticParams p;
  p.advertisers = 10;
  p.impressions = 1000;
  p.seed = 1;
  EXPECT_EQ(to_json_string(generate_synthetic(p)), to_json_string(generate_synthetic(p)));
  p.seed = 2;
  SyntheticParams q = p;
  q.seed = 1;
  EXPECT_NE(to_json_string(generate_synthetic(p)), to_json_string(generate_synthetic(q)));
}

TEST(Synthetic, FullDensityGivesAllEdges) {
  SyntheticParams p;
  p.advertisers = 7;
  p.impressions = 50;
  p.density = 1.0;
  const auto da = generate_synthetic(p);
  for (const auto& imp : da.impressions) EXPECT_EQ(imp.edges.size(), 7u);
}

TEST(Synthetic, EveryImpressionHasAnEdgeAndIsValid) {
  SyntheticParams p;
  p.advertisers = 3;
  p.impressions = 400;
  p.density = 0.05;
  p.density_spread = 0.5;
  p.advertiser_spread = 0.3;
  p.impression_spread = 0.2;
  const auto da = generate_synthetic(p);
  EXPECT_NO_THROW(validate(da));
  for (const auto& imp : da.impressions) EXPECT_FALSE(imp.edges.empty());
  for (const auto& a : da.advertisers) {
    EXPECT_GE(a.demand, p.demand_min);
    EXPECT_LE(a.demand, p.demand_max);
  }
}

TEST(Synthetic, PublisherAShapeAtScale) {
  SyntheticParams p;
  p.advertisers = 10;
  p.impressions = 5000;
  const auto da = generate_synthetic(p);
  EXPECT_EQ(da.num_advertisers(), 10u);
  EXPECT_EQ(da.num_impressions(), 5000u);
}

TEST(Synthetic, RejectsBadParameters) {
  SyntheticParams p;
  p.density = 0.0;
  EXPECT_THROW(generate_synthetic(p), std::invalid_argument);
  p = {};
  p.density = 1.5;
  EXPECT_THROW(generate_synthetic(p), std::invalid_argument);
  p = {};
  p.sigma = 0.0;
  EXPECT_THROW(generate_synthetic(p), std::invalid_argument);
  p = {};
  p.advertisers = 0;
  EXPECT_THROW(generate_synthetic(p), std::invalid_argument);
  p = {};
  p.demand_min = 5;
  p.demand_max = 4;
  EXPECT_THROW(generate_synthetic(p), std::invalid_argument);
}

TEST(LowerBound, TwoTypes) {
  const auto probs = lower_bound_type_probabilities(2);
  ASSERT_EQ(probs.size(), 2u);
  EXPECT_NEAR(probs[0], 0.8, 1e-15);
  EXPECT_NEAR(probs[1], 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(lower_bound_type_value(2, 0), 1.0);
  EXPECT_DOUBLE_EQ(lower_bound_type_value(2, 1), 4.0);
  EXPECT_EQ(lower_bound_capacity(2), 5);
}

TEST(LowerBound, NoDraws) {
  const auto inst = generate_lower_bound({2, 0, 1});
  EXPECT_TRUE(inst.agents.empty());
  ASSERT_EQ(inst.num_resources(), 1u);
  EXPECT_DOUBLE_EQ(inst.resources[0].capacity, 5.0);
}

TEST(LowerBound, TypeFrequenciesMatchExactDistribution) {
  const std::size_t draws = 100000;
  const auto inst = generate_lower_bound({3, draws, 2024});
  std::vector<double> count(3, 0.0);
  for (const auto& a : inst.agents) {
    const double w = a.options[0].weight;
    count[w == 1.0 ? 0 : (w == 9.0 ? 1 : 2)] += 1.0;
  }
  const double p0 = 1.0 / (1.0 + std::pow(3.0, -2) + std::pow(3.0, -4));
  EXPECT_NEAR(count[0] / draws, p0, 0.01);
  // Chi-square with 2 degrees of freedom; 13.8 is the 0.999 quantile.
  const auto probs = lower_bound_type_probabilities(3);
  double chi2 = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double e = probs[k] * draws;
    chi2 += (count[k] - e) * (count[k] - e) / e;
  }
  EXPECT_LT(chi2, 13.8);
}

TEST(LowerBound, RejectsSmallT) {
  EXPECT_THROW(generate_lower_bound({1, 10, 1}), std::invalid_argument);
}

TEST(Hypotheses, WeightBoundValue) {
  PlpInstance inst;
  inst.resources = {{"r", 1.0}};
  for (int i = 0; i < 10000; ++i)
    inst.agents.push_back({"a" + std::to_string(i), {{"x", 1.0, {{0, 1e-9}}}, {"y", 1.0, {{0, 1e-9}}}}});
  const auto rep = check_theorem1_hypotheses(inst, 0.1, 1e6);
  EXPECT_NEAR(rep.w_bound, 0.1 / (2.0 * (std::log(10000.0) + std::log(2.0))), 1e-15);
  EXPECT_NEAR(rep.w_bound, 0.005049, 1e-6);
}

TEST(Hypotheses, SingleHeavyAgentFails) {
  PlpInstance inst{{{"r", 1.0}}, {{"a", {{"o", 3.0, {{0, 0.5}}}}}}};
  const auto rep = check_theorem1_hypotheses(inst, 0.1, 3.0);
  EXPECT_DOUBLE_EQ(rep.w_ratio, 1.0);
  EXPECT_FALSE(rep.weight_ok);
  EXPECT_FALSE(rep.ok());
}

TEST(Hypotheses, ZeroUsagePasses) {
  PlpInstance inst{{{"r", 1.0}}, {{"a", {{"o", 3.0, {{0, 0.0}}}}}, {"b", {{"o", 1.0, {}}}}}};
  const auto rep = check_theorem1_hypotheses(inst, 0.1, 4.0);
  EXPECT_DOUBLE_EQ(rep.a_ratio, 0.0);
  EXPECT_TRUE(rep.usage_ok);
}

TEST(Hypotheses, EmptyInstanceRejected) {
  PlpInstance inst{{{"r", 1.0}}, {}};
  EXPECT_THROW(check_theorem1_hypotheses(inst, 0.1, 1.0), std::invalid_argument);
}

TEST(Serialization, RoundTripGenerated) {
  SyntheticParams p;
  p.advertisers = 6;
  p.impressions = 200;
  p.seed = 99;
  const auto da = generate_synthetic(p);
  EXPECT_EQ(da_from_json_string(to_json_string(da)), da);
  const auto plp = da_to_plp(da);
  EXPECT_EQ(plp_from_json_string(to_json_string(plp)), plp);
  const auto lb = generate_lower_bound({3, 50, 4});
  EXPECT_EQ(plp_from_json_string(to_json_string(lb)), lb);
}

TEST(Serialization, FileRoundTrip) {
  const auto path = temp_path("roundtrip.json");
  const auto da = two_by_two_example();
  save(da, path);
  EXPECT_EQ(load_da(path), da);
  EXPECT_TRUE(std::holds_alternative<DaInstance>(load_any(path)));
  const auto plp = da_to_plp(da);
  save(plp, path);
  EXPECT_EQ(load_plp(path), plp);
  EXPECT_TRUE(std::holds_alternative<PlpInstance>(load_any(path)));
  std::filesystem::remove(path);
}

TEST(Serialization, NegativeCapacityRejected) {
  const std::string text = R"({"resources":[{"id":"r","capacity":-1}],"agents":[]})";
  EXPECT_THROW(plp_from_json_string(text), InstanceError);
}

TEST(Serialization, UnknownResourceRejected) {
  const std::string text =
      R"({"resources":[{"id":"r","capacity":1}],"agents":[{"id":"a","options":[{"id":"o","weight":1,"usage":{"zz":1}}]}]})";
  EXPECT_THROW(plp_from_json_string(text), InstanceError);
}

TEST(Serialization, UnknownFieldRejected) {
  const std::string text = R"({"resources":[{"id":"r","capacity":1,"color":"red"}],"agents":[]})";
  EXPECT_THROW(plp_from_json_string(text), InstanceError);
}

TEST(Serialization, ParseErrorCarriesPosition) {
  const std::string text = "{\"resources\": [\n  {\"id\": \"r\", \"capacity\": }\n]}";
  try {
    plp_from_json_string(text);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2u);
    EXPECT_GT(e.column, 1u);
  }
}

TEST(Serialization, DaInvariantsEnforced) {
  EXPECT_THROW(da_from_json_string(R"({"advertisers":[{"id":"a","demand":0}],"impressions":[]})"), InstanceError);
  EXPECT_THROW(da_from_json_string(
                   R"({"advertisers":[{"id":"a","demand":1}],"impressions":[{"id":"i","edges":[{"advertiser":"a","weight":0}]}]})"),
               InstanceError);
  EXPECT_THROW(
      da_from_json_string(
          R"({"advertisers":[{"id":"a","demand":1}],"impressions":[{"id":"i","edges":[{"advertiser":"a","weight":1},{"advertiser":"a","weight":2}]}]})"),
      InstanceError);
}

TEST(Serialization, MissingFileIsIoError) {
  EXPECT_THROW(load_any("/nonexistent/spl/instance.json"), IoError);
}
