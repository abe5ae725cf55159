#include "spl/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace spl {

std::string_view to_string(SharingPolicy policy) {
  switch (policy) {
    case SharingPolicy::equal: return "equal";
    case SharingPolicy::proportional: return "proportional";
    case SharingPolicy::stable_matching: return "stable_matching";
  }
  return "?";
}

SharingPolicy parse_policy(std::string_view name) {
  if (name == "equal") return SharingPolicy::equal;
  if (name == "proportional") return SharingPolicy::proportional;
  if (name == "stable_matching" || name == "stable-matching") return SharingPolicy::stable_matching;
  throw std::invalid_argument("unknown sharing policy '" + std::string(name) + "'");
}

std::vector<double> policy_shares(SharingPolicy policy, std::span<const Claim> claims) {
  std::vector<double> f(claims.size(), 0.0);
  if (claims.empty()) return f;
  switch (policy) {
    case SharingPolicy::equal:
      std::fill(f.begin(), f.end(), 1.0 / static_cast<double>(claims.size()));
      break;
    case SharingPolicy::proportional: {
      double total = 0.0;
      for (const auto& c : claims) total += c.weight;
      for (std::size_t k = 0; k < claims.size(); ++k) f[k] = claims[k].weight / total;
      break;
    }
    case SharingPolicy::stable_matching: {
      std::size_t top = 0;
      for (std::size_t k = 1; k < claims.size(); ++k) {
        const auto& c = claims[k];
        const auto& t = claims[top];
        if (c.weight > t.weight || (c.weight == t.weight && c.advertiser < t.advertiser)) top = k;
      }
      f[top] = 1.0;
      break;
    }
  }
  return f;
}

std::vector<std::vector<std::size_t>> preference_orders(const DaInstance& da) {
  std::vector<std::vector<std::pair<double, std::size_t>>> by_adv(da.num_advertisers());
  for (std::size_t i = 0; i < da.num_impressions(); ++i)
    for (const auto& e : da.impressions[i].edges) by_adv[e.advertiser].emplace_back(e.weight, i);
  std::vector<std::vector<std::size_t>> pref(da.num_advertisers());
  for (std::size_t j = 0; j < by_adv.size(); ++j) {
    auto& v = by_adv[j];
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    pref[j].reserve(v.size());
    for (const auto& [w, i] : v) pref[j].push_back(i);
  }
  return pref;
}

namespace {

// Interested sets J(i) with incremental share and mass bookkeeping.
class Interest {
 public:
  Interest(const DaInstance& da, SharingPolicy policy)
      : da_(da), policy_(policy), claims_(da.num_impressions()), x_(da.num_impressions()),
        mass_(da.num_advertisers(), 0.0) {}

  void add(std::size_t impression, std::size_t advertiser) {
    auto& c = claims_[impression];
    const double w = *da_.weight(impression, advertiser);
    const auto pos = std::lower_bound(c.begin(), c.end(), advertiser,
                                      [](const Claim& a, std::size_t j) { return a.advertiser < j; });
    c.insert(pos, Claim{advertiser, w});
    refresh(impression);
  }

  FairAllocation finish(std::vector<std::size_t> prefix, std::size_t advances) {
    FairAllocation out;
    out.policy = policy_;
    out.prefix = std::move(prefix);
    out.x = std::move(x_);
    out.mass = std::move(mass_);
    out.advances = advances;
    return out;
  }

  double mass(std::size_t j) const { return mass_[j]; }

 private:
  void refresh(std::size_t i) {
    for (const auto& s : x_[i]) mass_[s.advertiser] -= s.fraction;
    const auto f = policy_shares(policy_, claims_[i]);
    x_[i].clear();
    for (std::size_t k = 0; k < f.size(); ++k)
      if (f[k] > 0.0) {
        x_[i].push_back({claims_[i][k].advertiser, f[k]});
        mass_[claims_[i][k].advertiser] += f[k];
      }
  }

  const DaInstance& da_;
  SharingPolicy policy_;
  std::vector<std::vector<Claim>> claims_;
  FractionalX x_;
  std::vector<double> mass_;
};

}  // namespace

FairAllocation allocation_from_prefixes(const DaInstance& da, SharingPolicy policy,
                                        std::span<const std::size_t> prefix) {
  if (prefix.size() != da.num_advertisers()) throw std::invalid_argument("one prefix length per advertiser expected");
  const auto pref = preference_orders(da);
  Interest interest(da, policy);
  for (std::size_t j = 0; j < prefix.size(); ++j) {
    if (prefix[j] > pref[j].size()) throw std::invalid_argument("prefix longer than the advertiser's impressions");
    for (std::size_t k = 0; k < prefix[j]; ++k) interest.add(pref[j][k], j);
  }
  return interest.finish({prefix.begin(), prefix.end()}, 0);
}

FairAllocation compute_fair(const DaInstance& da, SharingPolicy policy, std::span<const std::size_t> processing_order) {
  std::vector<std::size_t> visit(processing_order.begin(), processing_order.end());
  if (visit.empty()) {
    visit.resize(da.num_advertisers());
    std::iota(visit.begin(), visit.end(), std::size_t{0});
  }
  {
    auto sorted = visit;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < sorted.size(); ++k)
      if (sorted.size() != da.num_advertisers() || sorted[k] != k)
        throw std::invalid_argument("processing order must be a permutation of the advertisers");
  }

  const auto pref = preference_orders(da);
  Interest interest(da, policy);
  std::vector<std::size_t> prefix(da.num_advertisers(), 0);
  auto unsatisfied = [&](std::size_t j) {
    return prefix[j] < pref[j].size() &&
           interest.mass(j) < static_cast<double>(da.advertisers[j].demand) - kSatisfiedSlack;
  };
  std::size_t advances = 0;
  for (bool moved = true; moved;) {
    moved = false;
    for (std::size_t j : visit) {
      if (!unsatisfied(j)) continue;
      interest.add(pref[j][prefix[j]], j);
      ++prefix[j];
      ++advances;
      moved = true;
    }
  }
  return interest.finish(std::move(prefix), advances);
}

FairnessCheck check_fair(const DaInstance& da, const FairAllocation& alloc, double tol) {
  auto fail = [](std::string why) { return FairnessCheck{false, std::move(why)}; };
  if (alloc.x.size() != da.num_impressions()) return fail("allocation does not cover every impression");
  if (alloc.prefix.size() != da.num_advertisers() || alloc.mass.size() != da.num_advertisers())
    return fail("allocation does not cover every advertiser");
  const auto pref = preference_orders(da);
  for (std::size_t j = 0; j < pref.size(); ++j)
    if (alloc.prefix[j] > pref[j].size())
      return fail("prefix of advertiser " + da.advertisers[j].id + " is longer than its impression list");

  for (std::size_t i = 0; i < alloc.x.size(); ++i) {
    double sum = 0.0;
    for (const auto& s : alloc.x[i]) {
      if (s.fraction < -tol) return fail("negative share on impression " + da.impressions[i].id);
      sum += s.fraction;
    }
    if (sum > 1.0 + tol) return fail("impression " + da.impressions[i].id + " is allocated more than once");
  }

  const FairAllocation expected = allocation_from_prefixes(da, alloc.policy, alloc.prefix);
  for (std::size_t i = 0; i < alloc.x.size(); ++i) {
    std::map<std::size_t, double> diff;
    for (const auto& s : alloc.x[i]) diff[s.advertiser] += s.fraction;
    for (const auto& s : expected.x[i]) diff[s.advertiser] -= s.fraction;
    for (const auto& [j, d] : diff)
      if (std::abs(d) > tol)
        return fail("shares of impression " + da.impressions[i].id + " do not follow the policy over its interested set");
  }

  std::vector<double> received(da.num_advertisers(), 0.0);
  for (const auto& shares : alloc.x)
    for (const auto& s : shares) received[s.advertiser] += s.fraction;
  for (std::size_t j = 0; j < received.size(); ++j) {
    if (std::abs(received[j] - alloc.mass[j]) > tol) return fail("recorded mass of " + da.advertisers[j].id + " is wrong");
    const bool satisfied = received[j] >= static_cast<double>(da.advertisers[j].demand) - kSatisfiedSlack;
    if (!satisfied && alloc.prefix[j] != pref[j].size())
      return fail("advertiser " + da.advertisers[j].id + " is neither satisfied nor interested in all impressions");
  }
  return {};
}

FractionalX to_fractional(const DaAllocation& alloc) {
  FractionalX x(alloc.assignment.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    if (alloc.assignment[i]) x[i].push_back({*alloc.assignment[i], 1.0});
  return x;
}

double advertiser_value(const FractionalX& x, const DaInstance& da, std::size_t advertiser) {
  double v = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (const auto& s : x[i])
      if (s.advertiser == advertiser) v += s.fraction * da.weight(i, advertiser).value_or(0.0);
  return v;
}

std::vector<double> advertiser_values(const FractionalX& x, const DaInstance& da) {
  std::vector<double> v(da.num_advertisers(), 0.0);
  for (std::size_t i = 0; i < x.size() && i < da.num_impressions(); ++i)
    for (const auto& s : x[i]) v.at(s.advertiser) += s.fraction * da.weight(i, s.advertiser).value_or(0.0);
  return v;
}

double total_value(const FractionalX& x, const DaInstance& da) {
  const auto v = advertiser_values(x, da);
  return std::accumulate(v.begin(), v.end(), 0.0);
}

double fairness_metric(std::span<const double> values, std::span<const double> star_values) {
  if (values.size() != star_values.size()) throw std::invalid_argument("value vectors differ in length");
  const double V = std::accumulate(values.begin(), values.end(), 0.0);
  const double V_star = std::accumulate(star_values.begin(), star_values.end(), 0.0);
  if (V == 0.0) return V_star;
  const double scale = V_star / V;
  double f = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) f += std::abs(scale * values[j] - star_values[j]);
  return f;
}

double fairness_metric(const FractionalX& x, const FractionalX& x_star, const DaInstance& da) {
  return fairness_metric(advertiser_values(x, da), advertiser_values(x_star, da));
}

}  // namespace spl
