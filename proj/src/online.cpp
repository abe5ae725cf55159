#include "spl/online.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spl {

std::vector<AdvertiserState> initial_states(const DaInstance& da) {
  std::vector<AdvertiserState> states(da.num_advertisers());
  for (std::size_t j = 0; j < states.size(); ++j) states[j].demand = da.advertisers[j].demand;
  return states;
}

Retention offer(AdvertiserState& state, double weight, std::size_t impression) {
  Retention r;
  if (!state.full()) {
    state.kept.emplace(weight, impression);
    state.kept_weight += weight;
    r.retained = true;
    r.value_change = weight;
    return r;
  }
  const auto lightest = *state.kept.begin();
  if (weight < lightest.first) return r;  // the newcomer is the one disposed of
  state.kept.erase(state.kept.begin());
  state.kept.emplace(weight, impression);
  state.kept_weight += weight - lightest.first;
  r.retained = true;
  r.evicted = lightest.second;
  r.value_change = weight - lightest.first;
  return r;
}

DaAllocation evaluate_with_free_disposal(const DaInstance& da, std::span<const std::optional<std::size_t>> assignment,
                                         std::string algorithm) {
  if (assignment.size() != da.num_impressions())
    throw std::invalid_argument("assignment does not match the number of impressions");
  DaAllocation out;
  out.algorithm = std::move(algorithm);
  out.assignment.assign(da.num_impressions(), std::nullopt);
  out.advertiser_value.assign(da.num_advertisers(), 0.0);
  out.z.assign(da.num_impressions(), 0.0);

  std::vector<std::vector<std::pair<double, std::size_t>>> held(da.num_advertisers());
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (!assignment[i]) continue;
    const auto w = da.weight(i, *assignment[i]);
    if (!w) throw std::invalid_argument("impression " + da.impressions[i].id + " assigned to an ineligible advertiser");
    held[*assignment[i]].emplace_back(*w, i);
  }
  for (std::size_t j = 0; j < held.size(); ++j) {
    auto& h = held[j];
    std::sort(h.begin(), h.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    const auto keep = std::min<std::size_t>(h.size(), static_cast<std::size_t>(da.advertisers[j].demand));
    for (std::size_t k = 0; k < keep; ++k) {
      out.assignment[h[k].second] = j;
      out.advertiser_value[j] += h[k].first;
    }
    out.evictions += h.size() - keep;
  }
  for (double v : out.advertiser_value) out.value += v;
  out.unassigned = static_cast<std::size_t>(std::count(out.assignment.begin(), out.assignment.end(), std::nullopt));
  return out;
}

std::string_view to_string(DualRule rule) {
  switch (rule) {
    case DualRule::greedy: return "greedy";
    case DualRule::pd_avg: return "pd_avg";
    case DualRule::pd_exp: return "pd_exp";
  }
  return "?";
}

DualRule parse_rule(std::string_view name) {
  if (name == "greedy") return DualRule::greedy;
  if (name == "pd_avg") return DualRule::pd_avg;
  if (name == "pd_exp") return DualRule::pd_exp;
  throw std::invalid_argument("unknown dual rule '" + std::string(name) + "'");
}

double beta_greedy(const AdvertiserState& state) {
  return state.full() && !state.kept.empty() ? state.kept.begin()->first : 0.0;
}

double beta_avg(const AdvertiserState& state) {
  return state.kept_weight / static_cast<double>(state.demand);
}

double beta_exp(const AdvertiserState& state) {
  if (state.kept.empty()) return 0.0;
  const double n = static_cast<double>(state.demand);
  const double g = 1.0 + 1.0 / n;
  double sum = 0.0;
  double factor = 1.0;
  for (auto it = state.kept.rbegin(); it != state.kept.rend(); ++it) {
    sum += it->first * factor;
    factor *= g;
  }
  return sum / (n * (std::pow(g, n) - 1.0));
}

double beta_for(DualRule rule, const AdvertiserState& state) {
  switch (rule) {
    case DualRule::greedy: return beta_greedy(state);
    case DualRule::pd_avg: return beta_avg(state);
    case DualRule::pd_exp: return beta_exp(state);
  }
  return 0.0;
}

namespace {

template <typename PriceOf>
Decision assign_by(std::vector<AdvertiserState>& states, const Impression& impression, std::size_t impression_index,
                   DualRule rule, PriceOf price_of) {
  Decision d;
  const Edge* best = nullptr;
  double best_margin = 0.0;
  for (const auto& e : impression.edges) {
    const double margin = e.weight - price_of(e.advertiser);
    if (!best || margin > best_margin || (margin == best_margin && e.advertiser < best->advertiser)) {
      best = &e;
      best_margin = margin;
    }
  }
  if (!best || best_margin < 0.0) return d;
  auto& state = states[best->advertiser];
  d.advertiser = best->advertiser;
  d.margin = best_margin;
  d.retention = offer(state, best->weight, impression_index);
  state.beta = beta_for(rule, state);
  return d;
}

DaAllocation collect(const DaInstance& da, const std::vector<AdvertiserState>& states, std::string algorithm,
                     std::vector<double> z, std::size_t evictions) {
  DaAllocation out;
  out.algorithm = std::move(algorithm);
  out.assignment.assign(da.num_impressions(), std::nullopt);
  out.advertiser_value.assign(da.num_advertisers(), 0.0);
  for (std::size_t j = 0; j < states.size(); ++j)
    for (const auto& [w, i] : states[j].kept) {
      out.assignment[i] = j;
      out.advertiser_value[j] += w;
    }
  for (double v : out.advertiser_value) out.value += v;
  out.unassigned = static_cast<std::size_t>(std::count(out.assignment.begin(), out.assignment.end(), std::nullopt));
  out.evictions = evictions;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (!out.assignment[i]) z[i] = 0.0;
  out.z = std::move(z);
  return out;
}

std::size_t discarded(const Decision& d) {
  if (!d.advertiser) return 0;
  return d.retention.retained ? (d.retention.evicted ? 1 : 0) : 1;
}

void check_order(const DaInstance& da, std::span<const std::size_t> order) {
  if (order.size() != da.num_impressions())
    throw std::invalid_argument("arrival order must list every impression exactly once");
}

}  // namespace

Decision assign_impression(std::vector<AdvertiserState>& states, const Impression& impression,
                           std::size_t impression_index, DualRule rule) {
  return assign_by(states, impression, impression_index, rule,
                   [&](std::size_t j) { return states[j].beta; });
}

Decision assign_with_prices(std::vector<AdvertiserState>& states, const Impression& impression,
                            std::size_t impression_index, DualRule rule, std::span<const double> prices) {
  return assign_by(states, impression, impression_index, rule, [&](std::size_t j) { return prices[j]; });
}

DaAllocation run_online(const DaInstance& da, std::span<const std::size_t> order, DualRule rule) {
  check_order(da, order);
  auto states = initial_states(da);
  std::vector<double> z(da.num_impressions(), 0.0);
  std::size_t evictions = 0;
  for (std::size_t i : order) {
    const Decision d = assign_impression(states, da.impressions.at(i), i, rule);
    if (d.retention.retained) z[i] = d.margin;
    evictions += discarded(d);
  }
  return collect(da, states, std::string(to_string(rule)), std::move(z), evictions);
}

double hybrid_alpha(std::size_t k, std::size_t remaining, const HybridOptions& options) {
  if (remaining <= 1) return 1.0;
  const double frac = static_cast<double>(k) / static_cast<double>(remaining - 1);
  if (options.schedule == AlphaSchedule::linear) return std::clamp(1.0 - frac, 0.0, 1.0);
  return std::exp2(-static_cast<double>(k) / (options.half_life * static_cast<double>(remaining)));
}

std::vector<double> advertiser_prices(const DaInstance& da, const DualPrices& normalized_prices) {
  if (normalized_prices.beta.size() != da.num_advertisers())
    throw std::invalid_argument("price vector does not match the advertisers");
  std::vector<double> p(da.num_advertisers());
  for (std::size_t j = 0; j < p.size(); ++j)
    p[j] = normalized_prices.beta[j] / static_cast<double>(da.advertisers[j].demand);
  return p;
}

DaAllocation run_hybrid(const DaInstance& da, std::span<const std::size_t> order, double eps, std::uint64_t seed,
                        const HybridOptions& options) {
  check_order(da, order);
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  const std::size_t count = sample_size(da.num_impressions(), eps);
  if (count < 1) throw std::invalid_argument("training sample is empty (eps * n < 1)");

  auto states = initial_states(da);
  std::vector<double> z(da.num_impressions(), 0.0);
  std::size_t evictions = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = order[k];
    const Decision d = assign_impression(states, da.impressions[i], i, DualRule::pd_avg);
    if (d.retention.retained) z[i] = d.margin;
    evictions += discarded(d);
  }

  const DualPrices learned = train(normalize(da_to_plp(da)), order, eps, seed, options.train);
  const auto beta1 = advertiser_prices(da, learned);
  const std::size_t remaining = order.size() - count;
  std::vector<double> prices(da.num_advertisers());
  for (std::size_t k = 0; k < remaining; ++k) {
    const std::size_t i = order[count + k];
    const double alpha = hybrid_alpha(k, remaining, options);
    for (std::size_t j = 0; j < prices.size(); ++j) prices[j] = alpha * beta1[j] + (1.0 - alpha) * states[j].beta;
    const Decision d = assign_with_prices(states, da.impressions[i], i, DualRule::pd_avg, prices);
    if (d.retention.retained) z[i] = d.margin;
    evictions += discarded(d);
  }
  return collect(da, states, "hybrid", std::move(z), evictions);
}

}  // namespace spl
