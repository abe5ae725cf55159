#include "spl/instance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "spl/rng.hpp"

namespace spl {

std::size_t PlpInstance::max_options() const {
  std::size_t q = 0;
  for (const auto& agent : agents) q = std::max(q, agent.options.size());
  return q;
}

std::size_t PlpInstance::num_option_variables() const {
  std::size_t count = 0;
  for (const auto& agent : agents) count += agent.options.size();
  return count;
}

double PlpInstance::max_weight() const {
  double w = 0.0;
  for (const auto& agent : agents)
    for (const auto& opt : agent.options) w = std::max(w, opt.weight);
  return w;
}

double PlpInstance::max_relative_usage() const {
  double a = 0.0;
  for (const auto& agent : agents)
    for (const auto& opt : agent.options)
      for (const auto& u : opt.usage)
        a = std::max(a, u.amount / resources[u.resource].capacity);
  return a;
}

std::optional<std::size_t> PlpInstance::find_resource(const std::string& id) const {
  for (std::size_t j = 0; j < resources.size(); ++j)
    if (resources[j].id == id) return j;
  return std::nullopt;
}

std::size_t DaInstance::num_edges() const {
  std::size_t count = 0;
  for (const auto& imp : impressions) count += imp.edges.size();
  return count;
}

std::optional<double> DaInstance::weight(std::size_t impression, std::size_t advertiser) const {
  for (const auto& e : impressions.at(impression).edges)
    if (e.advertiser == advertiser) return e.weight;
  return std::nullopt;
}

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

void validate(const PlpInstance& inst) {
  std::unordered_set<std::string> ids;
  for (const auto& r : inst.resources) {
    if (!ids.insert(r.id).second) throw InstanceError("duplicate resource id '" + r.id + "'");
    if (!std::isfinite(r.capacity) || r.capacity <= 0.0)
      throw InstanceError("resource '" + r.id + "' must have a positive finite capacity");
  }
  for (const auto& agent : inst.agents) {
    for (const auto& opt : agent.options) {
      const std::string where = "agent '" + agent.id + "' option '" + opt.id + "'";
      if (!finite_nonneg(opt.weight)) throw InstanceError(where + ": weight must be finite and >= 0");
      for (std::size_t k = 0; k < opt.usage.size(); ++k) {
        const auto& u = opt.usage[k];
        if (u.resource >= inst.resources.size())
          throw InstanceError(where + ": usage references an unknown resource");
        if (!finite_nonneg(u.amount)) throw InstanceError(where + ": usage must be finite and >= 0");
        if (k > 0 && opt.usage[k - 1].resource >= u.resource)
          throw InstanceError(where + ": usage entries must be sorted and unique");
      }
    }
  }
}

void validate(const DaInstance& da) {
  std::unordered_set<std::string> ids;
  for (const auto& a : da.advertisers) {
    if (!ids.insert(a.id).second) throw InstanceError("duplicate advertiser id '" + a.id + "'");
    if (a.demand <= 0) throw InstanceError("advertiser '" + a.id + "' must have a positive demand");
  }
  std::vector<std::size_t> seen(da.advertisers.size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < da.impressions.size(); ++i) {
    const auto& imp = da.impressions[i];
    for (const auto& e : imp.edges) {
      if (e.advertiser >= da.advertisers.size())
        throw InstanceError("impression '" + imp.id + "' references an unknown advertiser");
      if (!std::isfinite(e.weight) || e.weight <= 0.0)
        throw InstanceError("impression '" + imp.id + "': edge weights must be finite and > 0");
      if (seen[e.advertiser] == i)
        throw InstanceError("impression '" + imp.id + "' lists advertiser '" +
                            da.advertisers[e.advertiser].id + "' twice");
      seen[e.advertiser] = i;
    }
  }
}

PlpInstance normalize(const PlpInstance& inst) {
  PlpInstance out = inst;
  for (auto& agent : out.agents)
    for (auto& opt : agent.options)
      for (auto& u : opt.usage) u.amount /= inst.resources[u.resource].capacity;
  for (auto& r : out.resources) r.capacity = 1.0;
  return out;
}

PlpInstance da_to_plp(const DaInstance& da) {
  PlpInstance out;
  out.resources.reserve(da.advertisers.size());
  for (const auto& a : da.advertisers)
    out.resources.push_back({a.id, static_cast<double>(a.demand)});
  out.agents.reserve(da.impressions.size());
  for (const auto& imp : da.impressions) {
    Agent agent{imp.id, {}};
    agent.options.reserve(imp.edges.size());
    for (const auto& e : imp.edges)
      agent.options.push_back({da.advertisers[e.advertiser].id, e.weight, {{e.advertiser, 1.0}}});
    out.agents.push_back(std::move(agent));
  }
  return out;
}

DaInstance generate_synthetic(const SyntheticParams& p) {
  if (p.advertisers < 1 || p.impressions < 1)
    throw std::invalid_argument("synthetic generator needs at least one advertiser and impression");
  if (!(p.density > 0.0 && p.density <= 1.0))
    throw std::invalid_argument("eligibility density must lie in (0, 1]");
  if (!(p.sigma > 0.0) || !std::isfinite(p.mu)) throw std::invalid_argument("log-normal sigma must be > 0");
  if (p.demand_min < 1 || p.demand_max < p.demand_min)
    throw std::invalid_argument("demand range must satisfy 1 <= min <= max");
  if (!(p.advertiser_spread >= 0.0)) throw std::invalid_argument("advertiser spread must be >= 0");
  if (!(p.density_spread >= 0.0)) throw std::invalid_argument("density spread must be >= 0");
  if (!(p.impression_spread >= 0.0)) throw std::invalid_argument("impression spread must be >= 0");

  Rng rng(p.seed);
  DaInstance da;
  std::vector<double> quality(p.advertisers, 0.0);
  std::vector<double> density(p.advertisers, p.density);
  da.advertisers.reserve(p.advertisers);
  const auto span = static_cast<std::uint64_t>(p.demand_max - p.demand_min + 1);
  for (std::size_t j = 0; j < p.advertisers; ++j) {
    const auto demand = p.demand_min + static_cast<std::int64_t>(rng.below(span));
    da.advertisers.push_back({"a" + std::to_string(j), demand});
    if (p.advertiser_spread > 0.0) quality[j] = p.advertiser_spread * rng.normal();
    if (p.density_spread > 0.0) density[j] = std::min(1.0, p.density * std::exp(p.density_spread * rng.normal()));
  }
  da.impressions.reserve(p.impressions);
  for (std::size_t i = 0; i < p.impressions; ++i) {
    Impression imp{"i" + std::to_string(i), {}};
    while (imp.edges.empty()) {
      for (std::size_t j = 0; j < p.advertisers; ++j)
        if (density[j] >= 1.0 || rng.uniform() < density[j]) imp.edges.push_back({j, 0.0});
    }
    const double common = p.impression_spread > 0.0 ? p.impression_spread * rng.normal() : 0.0;
    for (auto& e : imp.edges) e.weight = rng.lognormal(p.mu + quality[e.advertiser] + common, p.sigma);
    da.impressions.push_back(std::move(imp));
  }
  return da;
}

std::int64_t lower_bound_capacity(int T) {
  if (T < 2) throw std::invalid_argument("lower-bound construction needs T >= 2");
  return static_cast<std::int64_t>(std::ceil(3.0 * T * std::log(static_cast<double>(T))));
}

std::vector<double> lower_bound_type_probabilities(int T) {
  if (T < 2) throw std::invalid_argument("lower-bound construction needs T >= 2");
  std::vector<double> p(static_cast<std::size_t>(T));
  double total = 0.0;
  for (int i = 0; i < T; ++i) {
    p[static_cast<std::size_t>(i)] = std::pow(static_cast<double>(T), -2.0 * i);
    total += p[static_cast<std::size_t>(i)];
  }
  for (auto& v : p) v /= total;
  return p;
}

double lower_bound_type_value(int T, int type) {
  return std::pow(static_cast<double>(T), 2.0 * type);
}

PlpInstance generate_lower_bound(const LowerBoundParams& params) {
  const auto capacity = lower_bound_capacity(params.T);
  const auto probs = lower_bound_type_probabilities(params.T);
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) cdf[i] = (acc += probs[i]);
  cdf.back() = 1.0;

  PlpInstance inst;
  inst.resources.push_back({"r", static_cast<double>(capacity)});
  inst.agents.reserve(params.draws);
  Rng rng(params.seed);
  for (std::size_t k = 0; k < params.draws; ++k) {
    const double u = rng.uniform();
    const auto type = static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    inst.agents.push_back({"g" + std::to_string(k),
                           {{"type-" + std::to_string(type),
                             lower_bound_type_value(params.T, type),
                             {{0, 1.0}}}}});
  }
  return inst;
}

DaInstance two_by_two_example() {
  DaInstance da;
  da.advertisers = {{"a", 1}, {"b", 1}};
  da.impressions = {{"1", {{0, 100.0}, {1, 4.0}}}, {"2", {{0, 10.0}, {1, 6.0}}}};
  return da;
}

DaInstance shared_impression_example(int K, double own_weight) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  const auto count = static_cast<std::size_t>(K) * static_cast<std::size_t>(K);
  DaInstance da;
  da.advertisers.reserve(count);
  for (std::size_t k = 0; k < count; ++k) da.advertisers.push_back({"adv" + std::to_string(k), 1});
  Impression special{"special", {}};
  for (std::size_t k = 0; k < count; ++k) special.edges.push_back({k, k == 0 ? double(K) : 1.0});
  da.impressions.push_back(std::move(special));
  for (std::size_t k = 0; k < count; ++k)
    da.impressions.push_back({"own" + std::to_string(k), {{k, own_weight}}});
  return da;
}

HypothesisReport check_theorem1_hypotheses(const PlpInstance& inst, double eps, double opt_value) {
  if (inst.agents.empty()) throw std::invalid_argument("hypothesis check needs a nonempty instance");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (!(opt_value > 0.0)) throw std::invalid_argument("optimum value must be positive");
  HypothesisReport rep;
  const double n = static_cast<double>(inst.num_agents());
  const double q = static_cast<double>(std::max<std::size_t>(1, inst.max_options()));
  rep.log_term = (static_cast<double>(inst.num_resources()) + 1.0) * (std::log(n) + std::log(q));
  // A single one-option agent gives log_term = 0. The sample floor(eps * 1)
  // is then empty, so nothing is learned and the bounds collapse to zero.
  rep.w_bound = rep.log_term > 0.0 ? eps / rep.log_term : 0.0;
  rep.a_bound = rep.log_term > 0.0 ? eps * eps * eps / rep.log_term : 0.0;
  rep.w_ratio = inst.max_weight() / opt_value;
  rep.a_ratio = inst.max_relative_usage();
  rep.weight_ok = rep.w_ratio <= rep.w_bound;
  rep.usage_ok = rep.a_ratio <= rep.a_bound;
  return rep;
}

}  // namespace spl
