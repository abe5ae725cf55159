#include "spl/ptas.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spl/online.hpp"
#include "spl/rng.hpp"

namespace spl {

double gain(const DualPrices& prices, const Option& option) {
  double g = option.weight;
  for (const auto& u : option.usage) {
    if (u.resource >= prices.beta.size())
      throw std::out_of_range("option '" + option.id + "' uses a resource without a price");
    g -= prices.beta[u.resource] * u.amount;
  }
  return g;
}

std::size_t sample_size(std::size_t n, double eps) {
  return static_cast<std::size_t>(std::floor(eps * static_cast<double>(n)));
}

PlpInstance prefix_instance(const PlpInstance& inst, std::span<const std::size_t> order, std::size_t count) {
  PlpInstance out;
  out.resources = inst.resources;
  out.agents.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.agents.push_back(inst.agents.at(order[k]));
  return out;
}

double perturbation_draw(std::uint64_t seed, std::size_t agent, std::size_t option) {
  const std::uint64_t bits = derive_seed(derive_seed(seed, agent), option);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

PlpInstance perturb_weights(const PlpInstance& inst, std::uint64_t seed, double delta) {
  PlpInstance out = inst;
  for (std::size_t i = 0; i < out.agents.size(); ++i)
    for (std::size_t o = 0; o < out.agents[i].options.size(); ++o)
      out.agents[i].options[o].weight *= 1.0 + perturbation_draw(seed, i, o) * delta;
  return out;
}

double shrink_factor(double eps) { return 1.0 + 3.0 * (eps + eps * eps); }

namespace {

void check_order(std::span<const std::size_t> order, std::size_t n) {
  if (order.size() != n) throw std::invalid_argument("arrival order must list every agent exactly once");
}

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0) && eps != 1.0) throw std::invalid_argument("eps must lie in (0, 1]");
}

std::vector<double> perturbed_weights_of(const Agent& agent, std::size_t index, std::uint64_t seed) {
  std::vector<double> w(agent.options.size());
  for (std::size_t o = 0; o < w.size(); ++o)
    w[o] = agent.options[o].weight * (1.0 + perturbation_draw(seed, index, o) * kPerturbation);
  return w;
}

// Demand n(j) of each resource when the instance is display-ad shaped: every
// option uses one resource, with the same amount across a resource.
std::vector<std::int64_t> implied_demands(const PlpInstance& inst) {
  std::vector<double> amount(inst.num_resources(), 0.0);
  for (const auto& agent : inst.agents)
    for (const auto& opt : agent.options) {
      if (opt.usage.size() != 1)
        throw std::invalid_argument("online training policy needs one resource per option");
      auto& a = amount[opt.usage[0].resource];
      if (a == 0.0) a = opt.usage[0].amount;
      if (std::abs(a - opt.usage[0].amount) > 1e-12 * a || a <= 0.0)
        throw std::invalid_argument("online training policy needs uniform positive usage per resource");
    }
  std::vector<std::int64_t> demand(inst.num_resources(), 1);
  for (std::size_t j = 0; j < demand.size(); ++j)
    if (amount[j] > 0.0)
      demand[j] = std::max<std::int64_t>(1, std::llround(inst.resources[j].capacity / amount[j]));
  return demand;
}

}  // namespace

DualPrices train(const PlpInstance& inst, std::span<const std::size_t> order, double eps, std::uint64_t seed,
                 const TrainOptions& options) {
  check_eps(eps);
  check_order(order, inst.num_agents());
  const std::size_t count = sample_size(inst.num_agents(), eps);
  if (count < 1) throw std::invalid_argument("training sample is empty (eps * n < 1)");
  PlpInstance sample = prefix_instance(perturb_weights(inst, seed), order, count);
  if (options.shrink)
    for (auto& r : sample.resources) r.capacity /= shrink_factor(eps);
  DualPrices prices = solve_reduced_dual(sample, eps, options.lp);
  prices.sample_size = count;
  return prices;
}

std::optional<std::size_t> best_option(const DualPrices& prices, const Agent& agent,
                                       std::span<const double> perturbed_weights) {
  std::optional<std::size_t> pick;
  double best = 0.0;
  for (std::size_t o = 0; o < agent.options.size(); ++o) {
    double g = gain(prices, agent.options[o]);
    if (!perturbed_weights.empty()) g += perturbed_weights[o] - agent.options[o].weight;
    if (g >= 0.0 && (!pick || g > best)) {
      pick = o;
      best = g;
    }
  }
  return pick;
}

PlpAllocation allocate_remaining(const DualPrices& prices, const PlpInstance& inst,
                                 std::span<const std::size_t> order, double eps, const AllocateOptions& options) {
  check_eps(eps);
  check_order(order, inst.num_agents());
  const std::size_t count = sample_size(inst.num_agents(), eps);
  PlpAllocation out;
  out.choice.assign(inst.num_agents(), std::nullopt);
  out.z.assign(inst.num_agents(), 0.0);
  out.usage.assign(inst.num_resources(), 0.0);

  auto fits = [&](const Option& opt) {
    for (const auto& u : opt.usage)
      if (out.usage[u.resource] + u.amount > inst.resources[u.resource].capacity * (1.0 + 1e-12)) return false;
    return true;
  };
  auto commit = [&](std::size_t agent, std::size_t o) {
    out.choice[agent] = o;
    for (const auto& u : inst.agents[agent].options[o].usage) out.usage[u.resource] += u.amount;
  };

  if (options.training_policy == TrainingPolicy::online && count > 0) {
    const auto demand = implied_demands(inst);
    std::vector<AdvertiserState> states(inst.num_resources());
    for (std::size_t j = 0; j < states.size(); ++j) states[j].demand = demand[j];
    // Sampled agents as display-ad impressions: option o -> its resource.
    for (std::size_t k = 0; k < count; ++k) {
      const Agent& agent = inst.agents[order[k]];
      Impression imp{agent.id, {}};
      for (const auto& opt : agent.options) imp.edges.push_back({opt.usage[0].resource, opt.weight});
      const Decision d = assign_impression(states, imp, order[k], DualRule::pd_avg);
      if (d.advertiser) out.z[order[k]] = d.margin;
    }
    for (std::size_t j = 0; j < states.size(); ++j)
      for (const auto& [w, agent] : states[j].kept) {
        const auto& opts = inst.agents[agent].options;
        for (std::size_t o = 0; o < opts.size(); ++o)
          if (opts[o].usage[0].resource == j) {
            commit(agent, o);
            out.sample_value += opts[o].weight;
            ++out.selected;
            break;
          }
      }
  }

  for (std::size_t k = count; k < order.size(); ++k) {
    const std::size_t i = order[k];
    const Agent& agent = inst.agents[i];
    std::vector<double> perturbed;
    if (options.perturb) perturbed = perturbed_weights_of(agent, i, options.seed);
    const auto pick = best_option(prices, agent, perturbed);
    if (!pick) continue;
    if (options.enforce_capacity && !fits(agent.options[*pick])) {
      ++out.rejected_for_capacity;
      continue;
    }
    commit(i, *pick);
    out.z[i] = gain(prices, agent.options[*pick]);
    out.value += agent.options[*pick].weight;
    ++out.selected;
  }
  out.value += out.sample_value;
  for (std::size_t j = 0; j < inst.num_resources(); ++j)
    out.violation = std::max(out.violation, out.usage[j] / inst.resources[j].capacity);
  return out;
}

bool SampleDiagnostics::any_bad() const {
  return t_bad || std::any_of(r_bad.begin(), r_bad.end(), [](bool b) { return b; });
}

SampleDiagnostics diagnose_sample(const PlpInstance& inst, std::span<const std::size_t> order, double eps,
                                  const DualPrices& prices, std::optional<std::uint64_t> perturbation_seed) {
  check_eps(eps);
  check_order(order, inst.num_agents());
  const std::size_t m = inst.num_resources();
  SampleDiagnostics d;
  d.sample_size = sample_size(inst.num_agents(), eps);
  d.C.assign(m, 0.0);
  d.C_S.assign(m, 0.0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    const Agent& agent = inst.agents[i];
    std::vector<double> perturbed;
    if (perturbation_seed) perturbed = perturbed_weights_of(agent, i, *perturbation_seed);
    const auto pick = best_option(prices, agent, perturbed);
    if (!pick) continue;
    ++d.selected_agents;
    const Option& opt = agent.options[*pick];
    const bool in_sample = k < d.sample_size;
    d.W += opt.weight;
    if (in_sample) d.W_S += opt.weight;
    for (const auto& u : opt.usage) {
      d.C[u.resource] += u.amount;
      if (in_sample) d.C_S[u.resource] += u.amount;
    }
  }

  const double n = static_cast<double>(std::max<std::size_t>(1, inst.num_agents()));
  const double q = static_cast<double>(std::max<std::size_t>(1, inst.max_options()));
  const double log_term = (static_cast<double>(m) + 1.0) * (std::log(n) + std::log(q));
  double a_max = 0.0;
  for (const auto& agent : inst.agents)
    for (const auto& opt : agent.options)
      for (const auto& u : opt.usage) a_max = std::max(a_max, u.amount);
  const double w_max = inst.max_weight();

  d.r.resize(m);
  d.r_threshold.resize(m);
  d.r_bad.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    d.r[j] = std::abs(d.C_S[j] - eps * d.C[j]);
    d.r_threshold[j] = log_term * a_max + std::sqrt(d.C[j]) * 2.0 * std::sqrt(eps * log_term * a_max);
    d.r_bad[j] = d.r[j] > 0.0 && d.r[j] >= d.r_threshold[j];
  }
  d.t = std::abs(d.W_S - eps * d.W);
  d.t_threshold = log_term * w_max + std::sqrt(d.W) * 2.0 * std::sqrt(eps * log_term * w_max);
  d.t_bad = d.t > 0.0 && d.t >= d.t_threshold;
  return d;
}

DaAllocation run_dualbase(const DaInstance& da, std::span<const std::size_t> order, double eps, std::uint64_t seed,
                          const DualBaseOptions& options, DualPrices* learned) {
  const PlpInstance inst = normalize(da_to_plp(da));
  TrainOptions topt;
  topt.shrink = options.shrink;
  topt.lp = options.lp;
  const DualPrices prices = train(inst, order, eps, seed, topt);
  if (learned) *learned = prices;
  AllocateOptions aopt;
  aopt.training_policy = options.training_policy;
  aopt.enforce_capacity = options.shrink;
  aopt.seed = seed;
  const PlpAllocation alloc = allocate_remaining(prices, inst, order, eps, aopt);

  std::vector<std::optional<std::size_t>> assignment(da.num_impressions());
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (alloc.choice[i]) assignment[i] = da.impressions[i].edges[*alloc.choice[i]].advertiser;
  DaAllocation out = evaluate_with_free_disposal(da, assignment, "dualbase");
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (out.assignment[i]) out.z[i] = alloc.z[i];
  return out;
}

}  // namespace spl
