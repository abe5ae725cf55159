#pragma once

// Online display-ad heuristics with free disposal. Every rule assigns an
// arriving impression to the advertiser maximizing w_ij - beta_j (if that
// margin is >= 0) and differs only in how beta_j follows the retained set.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spl/allocation.hpp"
#include "spl/instance.hpp"
#include "spl/ptas.hpp"

namespace spl {

enum class DualRule { greedy, pd_avg, pd_exp };

std::string_view to_string(DualRule rule);
DualRule parse_rule(std::string_view name);

/// Lightest retained weight once the advertiser is full, else 0.
double beta_greedy(const AdvertiserState& state);
/// Retained weight divided by n(j).
double beta_avg(const AdvertiserState& state);
/// Exponentially weighted average of the retained weights sorted
/// non-increasingly; missing slots count as weight 0.
double beta_exp(const AdvertiserState& state);
double beta_for(DualRule rule, const AdvertiserState& state);

struct Decision {
  std::optional<std::size_t> advertiser;
  double margin = 0.0;  // w_ij' - beta_j' (z_i), 0 if unassigned
  Retention retention;
};

/// Assign `impression` using each state's current beta, then refresh the
/// chosen advertiser's beta with `rule`. Ties go to the smaller advertiser.
Decision assign_impression(std::vector<AdvertiserState>& states, const Impression& impression,
                           std::size_t impression_index, DualRule rule);

/// As assign_impression, but margins are computed against `prices`.
Decision assign_with_prices(std::vector<AdvertiserState>& states, const Impression& impression,
                            std::size_t impression_index, DualRule rule, std::span<const double> prices);

DaAllocation run_online(const DaInstance& da, std::span<const std::size_t> order, DualRule rule);

enum class AlphaSchedule { linear, exponential };

struct HybridOptions {
  AlphaSchedule schedule = AlphaSchedule::linear;
  /// Exponential schedule: alpha halves every `half_life` fraction of the
  /// post-training stream.
  double half_life = 0.1;
  TrainOptions train;
};

/// Weight of the learned prices for the k-th (0-based) of `remaining`
/// post-training impressions.
double hybrid_alpha(std::size_t k, std::size_t remaining, const HybridOptions& options = {});

/// Learned prices per advertiser in weight units (beta_norm_j / n(j)).
std::vector<double> advertiser_prices(const DaInstance& da, const DualPrices& normalized_prices);

DaAllocation run_hybrid(const DaInstance& da, std::span<const std::size_t> order, double eps, std::uint64_t seed,
                        const HybridOptions& options = {});

}  // namespace spl
