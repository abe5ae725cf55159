#pragma once

// Training-based primal-dual allocation ("DualBase"): observe the first
// eps*n arrivals, learn per-resource prices from the reduced sample LP, then
// give every later agent its maximum-gain option when that gain is >= 0.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spl/allocation.hpp"
#include "spl/instance.hpp"
#include "spl/lp.hpp"

namespace spl {

/// Relative weight perturbation used to break ties before training.
inline constexpr double kPerturbation = 1e-9;

/// What happens to the agents of the training prefix.
enum class TrainingPolicy {
  skip,    // left unassigned
  online,  // assigned online by the uniform-average dual rule (display-ad shaped instances only)
};

/// w_io - sum_j beta_j a_ioj. Throws std::out_of_range if the option uses a
/// resource the price vector does not cover.
double gain(const DualPrices& prices, const Option& option);

/// floor(eps * n).
std::size_t sample_size(std::size_t n, double eps);

/// The instance restricted to the first `count` agents of `order`.
PlpInstance prefix_instance(const PlpInstance& inst, std::span<const std::size_t> order, std::size_t count);

/// The u in [0,1) attached to option o of agent i; depends only on the
/// agent's index in the instance, not on the arrival order.
double perturbation_draw(std::uint64_t seed, std::size_t agent, std::size_t option);

/// Multiply every weight by (1 + u * delta), u = perturbation_draw(seed, i, o).
PlpInstance perturb_weights(const PlpInstance& inst, std::uint64_t seed, double delta = kPerturbation);

struct TrainOptions {
  /// Divide capacities by 1 + 3(eps + eps^2) before solving the sample LP.
  bool shrink = false;
  LpOptions lp;
};

/// Learn prices on the prefix S of `order` (|S| = floor(eps n) >= 1).
/// `inst` must be normalized. Throws std::invalid_argument on an empty sample.
DualPrices train(const PlpInstance& inst, std::span<const std::size_t> order, double eps, std::uint64_t seed,
                 const TrainOptions& options = {});

/// 1 + 3(eps + eps^2).
double shrink_factor(double eps);

struct AllocateOptions {
  TrainingPolicy training_policy = TrainingPolicy::skip;
  /// Reject a selection that would exceed an original capacity.
  bool enforce_capacity = false;
  /// Seed of the tie-breaking perturbation; must match the one used in train.
  std::uint64_t seed = 0;
  bool perturb = true;
};

struct PlpAllocation {
  std::vector<std::optional<std::size_t>> choice;  // option per agent, by agent index
  std::vector<double> z;                           // recorded gain of the selected option
  std::vector<double> usage;                       // per resource
  double value = 0.0;
  double sample_value = 0.0;   // contribution of training-prefix agents
  double violation = 0.0;      // max_j usage_j / c_j
  std::size_t selected = 0;
  std::size_t rejected_for_capacity = 0;
};

/// Allocate the agents after the training prefix in arrival order. Capacities
/// are measured, not enforced, unless options.enforce_capacity is set.
PlpAllocation allocate_remaining(const DualPrices& prices, const PlpInstance& inst,
                                 std::span<const std::size_t> order, double eps,
                                 const AllocateOptions& options = {});

/// The option of maximum (perturbed) gain among those with gain >= 0.
std::optional<std::size_t> best_option(const DualPrices& prices, const Agent& agent,
                                       std::span<const double> perturbed_weights = {});

struct SampleDiagnostics {
  double W = 0.0;     // total weight of the max-gain options over all agents
  double W_S = 0.0;   // the same restricted to the sample
  std::vector<double> C;     // usage of the max-gain options per resource
  std::vector<double> C_S;   // restricted to the sample
  std::vector<double> r;     // |C_S - eps C|
  std::vector<double> r_threshold;
  double t = 0.0;            // |W_S - eps W|
  double t_threshold = 0.0;
  std::vector<bool> r_bad;
  bool t_bad = false;
  std::size_t sample_size = 0;
  std::size_t selected_agents = 0;  // |I*|

  bool any_bad() const;
};

/// Concentration of the sample with respect to the options selected by
/// `prices` on the whole instance. Thresholds use natural logarithms. With
/// `perturbation_seed` the max-gain option is chosen exactly as
/// allocate_remaining chooses it.
SampleDiagnostics diagnose_sample(const PlpInstance& inst, std::span<const std::size_t> order, double eps,
                                  const DualPrices& prices,
                                  std::optional<std::uint64_t> perturbation_seed = std::nullopt);

struct DualBaseOptions {
  TrainingPolicy training_policy = TrainingPolicy::online;
  /// Shrink capacities for training and never exceed an original capacity.
  bool shrink = false;
  LpOptions lp;
};

/// The training-based allocator on a display-ad instance. Prices are learned
/// on the normalized packing form; the result is evaluated with free disposal.
DaAllocation run_dualbase(const DaInstance& da, std::span<const std::size_t> order, double eps, std::uint64_t seed,
                          const DualBaseOptions& options = {}, DualPrices* learned = nullptr);

}  // namespace spl
