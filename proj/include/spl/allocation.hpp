#pragma once

// Display-ad allocations and the free-disposal bookkeeping shared by the
// online heuristics and the training-based allocator.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spl/instance.hpp"

namespace spl {

/// One advertiser during an online run. `kept` holds the retained
/// impressions as (weight, impression index); with free disposal it never
/// grows beyond `demand`.
struct AdvertiserState {
  std::int64_t demand = 1;
  std::set<std::pair<double, std::size_t>> kept;
  double kept_weight = 0.0;
  double beta = 0.0;

  bool full() const { return static_cast<std::int64_t>(kept.size()) >= demand; }
};

std::vector<AdvertiserState> initial_states(const DaInstance& da);

/// Result of offering an impression to an advertiser under free disposal.
struct Retention {
  bool retained = false;                // the offered impression is kept
  std::optional<std::size_t> evicted;   // an earlier impression dropped to make room
  double value_change = 0.0;
};

/// Keep the `demand` heaviest of kept + {offered}. Ties keep the newcomer.
Retention offer(AdvertiserState& state, double weight, std::size_t impression);

struct DaAllocation {
  std::string algorithm;
  /// Final holder of each impression (evicted impressions are unassigned).
  std::vector<std::optional<std::size_t>> assignment;
  std::vector<double> advertiser_value;  // v_j
  double value = 0.0;                    // V = sum_j v_j
  std::size_t unassigned = 0;
  std::size_t evictions = 0;
  /// z_i recorded at assignment time (0 for unassigned impressions).
  std::vector<double> z;
};

/// Per-advertiser values and totals of an integral assignment, keeping only
/// the demand-many heaviest impressions of each advertiser.
DaAllocation evaluate_with_free_disposal(const DaInstance& da, std::span<const std::optional<std::size_t>> assignment,
                                         std::string algorithm);

}  // namespace spl
