#pragma once

// Prefix-based fair allocations: every advertiser is interested in a prefix
// of its impressions (by decreasing weight), each impression is split among
// the advertisers interested in it by a sharing policy, and an advertiser
// widens its prefix until it receives its demand or runs out of impressions.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spl/allocation.hpp"
#include "spl/instance.hpp"

namespace spl {

enum class SharingPolicy { equal, proportional, stable_matching };

std::string_view to_string(SharingPolicy policy);
SharingPolicy parse_policy(std::string_view name);

/// An interested advertiser and its weight for the impression.
struct Claim {
  std::size_t advertiser = 0;
  double weight = 0.0;
};

/// Fractions given to `claims` (same order) by the policy. Stable matching
/// gives everything to the heaviest claim, ties to the smaller advertiser.
std::vector<double> policy_shares(SharingPolicy policy, std::span<const Claim> claims);

struct Share {
  std::size_t advertiser = 0;
  double fraction = 0.0;
};

/// Fractional assignment: the shares of every impression.
using FractionalX = std::vector<std::vector<Share>>;

struct FairAllocation {
  SharingPolicy policy = SharingPolicy::equal;
  std::vector<std::size_t> prefix;  // p(j)
  FractionalX x;                    // by impression
  std::vector<double> mass;         // sum_i x_ij
  std::size_t advances = 0;         // prefix extensions performed
};

/// Impressions eligible for advertiser j, heaviest first, ties by index.
std::vector<std::vector<std::size_t>> preference_orders(const DaInstance& da);

/// The allocation induced by given prefixes: x_i. is the policy split over
/// the advertisers whose prefix contains i.
FairAllocation allocation_from_prefixes(const DaInstance& da, SharingPolicy policy,
                                        std::span<const std::size_t> prefix);

/// Shortest fair allocation. Unsatisfied advertisers extend their prefix one
/// impression at a time, visited round-robin in `processing_order`
/// (advertiser index order when empty).
FairAllocation compute_fair(const DaInstance& da, SharingPolicy policy,
                            std::span<const std::size_t> processing_order = {});

/// Mass threshold slack for "receives at least n(j)".
inline constexpr double kSatisfiedSlack = 1e-9;

struct FairnessCheck {
  bool ok = true;
  std::string reason;  // first violated condition
};

/// Whether `alloc` is fair under its policy: shares sum to at most 1, they
/// are the policy split over the prefix-induced interested sets, and every
/// advertiser is satisfied or interested in all of its impressions.
FairnessCheck check_fair(const DaInstance& da, const FairAllocation& alloc, double tol = 1e-9);

FractionalX to_fractional(const DaAllocation& alloc);

double advertiser_value(const FractionalX& x, const DaInstance& da, std::size_t advertiser);
std::vector<double> advertiser_values(const FractionalX& x, const DaInstance& da);
double total_value(const FractionalX& x, const DaInstance& da);

/// sum_j |V(x*)/V(x) v_j(x) - v_j(x*)|; V(x) = 0 gives sum_j v_j(x*).
double fairness_metric(std::span<const double> values, std::span<const double> star_values);
double fairness_metric(const FractionalX& x, const FractionalX& x_star, const DaInstance& da);

}  // namespace spl
