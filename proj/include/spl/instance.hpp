#pragma once

// Packing instances: the general model (resources with capacities, agents
// choosing at most one weighted option) and the display-ad special case
// (advertisers with impression demands, impressions with weighted edges).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace spl {

/// An instance (or file) breaks a documented invariant.
class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed JSON text. `line`/`column` are 1-based and refer to the input.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(what), line(line), column(column) {}
  std::size_t line;
  std::size_t column;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Resource {
  std::string id;
  double capacity = 1.0;
  bool operator==(const Resource&) const = default;
};

/// a_ioj for one resource; `resource` indexes PlpInstance::resources.
struct Usage {
  std::size_t resource = 0;
  double amount = 0.0;
  bool operator==(const Usage&) const = default;
};

struct Option {
  std::string id;
  double weight = 0.0;
  std::vector<Usage> usage;  // sorted by resource index, no duplicates
  bool operator==(const Option&) const = default;
};

struct Agent {
  std::string id;
  std::vector<Option> options;
  bool operator==(const Agent&) const = default;
};

struct PlpInstance {
  std::vector<Resource> resources;
  std::vector<Agent> agents;  // arrival order of the file, not of a run

  std::size_t num_resources() const { return resources.size(); }
  std::size_t num_agents() const { return agents.size(); }
  /// q = max_i |O_i| (0 for an instance without agents).
  std::size_t max_options() const;
  std::size_t num_option_variables() const;
  double max_weight() const;
  /// max over a_ioj / c_j.
  double max_relative_usage() const;
  std::optional<std::size_t> find_resource(const std::string& id) const;

  bool operator==(const PlpInstance&) const = default;
};

struct Advertiser {
  std::string id;
  std::int64_t demand = 1;  // n(j)
  bool operator==(const Advertiser&) const = default;
};

struct Edge {
  std::size_t advertiser = 0;  // index into DaInstance::advertisers
  double weight = 0.0;
  bool operator==(const Edge&) const = default;
};

struct Impression {
  std::string id;
  std::vector<Edge> edges;
  bool operator==(const Impression&) const = default;
};

struct DaInstance {
  std::vector<Advertiser> advertisers;
  std::vector<Impression> impressions;

  std::size_t num_advertisers() const { return advertisers.size(); }
  std::size_t num_impressions() const { return impressions.size(); }
  std::size_t num_edges() const;
  /// Weight of edge (impression, advertiser), or nullopt if not eligible.
  std::optional<double> weight(std::size_t impression, std::size_t advertiser) const;

  bool operator==(const DaInstance&) const = default;
};

/// Throws InstanceError on the first violated invariant.
void validate(const PlpInstance& inst);
void validate(const DaInstance& da);

/// Rescale every resource to capacity 1 (a_ioj /= c_j). Weights unchanged.
PlpInstance normalize(const PlpInstance& inst);

/// One unit-usage resource per advertiser (capacity n(j)), one agent per
/// impression, one option per edge.
PlpInstance da_to_plp(const DaInstance& da);

// ---------------------------------------------------------------------------
// Generators

/// Parameters for log-normal synthetic display-ad instances.
///
/// Each impression is eligible for each advertiser independently with
/// probability `density` (an impression that draws no advertiser is redrawn).
/// An edge weight is exp(mu + mu_j + sigma * N(0,1)) where mu_j is a
/// per-advertiser quality offset drawn once from N(0, advertiser_spread).
/// With density_spread > 0 advertiser j is eligible with its own probability
/// min(1, density * exp(density_spread * N(0,1))). With impression_spread > 0
/// every impression adds one common N(0, impression_spread) offset to the
/// log-weights of all its edges, so advertisers compete for the same
/// high-quality impressions.
struct SyntheticParams {
  std::size_t advertisers = 10;
  std::size_t impressions = 1000;
  std::int64_t demand_min = 10;
  std::int64_t demand_max = 100;
  double density = 0.3;
  double mu = 0.0;
  double sigma = 1.0;
  double advertiser_spread = 0.0;
  double density_spread = 0.0;
  double impression_spread = 0.0;
  std::uint64_t seed = 1;
};

DaInstance generate_synthetic(const SyntheticParams& params);

/// The single-resource instance with T value classes used to show that the
/// number of arrivals must be known in advance.
struct LowerBoundParams {
  int T = 2;
  std::size_t draws = 0;
  std::uint64_t seed = 1;
};

/// ceil(3 T ln T).
std::int64_t lower_bound_capacity(int T);
/// Exact type distribution: p_i proportional to T^(-2i), i = 0..T-1.
std::vector<double> lower_bound_type_probabilities(int T);
/// Value of a type-i agent, T^(2i) (floating point; exact while < 2^53).
double lower_bound_type_value(int T, int type);
/// Agents carry their type in the option id ("type-<i>").
PlpInstance generate_lower_bound(const LowerBoundParams& params);

/// The two-impression, two-advertiser example with weights
/// w(1,a)=100, w(2,a)=10, w(1,b)=4, w(2,b)=6 and unit demands.
DaInstance two_by_two_example();

/// K^2 unit-demand advertisers; advertiser k values its own impression k at
/// `own_weight` (< 1/K^2) and a shared special impression at K (k = 0) or
/// 1 (k > 0). The special impression is listed first.
DaInstance shared_impression_example(int K, double own_weight);

// ---------------------------------------------------------------------------
// Large-instance hypotheses of the (1 - O(eps)) guarantee

struct HypothesisReport {
  double log_term = 0.0;  // (m+1)(ln n + ln q)
  double w_ratio = 0.0;   // w_max / OPT
  double w_bound = 0.0;   // eps / log_term
  double a_ratio = 0.0;   // max a_ioj / c_j
  double a_bound = 0.0;   // eps^3 / log_term
  bool weight_ok = false;
  bool usage_ok = false;
  bool ok() const { return weight_ok && usage_ok; }
};

HypothesisReport check_theorem1_hypotheses(const PlpInstance& inst, double eps,
                                           double opt_value);

// ---------------------------------------------------------------------------
// JSON serialization

std::string to_json_string(const PlpInstance& inst);
std::string to_json_string(const DaInstance& da);
PlpInstance plp_from_json_string(const std::string& text);
DaInstance da_from_json_string(const std::string& text);

void save(const PlpInstance& inst, const std::filesystem::path& path);
void save(const DaInstance& da, const std::filesystem::path& path);
PlpInstance load_plp(const std::filesystem::path& path);
DaInstance load_da(const std::filesystem::path& path);

using AnyInstance = std::variant<PlpInstance, DaInstance>;
/// Dispatches on the top-level keys ("resources"/"agents" vs
/// "advertisers"/"impressions").
AnyInstance load_any(const std::filesystem::path& path);
AnyInstance any_from_json_string(const std::string& text);

/// Read a whole file; throws IoError.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace spl
