#pragma once

// Experiment harness: paired random-order trials over a display-ad instance,
// efficiency normalized so the LP optimum is 100 and fairness normalized so
// the ideal fair allocation is 0 and the least fair algorithm is 100.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spl/fairness.hpp"
#include "spl/instance.hpp"
#include "spl/online.hpp"
#include "spl/ptas.hpp"

namespace spl {

enum class Algorithm { greedy, pd_avg, pd_exp, hybrid, dualbase, fair, lp_weight };

/// Table names: GREEDY, PD_AVG, PD_EXP, HYBRID, DualBase, FAIR, LP_WEIGHT.
std::string_view to_string(Algorithm algorithm);
/// Case-insensitive; accepts the table names.
Algorithm parse_algorithm(std::string_view name);
std::vector<Algorithm> parse_algorithm_list(std::string_view comma_separated);

/// Uniform permutation of 0..n-1.
std::vector<std::size_t> random_order(std::size_t n, std::uint64_t seed);

/// Seed of trial t: derive_seed(master, t).
std::uint64_t trial_seed(std::uint64_t master, std::size_t trial);

struct RunReport {
  std::string algorithm;
  std::size_t trial = 0;
  double value = 0.0;
  double eff_norm = 0.0;       // 100 * value / LP optimum
  double fairness_raw = 0.0;   // f(x) against the fair reference allocation
  double fairness_norm = 0.0;  // FAIR = 0, worst of the trial = 100
  std::vector<double> advertiser_values;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
};

struct ExperimentConfig {
  std::vector<Algorithm> algorithms;
  std::size_t trials = 1;
  double eps = 0.01;
  std::uint64_t seed = 1;
  SharingPolicy fairness_policy = SharingPolicy::equal;
  DualBaseOptions dualbase;
  HybridOptions hybrid;
  std::size_t jobs = 1;
  /// Measure wall time; otherwise wall_ms is 0 so output is reproducible.
  bool timing = false;
  /// Called once per finished trial (from the aggregating thread).
  std::function<void(std::size_t trial)> on_trial;
};

struct Experiment {
  double lp_value = 0.0;
  double fair_value = 0.0;
  std::vector<RunReport> reports;  // trial-major, algorithms in config order
  /// Per-run allocations of the online algorithms, aligned with `reports`
  /// (empty for FAIR and LP_WEIGHT rows).
  std::vector<DaAllocation> allocations;
};

/// Throws std::invalid_argument for trials < 1, an empty algorithm list or
/// eps outside (0, 1).
Experiment run_experiment(const DaInstance& da, const ExperimentConfig& config);

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single row
};

Stat mean_std(std::span<const double> values);

struct AlgorithmSummary {
  std::string algorithm;
  std::size_t rows = 0;
  Stat value, eff_norm, fairness_raw, fairness_norm;
};

/// One summary per algorithm, in order of first appearance.
std::vector<AlgorithmSummary> summarize(std::span<const RunReport> reports);

inline constexpr std::string_view kCsvHeader = "algorithm,trial,value,eff_norm,fairness_raw,fairness_norm,seed,wall_ms";

std::string to_csv(std::span<const RunReport> reports);
void emit_csv(std::span<const RunReport> reports, const std::filesystem::path& path);
/// Parses text produced by to_csv. Throws ParseError on malformed rows.
std::vector<RunReport> parse_csv(std::string_view text);

// ---------------------------------------------------------------------------

struct ConvergencePoint {
  double eps = 0.0;
  Stat ratio;                 // DualBase value / LP optimum
  std::vector<double> ratios;  // one per trial
};

struct ConvergenceConfig {
  SyntheticParams params;  // params.seed is replaced per trial
  std::vector<double> eps_grid;
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  DualBaseOptions dualbase;
};

/// For every eps and trial t, generate an instance with seed
/// trial_seed(seed, t), draw an order from trial_seed(seed + 1, t) and
/// record DualBase / LP optimum. Throws std::invalid_argument for trials < 1.
std::vector<ConvergencePoint> ptas_convergence_study(const ConvergenceConfig& config);

// ---------------------------------------------------------------------------

struct LowerBoundRow {
  std::size_t draws = 0;
  double opt = 0.0;                  // mean hindsight optimum
  std::vector<double> alg;           // mean value of "accept type >= k", k = 0..T-1
  std::vector<double> ratio;         // alg[k] / opt
};

struct LowerBoundDemo {
  int T = 2;
  double capacity = 0.0;
  std::size_t reps = 0;
  std::vector<LowerBoundRow> rows;   // one per draw count
  std::vector<double> worst_ratio;   // per threshold k, min over rows
  double accept_all_worst = 0.0;     // worst_ratio[0]
  double best_threshold_worst = 0.0; // max_k worst_ratio[k]
};

/// Draw counts round(6 T ln T * T^(2j)), j = 0..T-1. For each, `reps`
/// sequences are drawn and every fixed threshold strategy is compared with
/// the hindsight optimum (the `capacity` most valuable draws).
LowerBoundDemo lower_bound_demo(int T, std::uint64_t seed, std::size_t reps = 50);

}  // namespace spl
