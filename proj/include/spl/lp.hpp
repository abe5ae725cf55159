#pragma once

// Primal/dual solver for the packing LP
//
//   max  sum_io w_io x_io
//   s.t. sum_o x_io        <= 1     for every agent i     (dual z_i)
//        sum_io a_ioj x_io <= c_j   for every resource j  (dual beta_j)
//        x >= 0
//
// The solver is a dense revised simplex. The per-agent convexity rows are
// generalized upper bounds and are kept implicit: each agent has one "key"
// basic variable that is eliminated, so the explicitly factored basis is
// only (#resources x #resources) no matter how many agents there are.
// Pricing is partial Dantzig; a run of degenerate pivots switches to
// Bland's rule until the objective moves again.

#include <cstddef>
#include <string>
#include <vector>

#include "spl/instance.hpp"

namespace spl {

/// Per-resource posted prices learned from a (reduced) sample LP.
struct DualPrices {
  std::vector<double> beta;  // indexed like PlpInstance::resources
  double epsilon = 0.0;      // sample fraction used for training
  std::size_t sample_size = 0;
};

struct LpOptions {
  double tolerance = 1e-7;
  /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
  std::size_t degenerate_limit = 50;
  /// 0 picks a limit proportional to the problem size.
  std::size_t max_iterations = 0;
};

struct LpSolution {
  std::vector<std::vector<double>> x;  // x[i][o]
  std::vector<double> beta;            // per resource
  std::vector<double> z;               // per agent
  double objective = 0.0;              // primal value
  double dual_objective = 0.0;         // sum_j c_j beta_j + sum_i z_i
  std::size_t iterations = 0;
};

LpSolution solve_primal(const PlpInstance& inst, const LpOptions& options = {});

/// Solve the sample LP with every capacity multiplied by `eps` and return the
/// resource prices. An empty sample yields all-zero prices.
DualPrices solve_reduced_dual(const PlpInstance& sample, double eps, const LpOptions& options = {});

/// Scaling used by solve_reduced_dual: a copy with capacities times `eps`.
PlpInstance reduced_instance(const PlpInstance& sample, double eps);

struct DualityReport {
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  /// |primal - dual| / (1 + |primal|)
  double gap = 0.0;
  /// Largest excess of an agent row over 1, of a resource row over its
  /// capacity, or of a negative x.
  double max_primal_violation = 0.0;
  /// Largest w_io - z_i - sum_j beta_j a_ioj, or negative dual value.
  double max_dual_violation = 0.0;
  /// Largest |x_io * reduced cost|, |z_i * agent slack|, |beta_j * resource slack|.
  double max_complementarity = 0.0;
  bool ok = false;
};

/// Check a primal/dual pair against the instance. Throws
/// std::invalid_argument when the solution's shape does not match.
DualityReport verify_duality(const PlpInstance& inst, const LpSolution& sol, double tol);

/// CPLEX-LP text form of the primal (see README for the naming scheme).
std::string to_lp_format(const PlpInstance& inst);

}  // namespace spl
