#pragma once

// JSON run records written by the CLI. Every function returns a complete
// document ending in a newline; key order is fixed.

#include <string>

#include "spl/allocation.hpp"
#include "spl/bench.hpp"
#include "spl/fairness.hpp"
#include "spl/instance.hpp"
#include "spl/lp.hpp"
#include "spl/ptas.hpp"

namespace spl {

std::string lp_record(const PlpInstance& inst, const LpSolution& sol, const DualityReport& check);

/// Training-based run on a packing instance: prices, value, per-resource
/// utilization, violation factor and a diagnostics summary.
std::string dualbase_record(const PlpInstance& inst, const DualPrices& prices, const PlpAllocation& alloc,
                            const SampleDiagnostics& diag);

/// Online (or DualBase/HYBRID) display-ad run: rule, value, v_j,
/// unassigned and eviction counts, and z per impression.
std::string online_record(const DaInstance& da, const DaAllocation& alloc);

/// Sparse x (fractions > 0), prefixes and received mass.
std::string fair_record(const DaInstance& da, const FairAllocation& alloc);

std::string diagnostics_record(const PlpInstance& inst, const SampleDiagnostics& diag);

std::string lower_bound_record(const LowerBoundDemo& demo);

std::string convergence_record(const std::vector<ConvergencePoint>& curve);

std::string summary_record(const Experiment& experiment);

}  // namespace spl
