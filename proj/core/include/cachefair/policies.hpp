#pragma once

// Routing policies compared in the experiments. Every policy routes each
// region-file's demand completely, so total routed volume is the same for all.

#include <cstdint>
#include <string_view>

#include "cachefair/instance.hpp"
#include "cachefair/network.hpp"
#include "cachefair/solver.hpp"

namespace cachefair {

enum class PolicyKind { Fair, ClosestAvailable, Unsplittable };

std::string_view to_string(PolicyKind kind);
/// Accepts "fair", "closest" and "unsplittable". Throws std::invalid_argument.
PolicyKind policy_from_string(std::string_view name);

/// Each region-file goes entirely to the eligible station nearest to the
/// area centroid of its region; ties go to the lowest id.
RoutingVector closest_available(const CrpInstance& instance, const NetworkInstance& network,
                                const RegionMap& regions);

/// Per-cell variant: every grid cell of a region sends its part of the demand
/// to the eligible station nearest to the cell center.
RoutingVector closest_available_per_cell(const CrpInstance& instance,
                                         const NetworkInstance& network,
                                         const CoverageGrid& grid);

/// Each region-file goes entirely to one eligible station drawn uniformly.
RoutingVector unsplittable(const CrpInstance& instance, std::uint64_t seed);

struct FairResult {
  RoutingVector routing;
  SolveReport report;
  /// Largest per-slot change made by restore_feasibility.
  double repair = 0.0;
};

/// Proportionally fair routing from solve_crp, rescaled per region-file so
/// that each demand is routed exactly.
FairResult fair(const CrpInstance& instance, const SolverConfig& config);

/// Scales the shares of every region-file to sum to its demand (equal split
/// when all shares are zero). Returns the largest change applied to a slot.
double restore_feasibility(const CrpInstance& instance, RoutingVector& y);

}  // namespace cachefair
