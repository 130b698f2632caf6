#include "cachefair/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace cachefair {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Fair: return "fair";
    case PolicyKind::ClosestAvailable: return "closest";
    case PolicyKind::Unsplittable: return "unsplittable";
  }
  return "unknown";
}

PolicyKind policy_from_string(std::string_view name) {
  if (name == "fair") return PolicyKind::Fair;
  if (name == "closest") return PolicyKind::ClosestAvailable;
  if (name == "unsplittable") return PolicyKind::Unsplittable;
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

namespace {

// Position within rf.eligible of the station nearest to p.
std::size_t nearest_eligible(const RegionFile& rf, const NetworkInstance& network, Point p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rf.eligible.size(); ++k) {
    const Point c = network.station(rf.eligible[k]).position;
    const double d = std::hypot(c.x - p.x, c.y - p.y);
    if (d < best_d) {  // eligible is sorted, so ties keep the lower id
      best_d = d;
      best = k;
    }
  }
  return best;
}

}  // namespace

RoutingVector closest_available(const CrpInstance& instance, const NetworkInstance& network,
                                const RegionMap& regions) {
  RoutingVector y = RoutingVector::zeros(instance);
  for (const RegionFile& rf : instance.region_files()) {
    auto it = regions.entries.find(rf.region);
    if (it == regions.entries.end()) {
      throw std::invalid_argument("region-file " + std::to_string(rf.id) +
                                  " has no region in the region map");
    }
    y[instance.slot_begin(rf.id) + nearest_eligible(rf, network, it->second.centroid)] = rf.demand;
  }
  return y;
}

RoutingVector closest_available_per_cell(const CrpInstance& instance,
                                         const NetworkInstance& network,
                                         const CoverageGrid& grid) {
  std::unordered_map<std::uint32_t, std::vector<int>> by_key;
  std::map<RegionKey, std::uint32_t> key_ids;
  for (std::uint32_t k = 1; k < grid.key_count(); ++k) key_ids.emplace(grid.key(k), k);
  for (const RegionFile& rf : instance.region_files()) {
    auto it = key_ids.find(rf.region);
    if (it == key_ids.end()) {
      throw std::invalid_argument("region-file " + std::to_string(rf.id) +
                                  " has no region on the grid");
    }
    by_key[it->second].push_back(rf.id);
  }

  std::vector<std::int64_t> hits(instance.slot_count(), 0);
  std::unordered_map<std::uint32_t, std::int64_t> cells;
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      auto it = by_key.find(grid.key_id(i, j));
      if (it == by_key.end()) continue;
      ++cells[it->first];
      const Point p = grid.cell_center(i, j);
      for (int q : it->second) {
        const RegionFile& rf = instance.region_files()[q];
        ++hits[instance.slot_begin(q) + nearest_eligible(rf, network, p)];
      }
    }
  }

  RoutingVector y = RoutingVector::zeros(instance);
  for (const auto& [key, qs] : by_key) {
    const auto total = static_cast<double>(cells.at(key));
    for (int q : qs) {
      const double demand = instance.region_files()[q].demand;
      for (std::size_t s = instance.slot_begin(q); s < instance.slot_end(q); ++s) {
        y[s] = demand * (static_cast<double>(hits[s]) / total);
      }
    }
  }
  restore_feasibility(instance, y);
  return y;
}

RoutingVector unsplittable(const CrpInstance& instance, std::uint64_t seed) {
  RoutingVector y = RoutingVector::zeros(instance);
  std::mt19937_64 rng(seed);
  for (const RegionFile& rf : instance.region_files()) {
    std::uniform_int_distribution<std::size_t> pick(0, rf.eligible.size() - 1);
    y[instance.slot_begin(rf.id) + pick(rng)] = rf.demand;
  }
  return y;
}

double restore_feasibility(const CrpInstance& instance, RoutingVector& y) {
  double largest = 0.0;
  for (const RegionFile& rf : instance.region_files()) {
    const std::size_t begin = instance.slot_begin(rf.id);
    const std::size_t end = instance.slot_end(rf.id);
    double routed = 0.0;
    for (std::size_t s = begin; s < end; ++s) routed += y[s];
    if (routed == rf.demand) continue;
    for (std::size_t s = begin; s < end; ++s) {
      const double next = routed > 0.0 ? y[s] * (rf.demand / routed)
                                       : rf.demand / static_cast<double>(end - begin);
      largest = std::max(largest, std::abs(next - y[s]));
      y[s] = next;
    }
  }
  return largest;
}

FairResult fair(const CrpInstance& instance, const SolverConfig& config) {
  FairResult result;
  result.report = solve_crp(instance, config);
  result.routing = result.report.routing;
  for (double& v : result.routing.values) v = std::max(v, 0.0);
  result.repair = restore_feasibility(instance, result.routing);
  return result;
}

}  // namespace cachefair
