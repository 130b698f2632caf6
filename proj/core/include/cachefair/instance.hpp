#pragma once

// The cache routing problem: region-files with demands, the stations that
// may serve them, per-station utilities, and objective evaluation.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cachefair/network.hpp"

namespace cachefair {

/// Raised for invalid solver or utility configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class UtilityFamily { WeightedLog };

/// U(v) = weight * ln(1 + v / soft_limit). The derivative weight / (soft_limit + v)
/// is positive, strictly decreasing and vanishes as v grows, which is what the
/// bucket-fill sweep relies on.
struct UtilitySpec {
  UtilityFamily family = UtilityFamily::WeightedLog;
  double weight = 1.0;
  double soft_limit = 1.0;

  double value(double v) const;
  double derivative(double v) const;
  /// -U''(v), used for step sizes in tests and tuning.
  double curvature(double v) const;
  /// Throws ConfigError unless U' is positive and strictly decreasing.
  void validate() const;
};

struct UtilityDefaults {
  double weight = 1.0;
  /// Unset: expected total cache-related demand divided by the station count.
  std::optional<double> soft_limit;
};

struct StationUtility {
  StationId id = 0;
  UtilitySpec utility;
};

struct RegionFile {
  int id = 0;
  RegionKey region;
  FileId file = 0;
  double demand = 0.0;
  std::vector<StationId> eligible;  // sorted, subset of region
};

/// One routing variable y_{m,q}. Slots of a region-file are contiguous and
/// follow the order of its eligible list.
struct ServedEntry {
  int region_file = 0;
  std::size_t slot = 0;
};

class CrpInstance {
 public:
  CrpInstance() = default;
  CrpInstance(std::vector<StationUtility> stations, std::vector<RegionFile> region_files);

  const std::vector<StationUtility>& stations() const { return stations_; }
  const std::vector<RegionFile>& region_files() const { return region_files_; }
  std::size_t station_count() const { return stations_.size(); }
  std::size_t region_file_count() const { return region_files_.size(); }
  std::size_t slot_count() const { return slot_station_.size(); }

  /// Position of a station id in stations(). Throws std::out_of_range.
  std::size_t station_index(StationId id) const;

  std::size_t slot_begin(int q) const { return offsets_[q]; }
  std::size_t slot_end(int q) const { return offsets_[q + 1]; }
  std::size_t slot_station(std::size_t slot) const { return slot_station_[slot]; }
  std::size_t slot_of(std::size_t station_index, int q) const;

  /// Q(m) for the station at the given index, in region-file order.
  std::span<const ServedEntry> served_by(std::size_t station_index) const {
    return served_[station_index];
  }

  double max_demand() const;
  double total_demand() const;

 private:
  std::vector<StationUtility> stations_;
  std::vector<RegionFile> region_files_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> slot_station_;
  std::vector<std::vector<ServedEntry>> served_;
};

/// Sparse routing y_{m,q} stored by slot.
struct RoutingVector {
  std::vector<double> values;

  static RoutingVector zeros(const CrpInstance& instance) {
    return {std::vector<double>(instance.slot_count(), 0.0)};
  }
  double operator[](std::size_t slot) const { return values[slot]; }
  double& operator[](std::size_t slot) { return values[slot]; }
};

/// One price per region-file, indexed by region-file id.
struct DualVector {
  std::vector<double> prices;

  static DualVector zeros(const CrpInstance& instance) {
    return {std::vector<double>(instance.region_file_count(), 0.0)};
  }
  double operator[](std::size_t q) const { return prices[q]; }
  double& operator[](std::size_t q) { return prices[q]; }
};

/// Region-files with demand below this are dropped when building instances.
inline constexpr double kMinDemand = 1e-12;

CrpInstance build_instance(const NetworkInstance& network, const RegionMap& regions,
                           double user_density, const UtilityDefaults& defaults = {});

/// v_m: total volume routed to the station at station_index.
double total_volume(const CrpInstance& instance, const RoutingVector& y,
                    std::size_t station_index);
std::vector<double> station_volumes(const CrpInstance& instance, const RoutingVector& y);

/// N_q - sum_m y_{m,q}, one entry per region-file.
std::vector<double> constraint_residuals(const CrpInstance& instance, const RoutingVector& y);

double objective(const CrpInstance& instance, const RoutingVector& y);
double feasibility_residual(const CrpInstance& instance, const RoutingVector& y);
double augmented_lagrangian(const CrpInstance& instance, const RoutingVector& y,
                            const DualVector& lambda, double rho);

/// Checks 0 <= y <= N componentwise (with slack).
bool within_box(const CrpInstance& instance, const RoutingVector& y, double slack = 0.0);

}  // namespace cachefair
