#pragma once

// Monte-Carlo experiments on random networks: load shares of the three
// policies over a radius sweep (single tier) or a small:large density sweep
// (two tiers), aggregated into means and standard errors.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cachefair/instance.hpp"
#include "cachefair/network.hpp"
#include "cachefair/policies.hpp"
#include "cachefair/solver.hpp"

namespace cachefair {

enum class ScenarioKind { SingleTier, TwoTier };

std::string_view to_string(ScenarioKind kind);
ScenarioKind scenario_from_string(std::string_view name);

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::SingleTier;
  int runs = 100;
  std::uint64_t seed = 1;
  double density = 8.0;  // stations per km^2 (large tier when two-tier)
  Window window;
  int file_count = 6;
  double zipf_s = 1.0;
  double user_density = 100.0;  // expected requests per km^2
  double grid_resolution = 400.0;

  // Single tier.
  std::vector<double> radii{0.0625, 0.125, 0.1875, 0.25, 0.3125, 0.375, 0.4375, 0.5};
  int cache_size = 2;

  // Two tiers. Small stations per large station; each small station caches
  // one of large_files, every large station caches all of them.
  std::vector<double> ratios{0.5, 1.0, 2.0, 4.0, 8.0};
  double large_radius = 0.1875;
  double small_radius = 0.0625;
  std::vector<FileId> large_files{0, 1};

  ScaledSettings solver;
  bool closest_per_cell = false;
  /// 0: CACHEFAIR_THREADS or the hardware concurrency.
  unsigned threads = 0;

  /// Throws ConfigError.
  void validate() const;
};

ScenarioConfig default_scenario(ScenarioKind kind);

/// Random network for one single-tier run.
NetworkInstance single_tier_network(const ScenarioConfig& config, double radius,
                                    std::uint64_t seed);
/// Random network for one two-tier run. Large stations come first in id order.
NetworkInstance two_tier_network(const ScenarioConfig& config, double ratio, std::uint64_t seed);

/// v_m / sum of v over all stations, keyed by station id. Empty when nothing
/// is routed.
std::map<StationId, double> load_shares(const CrpInstance& instance, const RoutingVector& y);

inline constexpr double kConservationTolerance = 1e-9;

struct PolicyOutcome {
  double total_volume = 0.0;
  std::map<std::string, double> metrics;  // absent when undefined for the run
};

struct RunRecord {
  std::size_t sweep_index = 0;
  double sweep = 0.0;
  int run = 0;
  std::uint64_t seed = 0;
  bool degenerate = false;
  std::size_t stations = 0;
  std::size_t region_files = 0;
  std::map<PolicyKind, PolicyOutcome> outcomes;
  bool fair_converged = true;
  double conservation_gap = 0.0;  // max |total(policy) - total(fair)|
};

struct MetricRow {
  double sweep = 0.0;
  PolicyKind policy = PolicyKind::Fair;
  std::string metric;
  double mean = 0.0;
  double std_error = 0.0;
  int runs = 0;

  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

struct ExperimentResult {
  std::vector<MetricRow> rows;
  std::vector<RunRecord> records;  // sweep-major, then run index
  int degenerate_runs = 0;
  int unconverged_fair_runs = 0;
  double max_conservation_gap = 0.0;
};

/// Metric names: "max_share" and "min_share" over all stations.
ExperimentResult run_single_tier(const ScenarioConfig& config);
/// Metric names: "large_share" (aggregate over the large tier),
/// "small_max_share" and "small_min_share" (over small stations only).
ExperimentResult run_two_tier(const ScenarioConfig& config);
ExperimentResult run_experiment(const ScenarioConfig& config);

/// All three policies on one network. Throws std::runtime_error when the
/// policies disagree on total routed volume.
RunRecord evaluate_network(const NetworkInstance& network, const ScenarioConfig& config,
                           std::uint64_t policy_seed);

/// Means and standard errors per (sweep, policy, metric) over non-degenerate runs.
std::vector<MetricRow> aggregate(const std::vector<RunRecord>& records);

/// Shortest decimal form that parses back to the same double.
std::string format_number(double v);

void write_csv(std::ostream& out, const std::vector<MetricRow>& rows);
std::vector<MetricRow> read_csv(std::istream& in);
/// Throws std::runtime_error naming the path on I/O failure.
void emit_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows);

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<std::string> metrics;
};

/// Mean lines with standard-error bands, one color per policy.
std::string render_svg(const std::vector<MetricRow>& rows, const PlotSpec& spec);
void emit_svg(const std::filesystem::path& path, const std::vector<MetricRow>& rows,
              const PlotSpec& spec);

/// Plots matching the experiment kind: one for single tier, two for two tiers.
std::vector<std::pair<std::string, PlotSpec>> plots_for(ScenarioKind kind);

/// Writes <stem>.csv and <stem>_<plot>.svg into directory; returns the paths.
std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& directory,
                                                 const std::string& stem, ScenarioKind kind,
                                                 const std::vector<MetricRow>& rows);

}  // namespace cachefair
