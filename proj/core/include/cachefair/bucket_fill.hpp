#pragma once

// Exact solver for the per-station subproblem
//
//   maximize  g(y) = U(sum_q y_q) - sum_q (rho/2 * y_q^2 - a_q * y_q)
//   subject to 0 <= y_q <= N_q.
//
// Each region-file q is a bucket of height N_q whose bottom sits at depth
// (a_max - a_q) / rho below the highest coefficient. A common water level w
// rises over all buckets; bucket q holds clamp(w - bottom_q, 0, N_q). The
// optimum is the level at which U'(V(w)) = rho * w - a_max, where V(w) is the
// total water. V is piecewise linear between activation and saturation events,
// so the sweep only needs one scalar solve, in the segment containing the root.

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cachefair/instance.hpp"

namespace cachefair {

struct Bucket {
  int region_file = 0;
  double coefficient = 0.0;  // a_q
  double capacity = 0.0;     // N_q
};

enum class BucketEventKind { Activate, Saturate, Stationary, AllFull, NoGain };

struct BucketEvent {
  BucketEventKind kind = BucketEventKind::Activate;
  int region_file = -1;  // -1 for terminal events
  double level = 0.0;
  double volume = 0.0;
};

struct BucketFillResult {
  std::vector<double> allocation;  // aligned with the input buckets
  std::optional<double> water_level;
  std::vector<int> active_at_termination;  // region-file ids with 0 < y < N
};

enum class RootMethod { ClosedForm, Bisection };

struct BucketFillOptions {
  RootMethod root_method = RootMethod::ClosedForm;
  std::vector<BucketEvent>* trace = nullptr;
};

/// Buckets for the station at station_index given the shared iterate y_tilde:
/// a_q = lambda_q + rho * (N_q - sum of other eligible stations' y_tilde).
std::vector<Bucket> local_coefficients(const CrpInstance& instance, std::size_t station_index,
                                       const RoutingVector& y_tilde, const DualVector& lambda,
                                       double rho);
void local_coefficients_into(const CrpInstance& instance, std::size_t station_index,
                             const RoutingVector& y_tilde, const DualVector& lambda, double rho,
                             std::vector<Bucket>& out);

BucketFillResult bucket_fill(std::span<const Bucket> buckets, const UtilitySpec& utility,
                             double rho, const BucketFillOptions& options = {});

/// Reusable scratch space so repeated solves (one per station per Jacobi
/// sweep) do not allocate.
class BucketFiller {
 public:
  const BucketFillResult& solve(std::span<const Bucket> buckets, const UtilitySpec& utility,
                                double rho, const BucketFillOptions& options = {});

 private:
  std::vector<std::pair<double, std::size_t>> keyed_;
  std::vector<std::size_t> order_;
  std::vector<std::pair<double, std::size_t>> heap_;
  BucketFillResult result_;
};

/// Root of U'(V(w)) - rho*w + a_max on [w_lo, w_hi] by bisection; nullopt when
/// the expression does not change sign there. Throws std::domain_error when
/// w_lo > w_hi.
std::optional<double> water_level_root(const std::function<double(double)>& active_volume,
                                       const UtilitySpec& utility, double rho, double a_max,
                                       double w_lo, double w_hi);

/// One JSON object per line: {"event", "region_file", "level", "volume"},
/// preceded by "station" when station >= 0.
void write_trace_jsonl(std::ostream& out, std::span<const BucketEvent> trace, int station = -1);

}  // namespace cachefair
