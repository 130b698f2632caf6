#include "cachefair/bucket_fill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cachefair {

namespace {

const char* event_name(BucketEventKind kind) {
  switch (kind) {
    case BucketEventKind::Activate: return "activate";
    case BucketEventKind::Saturate: return "saturate";
    case BucketEventKind::Stationary: return "stationary";
    case BucketEventKind::AllFull: return "all_full";
    case BucketEventKind::NoGain: return "no_gain";
  }
  return "unknown";
}

// Positive root of wgt / (c + k u) = rho u + b for u >= 0, given that the
// left side exceeds the right at u = 0 (b c < wgt).
double log_segment_root(double wgt, double c, double k, double rho, double b) {
  if (k == 0.0) return (wgt / c - b) / rho;
  const double qa = rho * k;
  const double qb = rho * c + b * k;
  const double qc = b * c - wgt;  // < 0
  const double disc = std::sqrt(qb * qb - 4.0 * qa * qc);
  if (qb > 0.0) return -2.0 * qc / (qb + disc);
  return (disc - qb) / (2.0 * qa);
}

}  // namespace

std::vector<Bucket> local_coefficients(const CrpInstance& instance, std::size_t station_index,
                                       const RoutingVector& y_tilde, const DualVector& lambda,
                                       double rho) {
  std::vector<Bucket> buckets;
  local_coefficients_into(instance, station_index, y_tilde, lambda, rho, buckets);
  return buckets;
}

void local_coefficients_into(const CrpInstance& instance, std::size_t station_index,
                             const RoutingVector& y_tilde, const DualVector& lambda, double rho,
                             std::vector<Bucket>& buckets) {
  buckets.clear();
  const auto served = instance.served_by(station_index);
  for (const ServedEntry& e : served) {
    const int q = e.region_file;
    const double demand = instance.region_files()[q].demand;
    double others = 0.0;
    for (std::size_t s = instance.slot_begin(q); s < instance.slot_end(q); ++s) {
      if (s != e.slot) others += y_tilde[s];
    }
    const double unclaimed = demand - others;
    buckets.push_back({q, lambda[q] + rho * unclaimed, demand});
  }
}

std::optional<double> water_level_root(const std::function<double(double)>& active_volume,
                                       const UtilitySpec& utility, double rho, double a_max,
                                       double w_lo, double w_hi) {
  if (w_lo > w_hi) throw std::domain_error("water level bracket is inverted");
  auto gap = [&](double w) { return utility.derivative(active_volume(w)) - rho * w + a_max; };
  const double g_lo = gap(w_lo);
  if (g_lo < 0.0) return std::nullopt;
  if (g_lo == 0.0) return w_lo;
  const double g_hi = gap(w_hi);
  if (g_hi > 0.0) return std::nullopt;
  if (g_hi == 0.0) return w_hi;
  double lo = w_lo;
  double hi = w_hi;
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double g = gap(mid);
    if (g == 0.0) return mid;
    if (g > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(gap(lo)) <= std::abs(gap(hi)) ? lo : hi;
}

BucketFillResult bucket_fill(std::span<const Bucket> buckets, const UtilitySpec& utility,
                             double rho, const BucketFillOptions& options) {
  BucketFiller filler;
  return filler.solve(buckets, utility, rho, options);
}

const BucketFillResult& BucketFiller::solve(std::span<const Bucket> buckets,
                                            const UtilitySpec& utility, double rho,
                                            const BucketFillOptions& options) {
  if (!(rho > 0.0)) throw ConfigError("penalty rho must be positive");
  BucketFillResult& result = result_;
  result.allocation.assign(buckets.size(), 0.0);
  result.water_level.reset();
  result.active_at_termination.clear();

  auto record = [&](BucketEventKind kind, int q, double level, double volume) {
    if (options.trace) options.trace->push_back({kind, q, level, volume});
  };

  // (coefficient, index) pairs sorted by coefficient descending, index ascending.
  std::vector<std::pair<double, std::size_t>>& keyed = keyed_;
  keyed.clear();
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    if (buckets[i].capacity < 0.0) throw std::invalid_argument("bucket capacity must be nonnegative");
    if (buckets[i].capacity > 0.0) keyed.emplace_back(-buckets[i].coefficient, i);
  }
  if (keyed.empty()) return result;
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::size_t>& order = order_;
  order.resize(keyed.size());
  for (std::size_t k = 0; k < keyed.size(); ++k) order[k] = keyed[k].second;
  const double a_max = buckets[order.front()].coefficient;
  auto bottom = [&](std::size_t i) { return (a_max - buckets[i].coefficient) / rho; };
  auto gap = [&](double w, double volume) {
    return utility.derivative(volume) - rho * w + a_max;
  };

  if (gap(0.0, 0.0) <= 0.0) {
    record(BucketEventKind::NoGain, -1, 0.0, 0.0);
    return result;
  }

  // Min-heap of (saturation level, bucket) over the active buckets.
  std::vector<std::pair<double, std::size_t>>& filling = heap_;
  filling.clear();
  const auto later = std::greater<>();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  double level = 0.0;
  double volume = 0.0;
  double active = 0.0;
  std::size_t next = 0;
  std::optional<double> root;

  while (true) {
    while (next < order.size() && bottom(order[next]) <= level) {
      const std::size_t i = order[next++];
      filling.emplace_back(bottom(i) + buckets[i].capacity, i);
      std::push_heap(filling.begin(), filling.end(), later);
      active += 1.0;
      record(BucketEventKind::Activate, buckets[i].region_file, level, volume);
    }
    while (!filling.empty() && filling.front().first <= level) {
      record(BucketEventKind::Saturate, buckets[filling.front().second].region_file, level, volume);
      std::pop_heap(filling.begin(), filling.end(), later);
      filling.pop_back();
      active -= 1.0;
    }

    const double next_activation = next < order.size() ? bottom(order[next]) : kInf;
    const double next_saturation = filling.empty() ? kInf : filling.front().first;
    const double event = std::min(next_activation, next_saturation);
    if (event == kInf) break;  // every bucket is full

    const double event_volume = volume + active * (event - level);
    if (gap(event, event_volume) <= 0.0) {
      if (options.root_method == RootMethod::ClosedForm &&
          utility.family == UtilityFamily::WeightedLog) {
        const double u = log_segment_root(utility.weight, utility.soft_limit + volume, active, rho,
                                          rho * level - a_max);
        root = level + std::clamp(u, 0.0, event - level);
      } else {
        const double seg_level = level;
        const double seg_volume = volume;
        const double slope = active;
        root = water_level_root(
            [&](double w) { return seg_volume + slope * (w - seg_level); }, utility, rho, a_max,
            level, event);
        if (!root) root = level;  // gap(level) > 0 holds by construction
      }
      break;
    }
    level = event;
    volume = event_volume;
  }

  if (!root) {
    for (std::size_t i : order) result.allocation[i] = buckets[i].capacity;
    record(BucketEventKind::AllFull, -1, level, volume);
    return result;
  }

  result.water_level = *root;
  double final_volume = 0.0;
  for (std::size_t i : order) {
    const double y = std::clamp(*root - bottom(i), 0.0, buckets[i].capacity);
    result.allocation[i] = y;
    final_volume += y;
    if (y > 0.0 && y < buckets[i].capacity) {
      result.active_at_termination.push_back(buckets[i].region_file);
    }
  }
  std::sort(result.active_at_termination.begin(), result.active_at_termination.end());
  record(BucketEventKind::Stationary, -1, *root, final_volume);
  return result;
}

void write_trace_jsonl(std::ostream& out, std::span<const BucketEvent> trace, int station) {
  for (const BucketEvent& e : trace) {
    nlohmann::ordered_json line;
    if (station >= 0) line["station"] = station;
    line["event"] = event_name(e.kind);
    line["region_file"] = e.region_file;
    line["level"] = e.level;
    line["volume"] = e.volume;
    out << line.dump() << '\n';
  }
}

}  // namespace cachefair
