#include "cachefair/instance.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace cachefair {

double UtilitySpec::value(double v) const { return weight * std::log1p(v / soft_limit); }

double UtilitySpec::derivative(double v) const { return weight / (soft_limit + v); }

double UtilitySpec::curvature(double v) const {
  const double d = soft_limit + v;
  return weight / (d * d);
}

void UtilitySpec::validate() const {
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw ConfigError("utility weight must be positive and finite");
  }
  if (!(soft_limit > 0.0) || !std::isfinite(soft_limit)) {
    throw ConfigError("utility soft limit must be positive and finite");
  }
  // Sampled monotonicity of U'; catches families that would break the sweep.
  double prev = derivative(0.0);
  for (double v = soft_limit / 16.0; v < 1e6 * soft_limit; v *= 4.0) {
    const double d = derivative(v);
    if (!(d > 0.0) || !(d < prev)) throw ConfigError("utility derivative must decrease strictly");
    prev = d;
  }
}

CrpInstance::CrpInstance(std::vector<StationUtility> stations,
                         std::vector<RegionFile> region_files)
    : stations_(std::move(stations)), region_files_(std::move(region_files)) {
  std::unordered_map<StationId, std::size_t> index;
  for (std::size_t i = 0; i < stations_.size(); ++i) {
    stations_[i].utility.validate();
    if (!index.emplace(stations_[i].id, i).second) {
      throw std::invalid_argument("duplicate station id " + std::to_string(stations_[i].id));
    }
  }
  offsets_.reserve(region_files_.size() + 1);
  offsets_.push_back(0);
  served_.resize(stations_.size());
  for (std::size_t q = 0; q < region_files_.size(); ++q) {
    const RegionFile& rf = region_files_[q];
    if (rf.id != static_cast<int>(q)) {
      throw std::invalid_argument("region-file ids must equal their position");
    }
    if (!(rf.demand >= 0.0) || !std::isfinite(rf.demand)) {
      throw std::invalid_argument("region-file " + std::to_string(q) + " has invalid demand");
    }
    if (rf.eligible.empty()) {
      throw std::invalid_argument("region-file " + std::to_string(q) + " has no eligible station");
    }
    if (!std::is_sorted(rf.eligible.begin(), rf.eligible.end()) ||
        std::adjacent_find(rf.eligible.begin(), rf.eligible.end()) != rf.eligible.end()) {
      throw std::invalid_argument("eligible sets must be sorted and unique");
    }
    if (!rf.region.empty() &&
        !std::includes(rf.region.begin(), rf.region.end(), rf.eligible.begin(),
                       rf.eligible.end())) {
      throw std::invalid_argument("eligible set must be a subset of the region key");
    }
    for (StationId m : rf.eligible) {
      auto it = index.find(m);
      if (it == index.end()) {
        throw std::invalid_argument("region-file " + std::to_string(q) +
                                    " references unknown station " + std::to_string(m));
      }
      const std::size_t slot = slot_station_.size();
      slot_station_.push_back(it->second);
      served_[it->second].push_back({static_cast<int>(q), slot});
    }
    offsets_.push_back(slot_station_.size());
  }
}

std::size_t CrpInstance::station_index(StationId id) const {
  auto it = std::lower_bound(stations_.begin(), stations_.end(), id,
                             [](const StationUtility& s, StationId v) { return s.id < v; });
  if (it != stations_.end() && it->id == id) return static_cast<std::size_t>(it - stations_.begin());
  // Fall back to a scan for instances whose stations are not sorted by id.
  for (std::size_t i = 0; i < stations_.size(); ++i) {
    if (stations_[i].id == id) return i;
  }
  throw std::out_of_range("unknown station id " + std::to_string(id));
}

std::size_t CrpInstance::slot_of(std::size_t station_index, int q) const {
  for (std::size_t s = slot_begin(q); s < slot_end(q); ++s) {
    if (slot_station_[s] == station_index) return s;
  }
  throw std::out_of_range("station does not serve region-file " + std::to_string(q));
}

double CrpInstance::max_demand() const {
  double m = 0.0;
  for (const RegionFile& rf : region_files_) m = std::max(m, rf.demand);
  return m;
}

double CrpInstance::total_demand() const {
  double t = 0.0;
  for (const RegionFile& rf : region_files_) t += rf.demand;
  return t;
}

CrpInstance build_instance(const NetworkInstance& network, const RegionMap& regions,
                           double user_density, const UtilityDefaults& defaults) {
  if (!(user_density > 0.0)) throw std::invalid_argument("user density must be positive");
  network.validate();

  std::vector<const Station*> by_id;
  by_id.reserve(network.stations.size());
  for (const Station& s : network.stations) by_id.push_back(&s);
  std::sort(by_id.begin(), by_id.end(),
            [](const Station* a, const Station* b) { return a->id < b->id; });
  auto find_station = [&](StationId id) -> const Station& {
    auto it = std::lower_bound(by_id.begin(), by_id.end(), id,
                               [](const Station* s, StationId v) { return s->id < v; });
    if (it == by_id.end() || (*it)->id != id) {
      throw std::invalid_argument("region references unknown station " + std::to_string(id));
    }
    return **it;
  };

  std::vector<RegionFile> region_files;
  double total = 0.0;
  for (const auto& [key, info] : regions.entries) {
    for (FileId f = 0; f < network.catalog.file_count; ++f) {
      std::vector<StationId> eligible;
      for (StationId m : key) {
        if (find_station(m).caches(f)) eligible.push_back(m);
      }
      if (eligible.empty()) continue;
      const double demand = info.area * user_density * network.catalog.popularity[f];
      if (demand < kMinDemand) continue;
      RegionFile rf;
      rf.id = static_cast<int>(region_files.size());
      rf.region = key;
      rf.file = f;
      rf.demand = demand;
      rf.eligible = std::move(eligible);
      total += demand;
      region_files.push_back(std::move(rf));
    }
  }

  UtilitySpec utility;
  utility.weight = defaults.weight;
  if (defaults.soft_limit) {
    utility.soft_limit = *defaults.soft_limit;
  } else if (!by_id.empty() && total > 0.0) {
    utility.soft_limit = total / static_cast<double>(by_id.size());
  } else {
    utility.soft_limit = 1.0;
  }

  std::vector<StationUtility> stations;
  stations.reserve(by_id.size());
  for (const Station* s : by_id) stations.push_back({s->id, utility});
  return CrpInstance(std::move(stations), std::move(region_files));
}

double total_volume(const CrpInstance& instance, const RoutingVector& y,
                    std::size_t station_index) {
  double v = 0.0;
  for (const ServedEntry& e : instance.served_by(station_index)) v += y[e.slot];
  return v;
}

std::vector<double> station_volumes(const CrpInstance& instance, const RoutingVector& y) {
  std::vector<double> v(instance.station_count());
  for (std::size_t m = 0; m < v.size(); ++m) v[m] = total_volume(instance, y, m);
  return v;
}

std::vector<double> constraint_residuals(const CrpInstance& instance, const RoutingVector& y) {
  std::vector<double> r(instance.region_file_count());
  for (std::size_t q = 0; q < r.size(); ++q) {
    double routed = 0.0;
    for (std::size_t s = instance.slot_begin(q); s < instance.slot_end(q); ++s) routed += y[s];
    r[q] = instance.region_files()[q].demand - routed;
  }
  return r;
}

double objective(const CrpInstance& instance, const RoutingVector& y) {
  double total = 0.0;
  for (std::size_t m = 0; m < instance.station_count(); ++m) {
    total += instance.stations()[m].utility.value(total_volume(instance, y, m));
  }
  return total;
}

double feasibility_residual(const CrpInstance& instance, const RoutingVector& y) {
  double worst = 0.0;
  for (double r : constraint_residuals(instance, y)) worst = std::max(worst, std::abs(r));
  return worst;
}

double augmented_lagrangian(const CrpInstance& instance, const RoutingVector& y,
                            const DualVector& lambda, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("penalty rho must be positive");
  const std::vector<double> r = constraint_residuals(instance, y);
  double value = objective(instance, y);
  for (std::size_t q = 0; q < r.size(); ++q) {
    value -= lambda[q] * r[q] + 0.5 * rho * r[q] * r[q];
  }
  return value;
}

bool within_box(const CrpInstance& instance, const RoutingVector& y, double slack) {
  if (y.values.size() != instance.slot_count()) return false;
  for (std::size_t q = 0; q < instance.region_file_count(); ++q) {
    const double cap = instance.region_files()[q].demand;
    for (std::size_t s = instance.slot_begin(q); s < instance.slot_end(q); ++s) {
      if (y[s] < -slack || y[s] > cap + slack) return false;
    }
  }
  return true;
}

}  // namespace cachefair
