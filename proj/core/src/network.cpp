#include "cachefair/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace cachefair {

void Window::validate() const {
  if (!(width > 0.0) || !(height > 0.0)) {
    throw std::invalid_argument("window dimensions must be positive");
  }
}

std::string_view to_string(Tier tier) {
  switch (tier) {
    case Tier::Large: return "large";
    case Tier::Small: return "small";
    case Tier::SingleTier: return "single";
  }
  return "single";
}

Tier tier_from_string(std::string_view name) {
  if (name == "large") return Tier::Large;
  if (name == "small") return Tier::Small;
  if (name == "single") return Tier::SingleTier;
  throw std::invalid_argument("unknown tier '" + std::string(name) + "'");
}

bool Station::covers(Point p) const {
  const double ddx = p.x - position.x;
  const double ddy = p.y - position.y;
  return ddx * ddx + ddy * ddy <= radius * radius;
}

bool Station::caches(FileId f) const {
  return std::binary_search(cached_files.begin(), cached_files.end(), f);
}

Catalog Catalog::zipf(int file_count, double s) {
  if (file_count <= 0) throw std::invalid_argument("catalog needs at least one file");
  Catalog c;
  c.file_count = file_count;
  c.zipf_s = s;
  c.popularity.resize(static_cast<std::size_t>(file_count));
  double norm = 0.0;
  for (int f = 0; f < file_count; ++f) {
    c.popularity[f] = std::pow(static_cast<double>(f + 1), -s);
    norm += c.popularity[f];
  }
  for (double& p : c.popularity) p /= norm;
  return c;
}

void Catalog::validate() const {
  if (file_count <= 0 || popularity.size() != static_cast<std::size_t>(file_count)) {
    throw std::invalid_argument("catalog popularity size does not match file count");
  }
  double sum = 0.0;
  for (double p : popularity) {
    if (!(p > 0.0)) throw std::invalid_argument("catalog popularity must be positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("catalog popularity must sum to 1");
  }
}

void NetworkInstance::validate() const {
  window.validate();
  catalog.validate();
  std::vector<StationId> ids;
  ids.reserve(stations.size());
  for (const Station& s : stations) {
    if (!(s.radius > 0.0)) {
      throw std::invalid_argument("station " + std::to_string(s.id) + " has nonpositive radius");
    }
    if (!std::is_sorted(s.cached_files.begin(), s.cached_files.end()) ||
        std::adjacent_find(s.cached_files.begin(), s.cached_files.end()) !=
            s.cached_files.end()) {
      throw std::invalid_argument("station cache must be sorted and unique");
    }
    for (FileId f : s.cached_files) {
      if (f < 0 || f >= catalog.file_count) {
        throw std::invalid_argument("station " + std::to_string(s.id) +
                                    " caches a file outside the catalog");
      }
    }
    ids.push_back(s.id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw std::invalid_argument("duplicate station id");
  }
}

const Station& NetworkInstance::station(StationId id) const {
  for (const Station& s : stations) {
    if (s.id == id) return s;
  }
  throw std::out_of_range("no station with id " + std::to_string(id));
}

double RegionMap::total_area() const {
  std::int64_t cells = 0;
  for (const auto& [key, info] : entries) cells += info.cells;
  return static_cast<double>(cells) * cell_area;
}

std::vector<Point> sample_ppp(double density, const Window& window, std::uint64_t seed) {
  if (!(density > 0.0)) throw std::invalid_argument("PPP density must be positive");
  window.validate();
  std::mt19937_64 rng(seed);
  std::poisson_distribution<long> count_dist(density * window.area());
  const long n = count_dist(rng);
  std::uniform_real_distribution<double> ux(0.0, window.width);
  std::uniform_real_distribution<double> uy(0.0, window.height);
  std::vector<Point> points;
  points.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    points.push_back({x, y});
  }
  return points;
}

double mean_coverage(double density, double radius) {
  if (!(density > 0.0) || !(radius > 0.0)) {
    throw std::invalid_argument("mean_coverage needs positive density and radius");
  }
  const double x = density * std::numbers::pi * radius * radius;
  return x / -std::expm1(-x);
}

double radius_for_mean_coverage(double density, double target) {
  if (!(density > 0.0)) throw std::invalid_argument("density must be positive");
  if (!(target > 1.0)) {
    throw std::domain_error("conditional mean coverage is always above 1");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (mean_coverage(density, hi) < target) hi *= 2.0;
  // Bisect until the bracket stops shrinking.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (mid > 0.0 && mean_coverage(density, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

CoverageGrid::CoverageGrid(std::span<const Station> stations, const Window& window,
                           double grid_resolution)
    : resolution_(grid_resolution) {
  window.validate();
  if (!(grid_resolution > 0.0)) throw std::invalid_argument("grid resolution must be positive");
  nx_ = std::max(1, static_cast<int>(std::lround(window.width * grid_resolution)));
  ny_ = std::max(1, static_cast<int>(std::lround(window.height * grid_resolution)));
  dx_ = window.width / nx_;
  dy_ = window.height / ny_;
  cell_key_.assign(static_cast<std::size_t>(nx_) * ny_, 0);
  keys_.emplace_back();

  // Stations are added in increasing id order so that every interned key
  // stays sorted: key(child) = key(parent) + [id].
  std::vector<std::size_t> order(stations.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return stations[a].id < stations[b].id; });

  std::unordered_map<std::uint64_t, std::uint32_t> transitions;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Station& s = stations[order[rank]];
    const double r2 = s.radius * s.radius;
    const int j_lo = std::max(0, static_cast<int>(std::floor((s.position.y - s.radius) / dy_)) - 1);
    const int j_hi = std::min(ny_ - 1, static_cast<int>(std::floor((s.position.y + s.radius) / dy_)) + 1);
    std::uint32_t last_parent = UINT32_MAX;
    std::uint32_t last_child = 0;
    for (int j = j_lo; j <= j_hi; ++j) {
      const double cy = (j + 0.5) * dy_;
      const double ddy = cy - s.position.y;
      if (ddy * ddy > r2) continue;
      const double half = std::sqrt(r2 - ddy * ddy);
      const int i_lo = std::max(0, static_cast<int>(std::floor((s.position.x - half) / dx_)) - 1);
      const int i_hi = std::min(nx_ - 1, static_cast<int>(std::floor((s.position.x + half) / dx_)) + 1);
      for (int i = i_lo; i <= i_hi; ++i) {
        const double cx = (i + 0.5) * dx_;
        const double ddx = cx - s.position.x;
        if (ddx * ddx + ddy * ddy > r2) continue;
        std::uint32_t& cell = cell_key_[static_cast<std::size_t>(j) * nx_ + i];
        if (cell != last_parent) {
          const std::uint64_t edge = (static_cast<std::uint64_t>(cell) << 32) | rank;
          auto [it, inserted] = transitions.try_emplace(edge, 0);
          if (inserted) {
            RegionKey child = keys_[cell];
            child.push_back(s.id);
            it->second = static_cast<std::uint32_t>(keys_.size());
            keys_.push_back(std::move(child));
          }
          last_parent = cell;
          last_child = it->second;
        }
        cell = last_child;
      }
    }
  }
}

Point CoverageGrid::cell_center(int i, int j) const {
  return {(i + 0.5) * dx_, (j + 0.5) * dy_};
}

RegionMap CoverageGrid::regions() const {
  std::vector<std::int64_t> count(keys_.size(), 0);
  std::vector<std::int64_t> sum_i(keys_.size(), 0);
  std::vector<std::int64_t> sum_j(keys_.size(), 0);
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      const std::uint32_t k = key_id(i, j);
      ++count[k];
      sum_i[k] += i;
      sum_j[k] += j;
    }
  }
  RegionMap map;
  map.cell_area = cell_area();
  map.resolution = resolution_;
  for (std::size_t k = 1; k < keys_.size(); ++k) {
    if (count[k] == 0) continue;  // intermediate key fully overwritten later
    const double n = static_cast<double>(count[k]);
    RegionInfo info;
    info.cells = count[k];
    info.area = n * map.cell_area;
    info.centroid = {(static_cast<double>(sum_i[k]) / n + 0.5) * dx_,
                     (static_cast<double>(sum_j[k]) / n + 0.5) * dy_};
    map.entries.emplace(keys_[k], info);
  }
  return map;
}

RegionMap extract_regions(std::span<const Station> stations, const Window& window,
                          double grid_resolution) {
  return CoverageGrid(stations, window, grid_resolution).regions();
}

}  // namespace cachefair
