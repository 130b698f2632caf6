#pragma once

// Random cellular topologies under the Boolean coverage model: PPP station
// placement, disc coverage, and grid quadrature of the coverage regions.

#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

namespace cachefair {

using StationId = int;
using FileId = int;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned simulation area [0, width] x [0, height], lengths in km.
struct Window {
  double width = 2.5;
  double height = 2.5;

  double area() const { return width * height; }
  void validate() const;
};

enum class Tier { SingleTier, Large, Small };

std::string_view to_string(Tier tier);
Tier tier_from_string(std::string_view name);

struct Station {
  StationId id = 0;
  Point position;
  double radius = 0.0;
  Tier tier = Tier::SingleTier;
  std::vector<FileId> cached_files;  // sorted, unique

  bool covers(Point p) const;
  bool caches(FileId f) const;
};

/// File catalog with request probabilities indexed by file id (0 = most
/// popular for Zipf catalogs).
struct Catalog {
  int file_count = 0;
  double zipf_s = 0.0;
  std::vector<double> popularity;

  static Catalog zipf(int file_count, double s);
  void validate() const;
};

struct NetworkInstance {
  Window window;
  std::vector<Station> stations;
  Catalog catalog;

  void validate() const;
  const Station& station(StationId id) const;
};

/// Sorted list of covering station ids.
using RegionKey = std::vector<StationId>;

struct RegionInfo {
  double area = 0.0;      // km^2
  Point centroid;         // area centroid of the region's grid cells
  std::int64_t cells = 0;
};

struct RegionMap {
  std::map<RegionKey, RegionInfo> entries;
  double cell_area = 0.0;
  double resolution = 0.0;  // cells per km actually requested

  double total_area() const;
};

/// Homogeneous Poisson point process on the window. Deterministic in seed.
std::vector<Point> sample_ppp(double density, const Window& window, std::uint64_t seed);

/// Mean number of covering stations seen by a covered user:
/// x / (1 - exp(-x)) with x = density * pi * r^2.
double mean_coverage(double density, double radius);

/// Inverse of mean_coverage in the radius. Throws std::domain_error when
/// target <= 1.
double radius_for_mean_coverage(double density, double target);

/// Grid rasterization of the disc arrangement. Every cell center is labelled
/// with the sorted set of stations whose disc contains it; labels are interned
/// so that each distinct covering set gets a small integer id (0 = uncovered).
class CoverageGrid {
 public:
  CoverageGrid(std::span<const Station> stations, const Window& window,
               double grid_resolution);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double cell_width() const { return dx_; }
  double cell_height() const { return dy_; }
  double cell_area() const { return dx_ * dy_; }
  Point cell_center(int i, int j) const;

  std::uint32_t key_id(int i, int j) const {
    return cell_key_[static_cast<std::size_t>(j) * nx_ + i];
  }
  const RegionKey& key(std::uint32_t id) const { return keys_[id]; }
  std::size_t key_count() const { return keys_.size(); }

  RegionMap regions() const;

 private:
  int nx_ = 0;
  int ny_ = 0;
  double dx_ = 0.0;
  double dy_ = 0.0;
  double resolution_ = 0.0;
  std::vector<std::uint32_t> cell_key_;
  std::vector<RegionKey> keys_;
};

/// Coverage regions and their areas by deterministic grid quadrature.
RegionMap extract_regions(std::span<const Station> stations, const Window& window,
                          double grid_resolution);

}  // namespace cachefair
