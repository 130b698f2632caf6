#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "cachefair/network.hpp"

using namespace cachefair;

namespace {

Station disc(StationId id, double x, double y, double r) {
  Station s;
  s.id = id;
  s.position = {x, y};
  s.radius = r;
  s.cached_files = {0};
  return s;
}

double lens_area(double r, double d) {
  return 2.0 * r * r * std::acos(d / (2.0 * r)) - 0.5 * d * std::sqrt(4.0 * r * r - d * d);
}

// Mean number of covering discs seen by covered points, averaged over several
// PPP realizations on a large window. Points are drawn from the central part
// only so boundary effects stay away.
double monte_carlo_coverage(double density, double radius, int points, std::uint64_t seed) {
  const Window big{12.0, 12.0};
  const int realizations = 50;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(2.0, 10.0);
  long covered = 0;
  long hits = 0;
  for (int k = 0; k < realizations; ++k) {
    const auto centers = sample_ppp(density, big, seed * 1000 + static_cast<std::uint64_t>(k));
    for (int i = 0; i < points / realizations; ++i) {
      const double x = u(rng);
      const double y = u(rng);
      int c = 0;
      for (const Point& p : centers) {
        if ((p.x - x) * (p.x - x) + (p.y - y) * (p.y - y) <= radius * radius) ++c;
      }
      if (c > 0) {
        ++covered;
        hits += c;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(covered);
}

}  // namespace

TEST_CASE("window and catalog validation") {
  CHECK_THROWS_AS(Window({0.0, 1.0}).validate(), std::invalid_argument);
  const Catalog c = Catalog::zipf(6, 1.0);
  double sum = 0.0;
  for (std::size_t f = 0; f < c.popularity.size(); ++f) {
    sum += c.popularity[f];
    if (f > 0) CHECK(c.popularity[f] <= c.popularity[f - 1]);
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.popularity[0] == doctest::Approx(0.40816326530612).epsilon(1e-10));
  CHECK_NOTHROW(c.validate());
  CHECK_THROWS(Catalog::zipf(0, 1.0));
}

TEST_CASE("tier names round-trip") {
  for (Tier t : {Tier::SingleTier, Tier::Large, Tier::Small}) CHECK(tier_from_string(to_string(t)) == t);
  CHECK_THROWS_AS(tier_from_string("medium"), std::invalid_argument);
}

TEST_CASE("network validation rejects duplicates and unknown files") {
  NetworkInstance net;
  net.catalog = Catalog::zipf(3, 1.0);
  net.stations = {disc(1, 0.5, 0.5, 0.1), disc(1, 1.0, 1.0, 0.1)};
  CHECK_THROWS_AS(net.validate(), std::invalid_argument);
  net.stations[1].id = 2;
  CHECK_NOTHROW(net.validate());
  net.stations[1].cached_files = {7};
  CHECK_THROWS_AS(net.validate(), std::invalid_argument);
}

TEST_CASE("sample_ppp is reproducible and stays in the window") {
  const Window w{2.5, 2.5};
  const auto a = sample_ppp(8.0, w, 42);
  const auto b = sample_ppp(8.0, w, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].y == b[i].y);
    CHECK(a[i].x >= 0.0);
    CHECK(a[i].x <= w.width);
    CHECK(a[i].y >= 0.0);
    CHECK(a[i].y <= w.height);
  }
  CHECK(sample_ppp(1e-9, w, 1).empty());
}

TEST_CASE("sample_ppp count follows Poisson(50) at density 8 on 2.5 km") {
  const Window w{2.5, 2.5};
  const int draws = 10000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double n = static_cast<double>(sample_ppp(8.0, w, 1000 + i).size());
    sum += n;
    sq += n * n;
  }
  const double mean = sum / draws;
  const double var = sq / draws - mean * mean;
  CHECK(std::abs(mean - 50.0) <= 3.0 * std::sqrt(50.0 / draws));
  CHECK(var == doctest::Approx(50.0).epsilon(0.05));
}

TEST_CASE("mean_coverage values and monotonicity") {
  CHECK(mean_coverage(8.0, 0.5) == doctest::Approx(6.30).epsilon(0.001));
  CHECK(mean_coverage(8.0, 0.0625) == doctest::Approx(1.05).epsilon(0.001));
  CHECK(mean_coverage(8.0, 0.0625) == doctest::Approx(1.0498904466812866).epsilon(1e-12));
  double prev = 1.0;
  for (double r = 0.01; r < 2.0; r *= 1.3) {
    const double c = mean_coverage(8.0, r);
    CHECK(c > prev);
    prev = c;
  }
  CHECK(mean_coverage(16.0, 0.2) > mean_coverage(8.0, 0.2));
  const double big = 8.0 * std::numbers::pi * 3.0 * 3.0;
  CHECK(mean_coverage(8.0, 3.0) == doctest::Approx(big).epsilon(1e-12));
}

TEST_CASE("mean_coverage agrees with Monte-Carlo conditional coverage") {
  CHECK(std::abs(monte_carlo_coverage(8.0, 0.5, 100000, 5) - mean_coverage(8.0, 0.5)) < 0.15);
  CHECK(std::abs(monte_carlo_coverage(8.0, 0.0625, 100000, 6) - mean_coverage(8.0, 0.0625)) <
        0.02);
}

TEST_CASE("radius_for_mean_coverage inverts mean_coverage") {
  CHECK(radius_for_mean_coverage(8.0, mean_coverage(8.0, 0.3)) == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(radius_for_mean_coverage(8.0, 6.30) == doctest::Approx(0.5).epsilon(0.002));
  const double r = radius_for_mean_coverage(8.0, 6.0);
  CHECK(std::abs(mean_coverage(8.0, r) - 6.0) <= 1e-9);
  CHECK_THROWS_AS(radius_for_mean_coverage(8.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(radius_for_mean_coverage(8.0, 0.5), std::domain_error);
}

TEST_CASE("single disc region area") {
  const std::vector<Station> s{disc(0, 1.25, 1.25, 0.25)};
  const RegionMap map = extract_regions(s, {2.5, 2.5}, 400);
  REQUIRE(map.entries.size() == 1);
  const auto& [key, info] = *map.entries.begin();
  CHECK(key == RegionKey{0});
  CHECK(info.area == doctest::Approx(std::numbers::pi * 0.0625).epsilon(0.01));
  CHECK(info.centroid.x == doctest::Approx(1.25).epsilon(1e-3));
  CHECK(info.centroid.y == doctest::Approx(1.25).epsilon(1e-3));
}

TEST_CASE("disjoint discs give two singleton regions") {
  const std::vector<Station> s{disc(3, 0.5, 0.5, 0.2), disc(8, 2.0, 2.0, 0.2)};
  const RegionMap map = extract_regions(s, {2.5, 2.5}, 400);
  REQUIRE(map.entries.size() == 2);
  CHECK(map.entries.count({3}) == 1);
  CHECK(map.entries.count({8}) == 1);
}

TEST_CASE("lens region matches the closed form") {
  const double r = 0.25;
  const double d = 0.25;
  const std::vector<Station> s{disc(0, 1.0, 1.25, r), disc(1, 1.0 + d, 1.25, r)};
  const RegionMap map = extract_regions(s, {2.5, 2.5}, 400);
  REQUIRE(map.entries.count({0, 1}) == 1);
  const double lens = lens_area(r, d);
  CHECK(lens == doctest::Approx(0.0767).epsilon(0.001));
  CHECK(map.entries.at({0, 1}).area == doctest::Approx(lens).epsilon(0.01));
  const double single = std::numbers::pi * r * r - lens;
  CHECK(map.entries.at({0}).area == doctest::Approx(single).epsilon(0.01));
}

TEST_CASE("regions partition the covered cells") {
  NetworkInstance net;
  const auto pts = sample_ppp(8.0, net.window, 11);
  std::vector<Station> s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s.push_back(disc(static_cast<StationId>(i), pts[i].x, pts[i].y, 0.3));
  }
  const CoverageGrid grid(s, net.window, 200);
  std::int64_t covered = 0;
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const auto id = grid.key_id(i, j);
      if (id == 0) continue;
      ++covered;
      const Point c = grid.cell_center(i, j);
      for (StationId m : grid.key(id)) CHECK(s[static_cast<std::size_t>(m)].covers(c));
    }
  }
  const RegionMap map = grid.regions();
  std::int64_t cells = 0;
  for (const auto& [key, info] : map.entries) {
    CHECK_FALSE(key.empty());
    CHECK(std::is_sorted(key.begin(), key.end()));
    cells += info.cells;
  }
  CHECK(cells == covered);
  CHECK(map.total_area() == doctest::Approx(static_cast<double>(covered) * map.cell_area).epsilon(1e-12));
  CHECK(map.total_area() <= net.window.area() + 1e-9);

  const RegionMap again = extract_regions(s, net.window, 200);
  REQUIRE(again.entries.size() == map.entries.size());
  auto it = again.entries.begin();
  for (const auto& [key, info] : map.entries) {
    CHECK(it->first == key);
    CHECK(it->second.area == info.area);
    CHECK(it->second.centroid.x == info.centroid.x);
    ++it;
  }
}

TEST_CASE("stations outside the window get no region") {
  const std::vector<Station> s{disc(0, 1.0, 1.0, 0.2), disc(1, 9.0, 9.0, 0.2)};
  const RegionMap map = extract_regions(s, {2.5, 2.5}, 100);
  CHECK(map.entries.size() == 1);
  CHECK_THROWS(extract_regions(s, {2.5, 2.5}, 0.0));
}
