#pragma once

// Random problem generators shared by the unit tests and the acceptance suite.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "cachefair/bucket_fill.hpp"
#include "cachefair/instance.hpp"

namespace cachefair::testing {

struct RandomInstanceOptions {
  int max_stations = 5;
  int max_region_files = 20;
  int max_eligible = 3;
  double max_demand = 5.0;
  /// Keeps the station/region-file incidence graph acyclic, which makes the
  /// optimal routing unique (with cycles only the station volumes are).
  bool forest = false;
};

/// Union-find over station indices.
class Components {
 public:
  explicit Components(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[a] = b;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

inline CrpInstance random_instance(std::mt19937_64& rng, const RandomInstanceOptions& o = {}) {
  std::uniform_int_distribution<int> station_count(1, o.max_stations);
  std::uniform_int_distribution<int> rf_count(1, o.max_region_files);
  std::uniform_real_distribution<double> demand(0.05, o.max_demand);
  std::uniform_real_distribution<double> weight(0.5, 2.0);
  std::uniform_real_distribution<double> soft(0.5, 5.0);

  const int m = station_count(rng);
  std::vector<StationUtility> stations;
  for (int i = 0; i < m; ++i) {
    StationUtility s;
    s.id = 10 * i + 3;  // ids deliberately not equal to indices
    s.utility.weight = weight(rng);
    s.utility.soft_limit = soft(rng);
    stations.push_back(s);
  }

  Components comps(static_cast<std::size_t>(m));
  std::vector<RegionFile> rfs;
  const int n = rf_count(rng);
  std::uniform_int_distribution<int> width(1, std::min(o.max_eligible, m));
  for (int q = 0; q < n; ++q) {
    std::vector<int> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<int> chosen;
    const int k = width(rng);
    for (int i : idx) {
      if (static_cast<int>(chosen.size()) == k) break;
      if (o.forest) {
        bool fresh = true;
        for (int c : chosen) {
          if (comps.find(static_cast<std::size_t>(c)) == comps.find(static_cast<std::size_t>(i))) {
            fresh = false;
          }
        }
        if (!fresh) continue;
      }
      chosen.push_back(i);
    }
    if (o.forest) {
      for (std::size_t j = 1; j < chosen.size(); ++j) {
        comps.unite(static_cast<std::size_t>(chosen[0]), static_cast<std::size_t>(chosen[j]));
      }
    }
    RegionFile rf;
    rf.id = q;
    rf.file = q % 6;
    rf.demand = demand(rng);
    for (int c : chosen) rf.eligible.push_back(stations[static_cast<std::size_t>(c)].id);
    std::sort(rf.eligible.begin(), rf.eligible.end());
    rfs.push_back(std::move(rf));
  }
  return CrpInstance(std::move(stations), std::move(rfs));
}

struct RandomBuckets {
  std::vector<Bucket> buckets;
  UtilitySpec utility;
  double rho = 1.0;
};

/// |Q| <= 8, a in [-5, 5], N in (0, 5], rho in {0.5, 1, 2}, U = ln(1 + v / V).
inline RandomBuckets random_buckets(std::mt19937_64& rng, int max_buckets = 8) {
  std::uniform_int_distribution<int> count(1, max_buckets);
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::uniform_real_distribution<double> cap(0.0, 5.0);
  std::uniform_int_distribution<int> rho_pick(0, 2);
  std::uniform_real_distribution<double> soft(0.5, 3.0);
  RandomBuckets out;
  const int n = count(rng);
  for (int q = 0; q < n; ++q) {
    double c = cap(rng);
    if (c == 0.0) c = 1e-3;
    out.buckets.push_back({q, coef(rng), c});
  }
  out.rho = std::array<double, 3>{0.5, 1.0, 2.0}[static_cast<std::size_t>(rho_pick(rng))];
  out.utility.soft_limit = soft(rng);
  return out;
}

/// g'_q(y) = U'(sum y) - rho y_q + a_q.
inline std::vector<double> bucket_gradient(const std::vector<Bucket>& b,
                                           const std::vector<double>& y, const UtilitySpec& u,
                                           double rho) {
  const double total = std::accumulate(y.begin(), y.end(), 0.0);
  std::vector<double> g(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    g[i] = u.derivative(total) - rho * y[i] + b[i].coefficient;
  }
  return g;
}

/// Largest violation of the KKT cases of the box subproblem.
inline double kkt_violation(const std::vector<Bucket>& b, const std::vector<double>& y,
                            const UtilitySpec& u, double rho) {
  const auto g = bucket_gradient(b, y, u, rho);
  double worst = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (y[i] <= 0.0) {
      worst = std::max(worst, g[i]);
    } else if (y[i] >= b[i].capacity) {
      worst = std::max(worst, -g[i]);
    } else {
      worst = std::max(worst, std::abs(g[i]));
    }
  }
  return worst;
}

/// Largest violation of y_i - y_j = (a_i - a_j) / rho over interior pairs.
inline double interior_pair_violation(const std::vector<Bucket>& b, const std::vector<double>& y,
                                      double rho) {
  double worst = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!(y[i] > 0.0 && y[i] < b[i].capacity)) continue;
    for (std::size_t j = i + 1; j < b.size(); ++j) {
      if (!(y[j] > 0.0 && y[j] < b[j].capacity)) continue;
      const double d = y[i] - y[j] - (b[i].coefficient - b[j].coefficient) / rho;
      worst = std::max(worst, std::abs(d));
    }
  }
  return worst;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace cachefair::testing
