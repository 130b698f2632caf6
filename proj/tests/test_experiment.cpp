#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cachefair/experiment.hpp"

using namespace cachefair;

namespace {

int count_of(const std::string& text, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

ScenarioConfig small_single_tier() {
  ScenarioConfig c = default_scenario(ScenarioKind::SingleTier);
  c.runs = 3;
  c.window = {1.5, 1.5};
  c.grid_resolution = 200;
  c.radii = {0.0625, 0.3};
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("scenario names and validation") {
  CHECK(scenario_from_string(to_string(ScenarioKind::TwoTier)) == ScenarioKind::TwoTier);
  CHECK(scenario_from_string("single-tier") == ScenarioKind::SingleTier);
  CHECK_THROWS(scenario_from_string("three-tier"));
  ScenarioConfig c = default_scenario(ScenarioKind::SingleTier);
  CHECK_NOTHROW(c.validate());
  c.runs = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = default_scenario(ScenarioKind::SingleTier);
  c.radii = {-0.1};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = default_scenario(ScenarioKind::SingleTier);
  c.cache_size = 7;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("load shares") {
  std::vector<StationUtility> st{{0, {}}, {1, {}}};
  RegionFile a;
  a.id = 0;
  a.demand = 3.0;
  a.eligible = {0};
  RegionFile b;
  b.id = 1;
  b.demand = 1.0;
  b.eligible = {1};
  const CrpInstance inst(st, {a, b});
  RoutingVector y = RoutingVector::zeros(inst);
  y[0] = 3.0;
  y[1] = 1.0;
  const auto shares = load_shares(inst, y);
  CHECK(shares.at(0) == 0.75);
  CHECK(shares.at(1) == 0.25);
  CHECK(load_shares(inst, RoutingVector::zeros(inst)).empty());

  std::vector<StationUtility> four{{0, {}}, {1, {}}, {2, {}}, {3, {}}};
  RegionFile all;
  all.demand = 8.0;
  all.eligible = {0, 1, 2, 3};
  const CrpInstance even(four, {all});
  RoutingVector e = RoutingVector::zeros(even);
  for (double& v : e.values) v = 2.0;
  double sum = 0.0;
  for (const auto& [id, s] : load_shares(even, e)) {
    CHECK(s == 0.25);
    sum += s;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("networks follow the scenario") {
  ScenarioConfig c = default_scenario(ScenarioKind::SingleTier);
  const NetworkInstance net = single_tier_network(c, 0.25, 9);
  CHECK_NOTHROW(net.validate());
  for (const Station& s : net.stations) {
    CHECK(s.radius == 0.25);
    CHECK(s.cached_files.size() == 2);
    CHECK(s.tier == Tier::SingleTier);
  }
  const NetworkInstance again = single_tier_network(c, 0.25, 9);
  REQUIRE(again.stations.size() == net.stations.size());
  CHECK(again.stations.front().cached_files == net.stations.front().cached_files);

  ScenarioConfig t = default_scenario(ScenarioKind::TwoTier);
  const NetworkInstance two = two_tier_network(t, 4.0, 3);
  bool small_seen = false;
  for (const Station& s : two.stations) {
    if (s.tier == Tier::Large) {
      CHECK_FALSE(small_seen);  // large stations come first
      CHECK(s.cached_files == std::vector<FileId>{0, 1});
      CHECK(s.radius == t.large_radius);
    } else {
      small_seen = true;
      CHECK(s.cached_files.size() == 1);
      CHECK(s.cached_files[0] <= 1);
      CHECK(s.radius == t.small_radius);
    }
  }
  CHECK(small_seen);
}

TEST_CASE("ratio zero leaves everything to the large tier") {
  ScenarioConfig t = default_scenario(ScenarioKind::TwoTier);
  t.window = {1.5, 1.5};
  t.grid_resolution = 200;
  const NetworkInstance net = two_tier_network(t, 0.0, 4);
  const RunRecord rec = evaluate_network(net, t, 4);
  REQUIRE_FALSE(rec.degenerate);
  for (const auto& [policy, out] : rec.outcomes) {
    CHECK(out.metrics.at("large_share") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.metrics.count("small_max_share") == 0);
  }
}

TEST_CASE("without routing freedom fair equals the baselines") {
  ScenarioConfig c = default_scenario(ScenarioKind::SingleTier);
  NetworkInstance net;
  net.catalog = Catalog::zipf(6, 1.0);
  for (int i = 0; i < 3; ++i) {
    Station s;
    s.id = i;
    s.position = {0.5 + 0.7 * i, 1.0};
    s.radius = 0.2;
    s.cached_files = {0, 3};
    net.stations.push_back(s);
  }
  const RunRecord rec = evaluate_network(net, c, 1);
  REQUIRE_FALSE(rec.degenerate);
  const auto& fair = rec.outcomes.at(PolicyKind::Fair).metrics;
  for (PolicyKind k : {PolicyKind::ClosestAvailable, PolicyKind::Unsplittable}) {
    CHECK(rec.outcomes.at(k).metrics.at("max_share") == doctest::Approx(fair.at("max_share")).epsilon(1e-9));
    CHECK(rec.outcomes.at(k).metrics.at("min_share") == doctest::Approx(fair.at("min_share")).epsilon(1e-9));
  }
}

TEST_CASE("shares do not depend on the demand scale") {
  ScenarioConfig c = default_scenario(ScenarioKind::SingleTier);
  c.window = {1.5, 1.5};
  c.grid_resolution = 200;
  ScenarioConfig doubled = c;
  doubled.user_density = 2.0 * c.user_density;
  for (std::uint64_t seed : {2, 3}) {
    const NetworkInstance net = single_tier_network(c, 0.3, seed);
    const RunRecord a = evaluate_network(net, c, seed);
    const RunRecord b = evaluate_network(net, doubled, seed);
    REQUIRE_FALSE(a.degenerate);
    for (const auto& [policy, out] : a.outcomes) {
      for (const auto& [metric, value] : out.metrics) {
        const double other = b.outcomes.at(policy).metrics.at(metric);
        if (policy == PolicyKind::Fair) {
          CHECK(std::abs(value - other) <= 1e-6);
        } else {
          CHECK(value == other);
        }
      }
    }
  }
}

TEST_CASE("small single-tier experiment") {
  const ScenarioConfig c = small_single_tier();
  const ExperimentResult r = run_experiment(c);
  CHECK(r.records.size() == 6);
  CHECK(r.max_conservation_gap <= kConservationTolerance);
  for (const MetricRow& row : r.rows) {
    CHECK(row.mean >= 0.0);
    CHECK(row.mean <= 1.0);
  }
  CHECK(r.rows.front().sweep == doctest::Approx(mean_coverage(8.0, 0.0625)));

  SUBCASE("aggregation matches a naive recomputation") {
    std::map<std::tuple<double, PolicyKind, std::string>, std::vector<double>> samples;
    for (const RunRecord& rec : r.records) {
      if (rec.degenerate) continue;
      for (const auto& [policy, out] : rec.outcomes) {
        for (const auto& [metric, v] : out.metrics) samples[{rec.sweep, policy, metric}].push_back(v);
      }
    }
    REQUIRE(samples.size() == r.rows.size());
    for (const MetricRow& row : r.rows) {
      const auto& xs = samples.at({row.sweep, row.policy, row.metric});
      double sum = 0.0;
      for (double x : xs) sum += x;
      const double mean = sum / static_cast<double>(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean) / static_cast<double>(xs.size() - 1);
      CHECK(row.mean == doctest::Approx(mean).epsilon(1e-14));
      CHECK(row.std_error == doctest::Approx(std::sqrt(var / static_cast<double>(xs.size()))).epsilon(1e-12));
      CHECK(row.runs == static_cast<int>(xs.size()));
    }
  }

  SUBCASE("csv round-trip") {
    std::ostringstream out;
    write_csv(out, r.rows);
    std::istringstream in(out.str());
    CHECK(read_csv(in) == r.rows);

    std::ostringstream one;
    write_csv(one, {r.rows.front()});
    CHECK(count_of(one.str(), "\n") == 2);
    std::istringstream bad("mean,sweep\n1,2\n");
    CHECK_THROWS(read_csv(bad));
  }

  SUBCASE("svg structure") {
    const auto plots = plots_for(ScenarioKind::SingleTier);
    REQUIRE(plots.size() == 1);
    const std::string svg = render_svg(r.rows, plots.front().second);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(count_of(svg, "<polyline") == 3 * 2);
    CHECK(count_of(svg, "<polygon") == 3 * 2);
    CHECK(svg.find("fair") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(plots_for(ScenarioKind::TwoTier).size() == 2);
  }

  SUBCASE("outputs on disk") {
    const auto dir = std::filesystem::temp_directory_path() / "cachefair_test_experiment";
    std::filesystem::remove_all(dir);
    const auto paths = write_outputs(dir, "fig", ScenarioKind::SingleTier, r.rows);
    REQUIRE(paths.size() == 2);
    for (const auto& p : paths) CHECK(std::filesystem::exists(p));
    std::ifstream in(paths.front());
    CHECK(read_csv(in) == r.rows);
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(emit_csv("/nonexistent-dir/x.csv", r.rows), std::runtime_error);
  }

  SUBCASE("thread count does not change the rows") {
    ScenarioConfig threaded = c;
    threaded.threads = 3;
    CHECK(run_experiment(threaded).rows == r.rows);
  }
}

TEST_CASE("format_number is the shortest round-trip form") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
  const double x = 1.0 / 3.0;
  CHECK(std::stod(format_number(x)) == x);
}
