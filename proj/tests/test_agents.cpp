#include <doctest.h>

#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cachefair/agents.hpp"
#include "support.hpp"

using namespace cachefair;

namespace {

RegionFile rf_with(int id, double demand, std::vector<StationId> eligible) {
  RegionFile rf;
  rf.id = id;
  rf.demand = demand;
  rf.eligible = std::move(eligible);
  return rf;
}

std::vector<StationUtility> stations(std::initializer_list<StationId> ids) {
  std::vector<StationUtility> out;
  for (StationId id : ids) out.push_back({id, {}});
  return out;
}

}  // namespace

TEST_CASE("topology") {
  SUBCASE("no shared region-files means no edges") {
    const CrpInstance inst(stations({1, 2}), {rf_with(0, 1.0, {1}), rf_with(1, 1.0, {2})});
    const Topology t = build_topology(inst);
    CHECK(t.neighbors.at(1).empty());
    CHECK(t.neighbors.at(2).empty());
    CHECK_FALSE(t.adjacent(1, 2));
    CHECK(t.owner == std::vector<StationId>{1, 2});
  }
  SUBCASE("lowest eligible id owns the price") {
    const CrpInstance inst(stations({3, 7}), {rf_with(0, 1.0, {3, 7})});
    const Topology t = build_topology(inst);
    CHECK(t.owner[0] == 3);
    CHECK(t.adjacent(3, 7));
    CHECK(t.adjacent(7, 3));
  }
  SUBCASE("chain") {
    const CrpInstance inst(stations({1, 2, 3}), {rf_with(0, 1.0, {1, 2}), rf_with(1, 1.0, {2, 3})});
    const Topology t = build_topology(inst);
    CHECK(t.neighbors.at(1) == std::vector<StationId>{2});
    CHECK(t.neighbors.at(2) == std::vector<StationId>{1, 3});
    CHECK(t.neighbors.at(3) == std::vector<StationId>{2});
    CHECK_FALSE(t.adjacent(1, 3));
  }
}

TEST_CASE("message kind names") {
  CHECK(std::string(to_string(MessageKind::PrimalShare)) == "primal_share");
  CHECK(std::string(to_string(MessageKind::PriceUpdate)) == "price_update");
  CHECK(std::string(to_string(MessageKind::InnerNorm)) == "inner_norm");
  CHECK(std::string(to_string(MessageKind::Control)) == "control");
}

TEST_CASE("a lone station sends no shares") {
  const CrpInstance inst(stations({5}), {rf_with(0, 2.0, {5}), rf_with(1, 1.0, {5})});
  CHECK(primal_shares_per_round(inst) == 0);
  const DistributedReport r = run_distributed(inst, SolverConfig{});
  CHECK(r.report.converged);
  CHECK(r.messages.total(MessageKind::PrimalShare) == 0);
  CHECK(r.messages.total(MessageKind::PriceUpdate) == 0);
  CHECK(r.messages.total(MessageKind::InnerNorm) == 0);
  CHECK(r.report.routing[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("bit-identical to the centralized solver with exact message counts") {
  std::mt19937_64 rng(314);
  for (int t = 0; t < 20; ++t) {
    const CrpInstance inst = testing::random_instance(rng);
    SolverConfig c;
    c.seed = t % 2 == 0 ? 0 : 1000 + static_cast<std::uint64_t>(t);
    const SolveReport central = solve_crp(inst, c);
    const DistributedReport dist = run_distributed(inst, c);
    CHECK(dist.report.routing.values == central.routing.values);
    CHECK(dist.report.duals.prices == central.duals.prices);
    CHECK(dist.report.outer_iterations == central.outer_iterations);
    CHECK(dist.report.inner_iterations_total == central.inner_iterations_total);
    CHECK(dist.report.residual_history == central.residual_history);
    CHECK(dist.report.converged == central.converged);

    const std::int64_t expected = primal_shares_per_round(inst);
    std::int64_t manual = 0;
    for (const RegionFile& rf : inst.region_files()) {
      const auto k = static_cast<std::int64_t>(rf.eligible.size());
      manual += k * (k - 1);
    }
    CHECK(expected == manual);
    const std::int64_t peers = static_cast<std::int64_t>(inst.station_count()) - 1;
    std::int64_t inner_rounds = 0;
    for (const RoundStats& rs : dist.messages.rounds) {
      const auto count = [&](MessageKind k) { return rs.counts[static_cast<std::size_t>(k)]; };
      if (rs.phase == RoundPhase::Inner) {
        ++inner_rounds;
        CHECK(count(MessageKind::PrimalShare) == expected);
        CHECK(count(MessageKind::InnerNorm) == 2 * peers);
      } else if (rs.phase == RoundPhase::Outer) {
        CHECK(count(MessageKind::Control) == 2 * peers);
        CHECK(count(MessageKind::PrimalShare) == 0);
      }
    }
    CHECK(inner_rounds == dist.report.inner_iterations_total);
  }
}

TEST_CASE("threads do not change the result") {
  std::mt19937_64 rng(2);
  const CrpInstance inst = testing::random_instance(rng);
  SolverConfig c;
  const DistributedReport one = run_distributed(inst, c);
  c.threads = 4;
  const DistributedReport four = run_distributed(inst, c);
  CHECK(one.report.routing.values == four.report.routing.values);
  CHECK(one.messages.totals == four.messages.totals);
}

TEST_CASE("trace records only legal messages") {
  std::mt19937_64 rng(99);
  const CrpInstance inst = testing::random_instance(rng);
  const Topology topo = build_topology(inst);
  std::ostringstream out;
  const DistributedReport r = run_distributed(inst, SolverConfig{}, &out);
  std::istringstream in(out.str());
  std::string line;
  std::array<std::int64_t, kMessageKinds> counted{};
  std::int64_t last_round = -1;
  const StationId root = inst.stations().front().id;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    const std::string kind = j.at("kind");
    const StationId s = j.at("sender");
    const StationId d = j.at("receiver");
    const std::int64_t round = j.at("round");
    CHECK(round >= last_round);
    last_round = round;
    if (kind == "primal_share") {
      CHECK(topo.adjacent(s, d));
      ++counted[0];
    } else if (kind == "price_update") {
      CHECK(topo.owner.at(j.at("region_file").get<std::size_t>()) == s);
      ++counted[1];
    } else {
      CHECK((s == root || d == root));
      ++counted[kind == "inner_norm" ? 2 : 3];
    }
  }
  CHECK(counted == r.messages.totals);
}
