#include "cachefair/report_io.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cachefair {

namespace {

const Json& member(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw std::invalid_argument(std::string("missing field '") + key + "'");
  }
  return j[key];
}

template <typename T>
T field(const Json& j, const char* key) {
  try {
    return member(j, key).get<T>();
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("bad field '") + key + "': " + e.what());
  }
}

template <typename T>
void maybe(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = field<T>(j, key);
}

}  // namespace

Json network_to_json(const NetworkInstance& network) {
  Json stations = Json::array();
  for (const Station& s : network.stations) {
    stations.push_back({{"id", s.id},
                        {"x", s.position.x},
                        {"y", s.position.y},
                        {"radius", s.radius},
                        {"tier", std::string(to_string(s.tier))},
                        {"cache", s.cached_files}});
  }
  return {{"window", {{"width", network.window.width}, {"height", network.window.height}}},
          {"stations", stations},
          {"catalog",
           {{"files", network.catalog.file_count},
            {"zipf_s", network.catalog.zipf_s},
            {"popularity", network.catalog.popularity}}}};
}

NetworkInstance network_from_json(const Json& j) {
  NetworkInstance net;
  const Json& w = member(j, "window");
  net.window = {field<double>(w, "width"), field<double>(w, "height")};
  const Json& c = member(j, "catalog");
  net.catalog.file_count = field<int>(c, "files");
  net.catalog.zipf_s = field<double>(c, "zipf_s");
  net.catalog.popularity = field<std::vector<double>>(c, "popularity");
  for (const Json& s : member(j, "stations")) {
    Station st;
    st.id = field<StationId>(s, "id");
    st.position = {field<double>(s, "x"), field<double>(s, "y")};
    st.radius = field<double>(s, "radius");
    st.tier = tier_from_string(field<std::string>(s, "tier"));
    st.cached_files = field<std::vector<FileId>>(s, "cache");
    std::sort(st.cached_files.begin(), st.cached_files.end());
    net.stations.push_back(std::move(st));
  }
  net.validate();
  return net;
}

Json instance_to_json(const CrpInstance& instance) {
  Json stations = Json::array();
  for (const StationUtility& s : instance.stations()) {
    stations.push_back(
        {{"id", s.id}, {"weight", s.utility.weight}, {"soft_limit", s.utility.soft_limit}});
  }
  Json rfs = Json::array();
  for (const RegionFile& rf : instance.region_files()) {
    rfs.push_back({{"id", rf.id},
                   {"region", rf.region},
                   {"file", rf.file},
                   {"demand", rf.demand},
                   {"eligible", rf.eligible}});
  }
  return {{"stations", stations}, {"region_files", rfs}};
}

CrpInstance instance_from_json(const Json& j) {
  std::vector<StationUtility> stations;
  for (const Json& s : member(j, "stations")) {
    StationUtility st;
    st.id = field<StationId>(s, "id");
    st.utility.weight = field<double>(s, "weight");
    st.utility.soft_limit = field<double>(s, "soft_limit");
    stations.push_back(st);
  }
  std::vector<RegionFile> rfs;
  for (const Json& r : member(j, "region_files")) {
    RegionFile rf;
    rf.id = field<int>(r, "id");
    maybe(r, "region", rf.region);
    maybe(r, "file", rf.file);
    rf.demand = field<double>(r, "demand");
    rf.eligible = field<std::vector<StationId>>(r, "eligible");
    rfs.push_back(std::move(rf));
  }
  return CrpInstance(std::move(stations), std::move(rfs));
}

Json routing_to_json(const CrpInstance& instance, const RoutingVector& y) {
  Json out = Json::array();
  for (std::size_t q = 0; q < instance.region_file_count(); ++q) {
    const int qi = static_cast<int>(q);
    for (std::size_t s = instance.slot_begin(qi); s < instance.slot_end(qi); ++s) {
      out.push_back({instance.stations()[instance.slot_station(s)].id, qi, y[s]});
    }
  }
  return out;
}

RoutingVector routing_from_json(const CrpInstance& instance, const Json& j) {
  RoutingVector y = RoutingVector::zeros(instance);
  for (const Json& t : j) {
    if (!t.is_array() || t.size() != 3) throw std::invalid_argument("routing entries are [m, q, y]");
    const int q = t[1].get<int>();
    if (q < 0 || static_cast<std::size_t>(q) >= instance.region_file_count()) {
      throw std::invalid_argument("routing names unknown region-file " + std::to_string(q));
    }
    y[instance.slot_of(instance.station_index(t[0].get<StationId>()), q)] = t[2].get<double>();
  }
  return y;
}

Json config_to_json(const SolverConfig& c) {
  return {{"rho", c.rho},           {"alpha", c.alpha},         {"eps_inner", c.eps_inner},
          {"eps_outer", c.eps_outer}, {"max_inner", c.max_inner}, {"max_outer", c.max_outer},
          {"seed", c.seed},         {"initial_price", c.initial_price}};
}

Json solve_report_to_json(const CrpInstance& instance, const SolveReport& report) {
  const std::vector<double> v = station_volumes(instance, report.routing);
  Json volumes = Json::array();
  for (std::size_t m = 0; m < v.size(); ++m) {
    volumes.push_back({{"station", instance.stations()[m].id}, {"volume", v[m]}});
  }
  return {{"converged", report.converged},
          {"outer_iterations", report.outer_iterations},
          {"inner_iterations_total", report.inner_iterations_total},
          {"inner_cap_hits", report.inner_cap_hits},
          {"objective", report.objective},
          {"feasibility_residual", feasibility_residual(instance, report.routing)},
          {"residual_history", report.residual_history},
          {"station_volumes", volumes},
          {"routing", routing_to_json(instance, report.routing)},
          {"duals", report.duals.prices}};
}

Json message_stats_to_json(const MessageStats& stats) {
  auto counts = [](const std::array<std::int64_t, kMessageKinds>& c) {
    Json o = Json::object();
    for (std::size_t k = 0; k < kMessageKinds; ++k) o[to_string(static_cast<MessageKind>(k))] = c[k];
    return o;
  };
  Json rounds = Json::array();
  for (const RoundStats& r : stats.rounds) {
    rounds.push_back({{"round", r.round}, {"phase", to_string(r.phase)}, {"counts", counts(r.counts)}});
  }
  return {{"totals", counts(stats.totals)}, {"rounds", rounds}};
}

Json scenario_to_json(const ScenarioConfig& c) {
  Json j = {{"kind", std::string(to_string(c.kind))},
            {"runs", c.runs},
            {"seed", c.seed},
            {"density", c.density},
            {"window", {{"width", c.window.width}, {"height", c.window.height}}},
            {"file_count", c.file_count},
            {"zipf_s", c.zipf_s},
            {"user_density", c.user_density},
            {"grid_resolution", c.grid_resolution},
            {"closest_per_cell", c.closest_per_cell},
            {"solver",
             {{"rho_scale", c.solver.rho_scale},
              {"alpha", c.solver.alpha},
              {"tolerance", c.solver.tolerance},
              {"price_offset", c.solver.price_offset},
              {"max_inner", c.solver.max_inner},
              {"max_outer", c.solver.max_outer}}}};
  if (c.kind == ScenarioKind::SingleTier) {
    j["radii"] = c.radii;
    j["cache_size"] = c.cache_size;
  } else {
    j["ratios"] = c.ratios;
    j["large_radius"] = c.large_radius;
    j["small_radius"] = c.small_radius;
    j["large_files"] = c.large_files;
  }
  return j;
}

ScenarioConfig scenario_from_json(const Json& j, ScenarioKind kind) {
  if (j.contains("kind") && scenario_from_string(field<std::string>(j, "kind")) != kind) {
    throw std::invalid_argument("config kind does not match the requested experiment");
  }
  ScenarioConfig c = default_scenario(kind);
  maybe(j, "runs", c.runs);
  maybe(j, "seed", c.seed);
  maybe(j, "density", c.density);
  if (j.contains("window")) {
    c.window = {field<double>(member(j, "window"), "width"), field<double>(member(j, "window"), "height")};
  }
  maybe(j, "file_count", c.file_count);
  maybe(j, "zipf_s", c.zipf_s);
  maybe(j, "user_density", c.user_density);
  maybe(j, "grid_resolution", c.grid_resolution);
  maybe(j, "closest_per_cell", c.closest_per_cell);
  maybe(j, "radii", c.radii);
  maybe(j, "cache_size", c.cache_size);
  maybe(j, "ratios", c.ratios);
  maybe(j, "large_radius", c.large_radius);
  maybe(j, "small_radius", c.small_radius);
  maybe(j, "large_files", c.large_files);
  if (j.contains("solver")) {
    const Json& s = member(j, "solver");
    maybe(s, "rho_scale", c.solver.rho_scale);
    maybe(s, "alpha", c.solver.alpha);
    maybe(s, "tolerance", c.solver.tolerance);
    maybe(s, "price_offset", c.solver.price_offset);
    maybe(s, "max_inner", c.solver.max_inner);
    maybe(s, "max_outer", c.solver.max_outer);
  }
  c.validate();
  return c;
}

}  // namespace cachefair
