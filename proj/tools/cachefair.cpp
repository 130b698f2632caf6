// cachefair: generate networks, solve routing problems, run experiments.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cachefair/agents.hpp"
#include "cachefair/bucket_fill.hpp"
#include "cachefair/experiment.hpp"
#include "cachefair/parallel.hpp"
#include "cachefair/policies.hpp"
#include "cachefair/random.hpp"
#include "cachefair/report_io.hpp"

using namespace cachefair;

namespace {

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

struct GenOptions {
  std::uint64_t seed = 1;
  double density = 8.0;
  double width = 2.5;
  double height = 2.5;
  double radius = 0.5;
  int files = 6;
  double zipf = 1.0;
  int cache_size = 2;
  bool two_tier = false;
  double ratio = 4.0;
  double large_radius = 0.1875;
  double small_radius = 0.0625;
  double user_density = 100.0;
  double resolution = 400.0;
  std::string out = "-";
  std::string instance_out;
};

struct InstanceSource {
  std::string instance_path;
  std::string network_path;
  double user_density = 100.0;
  double resolution = 400.0;
};

struct SolveOptions {
  InstanceSource source;
  std::string mode = "centralized";
  std::string policy = "fair";
  bool scaled = false;
  std::optional<double> rho, alpha, eps_inner, eps_outer;
  std::optional<int> max_inner, max_outer;
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string trace;
  std::string bucket_trace;
};

struct ExperimentOptions {
  std::string kind;
  std::string config;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::vector<double> radii;
  std::vector<double> ratios;
  bool per_cell = false;
  std::string out_dir = ".";
  std::string stem;
  std::string runs_out;
};

ScenarioConfig gen_scenario(const GenOptions& o) {
  ScenarioConfig c = default_scenario(o.two_tier ? ScenarioKind::TwoTier : ScenarioKind::SingleTier);
  c.density = o.density;
  c.window = {o.width, o.height};
  c.file_count = o.files;
  c.zipf_s = o.zipf;
  c.cache_size = o.cache_size;
  c.large_radius = o.large_radius;
  c.small_radius = o.small_radius;
  c.user_density = o.user_density;
  c.grid_resolution = o.resolution;
  if (o.two_tier) {
    c.ratios = {o.ratio};
  } else {
    c.radii = {o.radius};
  }
  c.validate();
  return c;
}

int run_gen(const GenOptions& o) {
  const ScenarioConfig c = gen_scenario(o);
  const NetworkInstance net = o.two_tier ? two_tier_network(c, o.ratio, o.seed)
                                         : single_tier_network(c, o.radius, o.seed);
  write_text(o.out, network_to_json(net).dump(2) + "\n");
  if (!o.instance_out.empty()) {
    const RegionMap regions = extract_regions(net.stations, net.window, o.resolution);
    const CrpInstance inst = build_instance(net, regions, o.user_density);
    write_text(o.instance_out, instance_to_json(inst).dump(2) + "\n");
  }
  return 0;
}

SolverConfig solver_config(const SolveOptions& o, const CrpInstance& inst) {
  SolverConfig c = o.scaled ? scaled_config(inst) : SolverConfig{};
  if (o.rho) c.rho = *o.rho;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.eps_inner) c.eps_inner = *o.eps_inner;
  if (o.eps_outer) c.eps_outer = *o.eps_outer;
  if (o.max_inner) c.max_inner = *o.max_inner;
  if (o.max_outer) c.max_outer = *o.max_outer;
  c.seed = o.seed;
  c.threads = configured_threads();
  c.validate();
  return c;
}

void write_bucket_traces(const std::string& path, const CrpInstance& inst, const SolveReport& r,
                         double rho) {
  std::ofstream out = open_out(path);
  BucketFiller filler;
  std::vector<BucketEvent> trace;
  for (std::size_t m = 0; m < inst.station_count(); ++m) {
    if (inst.served_by(m).empty()) continue;
    trace.clear();
    const auto buckets = local_coefficients(inst, m, r.routing, r.duals, rho);
    filler.solve(buckets, inst.stations()[m].utility, rho, {RootMethod::ClosedForm, &trace});
    write_trace_jsonl(out, trace, inst.stations()[m].id);
  }
}

int run_solve(const SolveOptions& o) {
  if (o.source.instance_path.empty() == o.source.network_path.empty()) {
    throw CLI::ValidationError("solve", "give exactly one of --instance or --network");
  }
  std::optional<NetworkInstance> network;
  std::optional<CoverageGrid> grid;
  CrpInstance inst;
  if (!o.source.network_path.empty()) {
    network = network_from_json(read_json(o.source.network_path));
    grid.emplace(network->stations, network->window, o.source.resolution);
    inst = build_instance(*network, grid->regions(), o.source.user_density);
  } else {
    inst = instance_from_json(read_json(o.source.instance_path));
  }
  if (inst.region_file_count() == 0) throw std::runtime_error("instance has no region-files");

  const PolicyKind policy = policy_from_string(o.policy);
  Json out = {{"policy", std::string(to_string(policy))}};
  if (policy == PolicyKind::Fair) {
    const SolverConfig cfg = solver_config(o, inst);
    out["mode"] = o.mode;
    out["config"] = config_to_json(cfg);
    SolveReport report;
    if (o.mode == "centralized") {
      report = solve_crp(inst, cfg);
    } else if (o.mode == "distributed") {
      std::ofstream trace;
      if (!o.trace.empty()) trace = open_out(o.trace);
      DistributedReport d = run_distributed(inst, cfg, o.trace.empty() ? nullptr : &trace);
      report = std::move(d.report);
      out["messages"] = message_stats_to_json(d.messages);
    } else {
      throw CLI::ValidationError("--mode", "expected centralized or distributed");
    }
    if (!o.bucket_trace.empty()) write_bucket_traces(o.bucket_trace, inst, report, cfg.rho);
    out["report"] = solve_report_to_json(inst, report);
    if (!report.converged) std::cerr << "cachefair: solver stopped at the iteration cap\n";
  } else {
    SolveReport report;
    if (policy == PolicyKind::ClosestAvailable) {
      if (!network) throw std::runtime_error("--policy closest needs --network for geometry");
      report.routing = closest_available(inst, *network, grid->regions());
    } else {
      report.routing = unsplittable(inst, derive_seed(o.seed, 3));
    }
    report.duals = DualVector::zeros(inst);
    report.objective = objective(inst, report.routing);
    report.converged = true;
    out["report"] = solve_report_to_json(inst, report);
  }
  write_text(o.out, out.dump(2) + "\n");
  return 0;
}

int run_experiment_cmd(const ExperimentOptions& o) {
  const ScenarioKind kind = scenario_from_string(o.kind);
  ScenarioConfig c = o.config.empty() ? default_scenario(kind)
                                      : scenario_from_json(read_json(o.config), kind);
  if (o.runs) c.runs = *o.runs;
  if (o.seed) c.seed = *o.seed;
  if (!o.radii.empty()) c.radii = o.radii;
  if (!o.ratios.empty()) c.ratios = o.ratios;
  if (o.per_cell) c.closest_per_cell = true;
  c.validate();

  const ExperimentResult result = run_experiment(c);
  const std::string stem = o.stem.empty() ? std::string(to_string(kind)) : o.stem;
  for (const auto& path : write_outputs(o.out_dir, stem, kind, result.rows)) {
    std::cout << path.string() << '\n';
  }
  if (!o.runs_out.empty()) {
    Json runs = Json::array();
    for (const RunRecord& r : result.records) {
      Json outcomes = Json::object();
      for (const auto& [policy, out] : r.outcomes) {
        outcomes[std::string(to_string(policy))] = {{"total_volume", out.total_volume},
                                                   {"metrics", out.metrics}};
      }
      runs.push_back({{"sweep", r.sweep},
                      {"run", r.run},
                      {"seed", r.seed},
                      {"degenerate", r.degenerate},
                      {"stations", r.stations},
                      {"region_files", r.region_files},
                      {"fair_converged", r.fair_converged},
                      {"outcomes", outcomes}});
    }
    write_text(o.runs_out, Json{{"config", scenario_to_json(c)}, {"runs", runs}}.dump(2) + "\n");
  }
  if (result.unconverged_fair_runs > 0) {
    std::cerr << "cachefair: " << result.unconverged_fair_runs
              << " fair solve(s) stopped at the iteration cap\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cache-aware traffic routing: networks, solver and experiments"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a random network (and optionally its instance)");
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--density", gen.density, "Stations per km^2 (large tier for --two-tier)");
  g->add_option("--width", gen.width, "Window width in km");
  g->add_option("--height", gen.height, "Window height in km");
  g->add_option("--radius", gen.radius, "Coverage radius in km (single tier)");
  g->add_option("--files", gen.files, "Catalog size");
  g->add_option("--zipf", gen.zipf, "Zipf exponent of file popularity");
  g->add_option("--cache-size", gen.cache_size, "Files per cache (single tier)");
  g->add_flag("--two-tier", gen.two_tier, "Large and small stations");
  g->add_option("--ratio", gen.ratio, "Small stations per large station");
  g->add_option("--large-radius", gen.large_radius, "Large-tier radius in km");
  g->add_option("--small-radius", gen.small_radius, "Small-tier radius in km");
  g->add_option("--user-density", gen.user_density, "Requests per km^2");
  g->add_option("--resolution", gen.resolution, "Grid cells per km");
  g->add_option("-o,--out", gen.out, "Network JSON path (- for stdout)");
  g->add_option("--instance-out", gen.instance_out, "Also write the routing instance JSON");

  SolveOptions solve;
  auto* s = app.add_subcommand("solve", "Route an instance with one policy");
  s->add_option("--instance", solve.source.instance_path, "Instance JSON");
  s->add_option("--network", solve.source.network_path, "Network JSON");
  s->add_option("--user-density", solve.source.user_density, "Requests per km^2 (with --network)");
  s->add_option("--resolution", solve.source.resolution, "Grid cells per km (with --network)");
  s->add_option("--mode", solve.mode, "centralized or distributed")
      ->check(CLI::IsMember({"centralized", "distributed"}));
  s->add_option("--policy", solve.policy, "fair, closest or unsplittable")
      ->check(CLI::IsMember({"fair", "closest", "unsplittable"}));
  s->add_flag("--scaled", solve.scaled, "Derive solver parameters from the instance scale");
  s->add_option("--rho", solve.rho, "Penalty and dual step length");
  s->add_option("--alpha", solve.alpha, "Jacobi relaxation in (0, 1]");
  s->add_option("--eps-inner", solve.eps_inner, "Inner stopping tolerance");
  s->add_option("--eps-outer", solve.eps_outer, "Outer stopping tolerance");
  s->add_option("--max-inner", solve.max_inner, "Inner iteration cap");
  s->add_option("--max-outer", solve.max_outer, "Outer iteration cap");
  s->add_option("--seed", solve.seed, "Random start (fair) or station draws (unsplittable)");
  s->add_option("-o,--out", solve.out, "Report JSON path (- for stdout)");
  s->add_option("--trace", solve.trace, "Message trace JSON lines (distributed mode)");
  s->add_option("--bucket-trace", solve.bucket_trace,
                "Bucket-fill events per station at the final iterate, JSON lines");

  ExperimentOptions exp;
  auto* e = app.add_subcommand("experiment", "Monte-Carlo comparison of the policies");
  e->add_option("kind", exp.kind, "single-tier or two-tier")
      ->required()
      ->check(CLI::IsMember({"single-tier", "two-tier"}));
  e->add_option("--config", exp.config, "Scenario JSON; flags override it");
  e->add_option("--runs", exp.runs, "Runs per sweep point");
  e->add_option("--seed", exp.seed, "Base seed");
  e->add_option("--radii", exp.radii, "Radius sweep in km (single tier)")->delimiter(',');
  e->add_option("--ratios", exp.ratios, "Small:large density sweep (two tier)")->delimiter(',');
  e->add_flag("--per-cell", exp.per_cell, "Closest-available per grid cell");
  e->add_option("--out-dir", exp.out_dir, "Directory for CSV and SVG files");
  e->add_option("--stem", exp.stem, "Output file stem (default: the experiment kind)");
  e->add_option("--runs-out", exp.runs_out, "Per-run metrics JSON");

  CLI11_PARSE(app, argc, argv);
  try {
    if (g->parsed()) return run_gen(gen);
    if (s->parsed()) return run_solve(solve);
    return run_experiment_cmd(exp);
  } catch (const CLI::Error& err) {
    return app.exit(err);
  } catch (const std::exception& err) {
    std::cerr << "cachefair: " << err.what() << '\n';
    return 1;
  }
}
