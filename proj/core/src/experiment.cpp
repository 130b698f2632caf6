#include "cachefair/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cachefair/parallel.hpp"
#include "cachefair/random.hpp"

namespace cachefair {

namespace {

constexpr PolicyKind kPolicies[] = {PolicyKind::Fair, PolicyKind::ClosestAvailable,
                                    PolicyKind::Unsplittable};

// Seed streams below a run seed.
enum Stream : std::uint64_t { kPlacement = 1, kCaches = 2, kUnsplittable = 3, kSmall = 4 };

bool finite_positive(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  return kind == ScenarioKind::SingleTier ? "single-tier" : "two-tier";
}

ScenarioKind scenario_from_string(std::string_view name) {
  if (name == "single-tier") return ScenarioKind::SingleTier;
  if (name == "two-tier") return ScenarioKind::TwoTier;
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

void ScenarioConfig::validate() const {
  if (runs < 1) throw ConfigError("runs must be at least 1");
  if (!finite_positive(density)) throw ConfigError("density must be positive");
  window.validate();
  if (file_count < 1) throw ConfigError("file count must be at least 1");
  if (!(zipf_s >= 0.0)) throw ConfigError("zipf exponent must be nonnegative");
  if (!finite_positive(user_density)) throw ConfigError("user density must be positive");
  if (!finite_positive(grid_resolution)) throw ConfigError("grid resolution must be positive");
  if (kind == ScenarioKind::SingleTier) {
    if (radii.empty()) throw ConfigError("radius sweep is empty");
    for (double r : radii) {
      if (!finite_positive(r)) throw ConfigError("radii must be positive");
    }
    if (cache_size < 1 || cache_size > file_count) {
      throw ConfigError("cache size must lie in [1, file count]");
    }
  } else {
    if (ratios.empty()) throw ConfigError("ratio sweep is empty");
    for (double r : ratios) {
      if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("ratios must be nonnegative");
    }
    if (!finite_positive(large_radius) || !finite_positive(small_radius)) {
      throw ConfigError("tier radii must be positive");
    }
    if (large_files.empty()) throw ConfigError("large tier must cache at least one file");
    for (FileId f : large_files) {
      if (f < 0 || f >= file_count) throw ConfigError("large tier file outside the catalog");
    }
  }
}

ScenarioConfig default_scenario(ScenarioKind kind) {
  ScenarioConfig c;
  c.kind = kind;
  return c;
}

NetworkInstance single_tier_network(const ScenarioConfig& config, double radius,
                                    std::uint64_t seed) {
  NetworkInstance net;
  net.window = config.window;
  net.catalog = Catalog::zipf(config.file_count, config.zipf_s);
  const auto points = sample_ppp(config.density, config.window, derive_seed(seed, kPlacement));
  std::mt19937_64 rng(derive_seed(seed, kCaches));
  std::vector<FileId> files(static_cast<std::size_t>(config.file_count));
  for (std::size_t i = 0; i < points.size(); ++i) {
    Station s;
    s.id = static_cast<StationId>(i);
    s.position = points[i];
    s.radius = radius;
    std::iota(files.begin(), files.end(), 0);
    std::shuffle(files.begin(), files.end(), rng);
    s.cached_files.assign(files.begin(), files.begin() + config.cache_size);
    std::sort(s.cached_files.begin(), s.cached_files.end());
    net.stations.push_back(std::move(s));
  }
  return net;
}

NetworkInstance two_tier_network(const ScenarioConfig& config, double ratio, std::uint64_t seed) {
  NetworkInstance net;
  net.window = config.window;
  net.catalog = Catalog::zipf(config.file_count, config.zipf_s);
  std::vector<FileId> large_files = config.large_files;
  std::sort(large_files.begin(), large_files.end());
  large_files.erase(std::unique(large_files.begin(), large_files.end()), large_files.end());

  for (const Point& p : sample_ppp(config.density, config.window, derive_seed(seed, kPlacement))) {
    Station s;
    s.id = static_cast<StationId>(net.stations.size());
    s.position = p;
    s.radius = config.large_radius;
    s.tier = Tier::Large;
    s.cached_files = large_files;
    net.stations.push_back(std::move(s));
  }
  if (ratio > 0.0) {
    std::mt19937_64 rng(derive_seed(seed, kCaches));
    std::uniform_int_distribution<std::size_t> pick(0, large_files.size() - 1);
    for (const Point& p :
         sample_ppp(ratio * config.density, config.window, derive_seed(seed, kSmall))) {
      Station s;
      s.id = static_cast<StationId>(net.stations.size());
      s.position = p;
      s.radius = config.small_radius;
      s.tier = Tier::Small;
      s.cached_files = {large_files[pick(rng)]};
      net.stations.push_back(std::move(s));
    }
  }
  return net;
}

std::map<StationId, double> load_shares(const CrpInstance& instance, const RoutingVector& y) {
  std::map<StationId, double> shares;
  const std::vector<double> v = station_volumes(instance, y);
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (!(total > 0.0)) return shares;
  for (std::size_t m = 0; m < v.size(); ++m) shares[instance.stations()[m].id] = v[m] / total;
  return shares;
}

RunRecord evaluate_network(const NetworkInstance& network, const ScenarioConfig& config,
                           std::uint64_t policy_seed) {
  RunRecord rec;
  rec.stations = network.stations.size();
  if (network.stations.empty()) {
    rec.degenerate = true;
    return rec;
  }
  const CoverageGrid grid(network.stations, network.window, config.grid_resolution);
  const RegionMap regions = grid.regions();
  const CrpInstance instance = build_instance(network, regions, config.user_density);
  rec.region_files = instance.region_file_count();
  if (instance.region_file_count() == 0) {
    rec.degenerate = true;
    return rec;
  }

  std::map<PolicyKind, RoutingVector> routing;
  FairResult fair_result = fair(instance, scaled_config(instance, config.solver));
  rec.fair_converged = fair_result.report.converged;
  routing[PolicyKind::Fair] = std::move(fair_result.routing);
  routing[PolicyKind::ClosestAvailable] =
      config.closest_per_cell ? closest_available_per_cell(instance, network, grid)
                              : closest_available(instance, network, regions);
  routing[PolicyKind::Unsplittable] =
      unsplittable(instance, derive_seed(policy_seed, kUnsplittable));

  const bool tiered = std::any_of(network.stations.begin(), network.stations.end(),
                                  [](const Station& s) { return s.tier != Tier::SingleTier; });
  for (PolicyKind kind : kPolicies) {
    const RoutingVector& y = routing.at(kind);
    PolicyOutcome out;
    for (double v : station_volumes(instance, y)) out.total_volume += v;
    const auto shares = load_shares(instance, y);
    if (shares.empty()) {
      rec.degenerate = true;
      return rec;
    }
    if (!tiered) {
      double hi = 0.0;
      double lo = 1.0;
      for (const auto& [id, share] : shares) {
        hi = std::max(hi, share);
        lo = std::min(lo, share);
      }
      out.metrics["max_share"] = hi;
      out.metrics["min_share"] = lo;
    } else {
      double large = 0.0;
      std::optional<double> hi;
      std::optional<double> lo;
      for (const auto& [id, share] : shares) {
        if (network.station(id).tier == Tier::Large) {
          large += share;
        } else {
          hi = std::max(hi.value_or(share), share);
          lo = std::min(lo.value_or(share), share);
        }
      }
      out.metrics["large_share"] = large;
      if (hi) {
        out.metrics["small_max_share"] = *hi;
        out.metrics["small_min_share"] = *lo;
      }
    }
    rec.outcomes[kind] = std::move(out);
  }

  const double reference = rec.outcomes.at(PolicyKind::Fair).total_volume;
  for (const auto& [kind, out] : rec.outcomes) {
    rec.conservation_gap = std::max(rec.conservation_gap, std::abs(out.total_volume - reference));
  }
  if (rec.conservation_gap > kConservationTolerance) {
    throw std::runtime_error("policies route different total volumes (gap " +
                             format_number(rec.conservation_gap) + ")");
  }
  return rec;
}

namespace {

ExperimentResult run_sweep(const ScenarioConfig& config, const std::vector<double>& sweep,
                           bool two_tier) {
  config.validate();
  const std::size_t runs = static_cast<std::size_t>(config.runs);
  ExperimentResult result;
  result.records.resize(sweep.size() * runs);
  const unsigned threads = config.threads ? config.threads : configured_threads();

  parallel_for(result.records.size(), threads, [&](std::size_t k) {
    const std::size_t i = k / runs;
    const int run = static_cast<int>(k % runs);
    const std::uint64_t seed = derive_seed(config.seed, i, static_cast<std::uint64_t>(run));
    const NetworkInstance net = two_tier ? two_tier_network(config, sweep[i], seed)
                                         : single_tier_network(config, sweep[i], seed);
    RunRecord rec = evaluate_network(net, config, seed);
    rec.sweep_index = i;
    rec.sweep = two_tier ? sweep[i] : mean_coverage(config.density, sweep[i]);
    rec.run = run;
    rec.seed = seed;
    result.records[k] = std::move(rec);
  });

  for (const RunRecord& rec : result.records) {
    if (rec.degenerate) {
      ++result.degenerate_runs;
      continue;
    }
    if (!rec.fair_converged) ++result.unconverged_fair_runs;
    result.max_conservation_gap = std::max(result.max_conservation_gap, rec.conservation_gap);
  }
  if (result.degenerate_runs > 0) {
    std::clog << "cachefair: " << result.degenerate_runs
              << " run(s) without coverage were skipped\n";
  }
  result.rows = aggregate(result.records);
  return result;
}

}  // namespace

ExperimentResult run_single_tier(const ScenarioConfig& config) {
  if (config.kind != ScenarioKind::SingleTier) throw ConfigError("expected a single-tier config");
  return run_sweep(config, config.radii, false);
}

ExperimentResult run_two_tier(const ScenarioConfig& config) {
  if (config.kind != ScenarioKind::TwoTier) throw ConfigError("expected a two-tier config");
  return run_sweep(config, config.ratios, true);
}

ExperimentResult run_experiment(const ScenarioConfig& config) {
  return config.kind == ScenarioKind::SingleTier ? run_single_tier(config) : run_two_tier(config);
}

std::vector<MetricRow> aggregate(const std::vector<RunRecord>& records) {
  struct Key {
    std::size_t sweep_index;
    PolicyKind policy;
    std::string metric;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::vector<double>> samples;
  std::map<std::size_t, double> sweep_values;
  for (const RunRecord& rec : records) {
    if (rec.degenerate) continue;
    sweep_values[rec.sweep_index] = rec.sweep;
    for (const auto& [policy, out] : rec.outcomes) {
      for (const auto& [metric, value] : out.metrics) {
        samples[{rec.sweep_index, policy, metric}].push_back(value);
      }
    }
  }
  std::vector<MetricRow> rows;
  for (const auto& [key, xs] : samples) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double se = xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    rows.push_back({sweep_values.at(key.sweep_index), key.policy, key.metric, mean, se,
                    static_cast<int>(xs.size())});
  }
  return rows;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << "sweep,policy,metric,mean,stderr,runs\n";
  for (const MetricRow& r : rows) {
    out << format_number(r.sweep) << ',' << to_string(r.policy) << ',' << r.metric << ','
        << format_number(r.mean) << ',' << format_number(r.std_error) << ',' << r.runs << '\n';
  }
}

std::vector<MetricRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "sweep,policy,metric,mean,stderr,runs") {
    throw std::runtime_error("unexpected CSV header");
  }
  auto number = [](const std::string& field) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
      throw std::runtime_error("bad number '" + field + "' in CSV");
    }
    return v;
  };
  std::vector<MetricRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 6) throw std::runtime_error("CSV row needs 6 fields: " + line);
    rows.push_back({number(f[0]), policy_from_string(f[1]), f[2], number(f[3]), number(f[4]),
                    std::stoi(f[5])});
  }
  return rows;
}

void emit_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_csv(out, rows);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

namespace {

const char* policy_color(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Fair: return "#1b9e77";
    case PolicyKind::ClosestAvailable: return "#d95f02";
    case PolicyKind::Unsplittable: return "#7570b3";
  }
  return "#000000";
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

std::string render_svg(const std::vector<MetricRow>& rows, const PlotSpec& spec) {
  constexpr double W = 640, H = 420, left = 70, right = 170, top = 40, bottom = 60;
  const double pw = W - left - right;
  const double ph = H - top - bottom;

  std::vector<const MetricRow*> used;
  for (const MetricRow& r : rows) {
    if (std::find(spec.metrics.begin(), spec.metrics.end(), r.metric) != spec.metrics.end()) {
      used.push_back(&r);
    }
  }
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!used.empty()) {
    x0 = x1 = used.front()->sweep;
    y0 = y1 = used.front()->mean;
    for (const MetricRow* r : used) {
      x0 = std::min(x0, r->sweep);
      x1 = std::max(x1, r->sweep);
      y0 = std::min(y0, r->mean - r->std_error);
      y1 = std::max(y1, r->mean + r->std_error);
    }
  }
  if (x1 <= x0) x1 = x0 + 1.0;
  y0 = std::max(0.0, y0 - 0.05 * (y1 - y0));
  y1 = y1 + 0.05 * (y1 - y0);
  if (y1 <= y0) y1 = y0 + 1.0;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };
  auto fmt = [](double v) { return format_number(std::round(v * 100.0) / 100.0); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << spec.title << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << fmt(pw) << "\" height=\""
      << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    svg << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(top + ph + 18)
        << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
    svg << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(py(yv) + 4)
        << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
  }
  svg << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(H - 14)
      << "\" text-anchor=\"middle\">" << spec.x_label << "</text>\n";
  svg << "<text transform=\"translate(18," << fmt(top + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << spec.y_label << "</text>\n";

  int legend = 0;
  for (std::size_t mi = 0; mi < spec.metrics.size(); ++mi) {
    for (PolicyKind kind : kPolicies) {
      std::vector<const MetricRow*> series;
      for (const MetricRow* r : used) {
        if (r->policy == kind && r->metric == spec.metrics[mi]) series.push_back(r);
      }
      if (series.empty()) continue;
      std::sort(series.begin(), series.end(),
                [](const MetricRow* a, const MetricRow* b) { return a->sweep < b->sweep; });
      svg << "<polygon fill=\"" << policy_color(kind) << "\" fill-opacity=\"0.2\" points=\"";
      for (const MetricRow* r : series) {
        svg << fmt(px(r->sweep)) << ',' << fmt(py(r->mean + r->std_error)) << ' ';
      }
      for (auto it = series.rbegin(); it != series.rend(); ++it) {
        svg << fmt(px((*it)->sweep)) << ',' << fmt(py((*it)->mean - (*it)->std_error)) << ' ';
      }
      svg << "\"/>\n";
      svg << "<polyline fill=\"none\" stroke=\"" << policy_color(kind) << "\" stroke-width=\"2\""
          << (mi % 2 ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
      for (const MetricRow* r : series) svg << fmt(px(r->sweep)) << ',' << fmt(py(r->mean)) << ' ';
      svg << "\"/>\n";
      const double ly = top + 14 + 18 * legend++;
      svg << "<line x1=\"" << fmt(left + pw + 10) << "\" y1=\"" << fmt(ly) << "\" x2=\""
          << fmt(left + pw + 34) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << policy_color(kind)
          << "\" stroke-width=\"2\"" << (mi % 2 ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
      svg << "<text x=\"" << fmt(left + pw + 40) << "\" y=\"" << fmt(ly + 4) << "\">"
          << to_string(kind) << ' ' << spec.metrics[mi] << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_svg(const std::filesystem::path& path, const std::vector<MetricRow>& rows,
              const PlotSpec& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << render_svg(rows, spec);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<std::pair<std::string, PlotSpec>> plots_for(ScenarioKind kind) {
  if (kind == ScenarioKind::SingleTier) {
    return {{"load_share",
             {"Minimum and maximum load share of a CBS", "Mean number of covering CBSs",
              "Load share", {"max_share", "min_share"}}}};
  }
  return {{"large_share",
           {"Aggregate traffic share of large CBSs", "Small CBSs per large CBS",
            "Aggregate share", {"large_share"}}},
          {"small_share",
           {"Minimum and maximum load share of a small CBS", "Small CBSs per large CBS",
            "Load share", {"small_max_share", "small_min_share"}}}};
}

std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& directory,
                                                 const std::string& stem, ScenarioKind kind,
                                                 const std::vector<MetricRow>& rows) {
  std::filesystem::create_directories(directory);
  std::vector<std::filesystem::path> paths;
  paths.push_back(directory / (stem + ".csv"));
  emit_csv(paths.back(), rows);
  for (const auto& [name, spec] : plots_for(kind)) {
    paths.push_back(directory / (stem + "_" + name + ".svg"));
    emit_svg(paths.back(), rows, spec);
  }
  return paths;
}

}  // namespace cachefair
