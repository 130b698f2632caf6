#include "cachefair/solver.hpp"

#include <algorithm>
#include <cmath>

#include "cachefair/bucket_fill.hpp"
#include "cachefair/parallel.hpp"
#include "cachefair/random.hpp"

namespace cachefair {

void SolverConfig::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be positive");
  if (!(alpha > 0.0) || alpha > 1.0) throw ConfigError("alpha must lie in (0, 1]");
  if (!(eps_inner > 0.0) || !(eps_outer > 0.0)) throw ConfigError("tolerances must be positive");
  if (max_inner < 1 || max_outer < 1) throw ConfigError("iteration caps must be at least 1");
  if (!std::isfinite(initial_price)) throw ConfigError("initial price must be finite");
}

SolverConfig scaled_config(const CrpInstance& instance, const ScaledSettings& settings) {
  if (!(settings.rho_scale > 0.0) || !(settings.tolerance > 0.0)) {
    throw ConfigError("scaled settings must be positive");
  }
  double weight = 0.0;
  double soft = 0.0;
  for (const StationUtility& s : instance.stations()) {
    weight += s.utility.weight;
    soft += s.utility.soft_limit;
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, instance.station_count()));
  weight = instance.station_count() ? weight / n : 1.0;
  soft = instance.station_count() ? soft / n : 1.0;

  SolverConfig config;
  config.rho = settings.rho_scale * weight / (soft * soft);
  config.alpha = settings.alpha;
  config.eps_outer = settings.tolerance * weight / soft;
  config.eps_inner = settings.tolerance * soft;
  config.initial_price = -settings.price_offset * weight / soft;
  config.max_inner = settings.max_inner;
  config.max_outer = settings.max_outer;
  config.validate();
  return config;
}

RoutingVector jacobi_targets(const CrpInstance& instance, const DualVector& lambda,
                             const RoutingVector& y_tilde, double rho, unsigned threads) {
  RoutingVector target = RoutingVector::zeros(instance);
  const std::size_t stations = instance.station_count();
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, stations));
  parallel_for(workers, static_cast<unsigned>(workers), [&](std::size_t w) {
    BucketFiller filler;
    std::vector<Bucket> buckets;
    for (std::size_t m = stations * w / workers; m < stations * (w + 1) / workers; ++m) {
      const auto served = instance.served_by(m);
      if (served.empty()) continue;
      local_coefficients_into(instance, m, y_tilde, lambda, rho, buckets);
      const BucketFillResult& fill = filler.solve(buckets, instance.stations()[m].utility, rho);
      for (std::size_t k = 0; k < served.size(); ++k) target[served[k].slot] = fill.allocation[k];
    }
  });
  return target;
}

PrimalResult dqa_solve_primal(const CrpInstance& instance, const DualVector& lambda,
                              const SolverConfig& config, const RoutingVector& warm_start) {
  config.validate();
  PrimalResult result;
  result.routing = warm_start;
  RoutingVector& y = result.routing;
  for (int it = 1; it <= config.max_inner; ++it) {
    const RoutingVector target = jacobi_targets(instance, lambda, y, config.rho, config.threads);
    double step = 0.0;
    for (std::size_t s = 0; s < y.values.size(); ++s) {
      const double next = y[s] + config.alpha * (target[s] - y[s]);
      step = std::max(step, std::abs(next - y[s]));
      y[s] = next;
    }
    result.iterations = it;
    result.last_step = step;
    if (step <= config.eps_inner) {
      result.converged = true;
      break;
    }
  }
  return result;
}

DualVector dual_step(const DualVector& lambda, const RoutingVector& y, const CrpInstance& instance,
                     double rho) {
  DualVector next = lambda;
  const std::vector<double> r = constraint_residuals(instance, y);
  for (std::size_t q = 0; q < r.size(); ++q) next[q] += rho * r[q];
  return next;
}

double initial_share(std::uint64_t seed, int q, std::size_t position, double demand) {
  if (seed == 0) return 0.0;
  const std::uint64_t bits = derive_seed(seed, static_cast<std::uint64_t>(q), position);
  return demand * (static_cast<double>(bits >> 11) * 0x1.0p-53);
}

RoutingVector initial_routing(const CrpInstance& instance, const SolverConfig& config) {
  RoutingVector y = RoutingVector::zeros(instance);
  for (std::size_t q = 0; q < instance.region_file_count(); ++q) {
    const double cap = instance.region_files()[q].demand;
    const std::size_t begin = instance.slot_begin(static_cast<int>(q));
    for (std::size_t s = begin; s < instance.slot_end(static_cast<int>(q)); ++s) {
      y[s] = initial_share(config.seed, static_cast<int>(q), s - begin, cap);
    }
  }
  return y;
}

SolveReport solve_crp(const CrpInstance& instance, const SolverConfig& config) {
  config.validate();
  if (instance.region_file_count() == 0) {
    throw std::invalid_argument("solve_crp needs at least one region-file");
  }
  SolveReport report;
  report.duals = DualVector::zeros(instance);
  std::fill(report.duals.prices.begin(), report.duals.prices.end(), config.initial_price);
  report.routing = initial_routing(instance, config);

  for (int t = 1; t <= config.max_outer; ++t) {
    PrimalResult primal = dqa_solve_primal(instance, report.duals, config, report.routing);
    report.routing = std::move(primal.routing);
    report.inner_iterations_total += primal.iterations;
    if (!primal.converged) ++report.inner_cap_hits;

    DualVector next = dual_step(report.duals, report.routing, instance, config.rho);
    double price_change = 0.0;
    for (std::size_t q = 0; q < next.prices.size(); ++q) {
      price_change = std::max(price_change, std::abs(next[q] - report.duals[q]));
    }
    report.residual_history.push_back(feasibility_residual(instance, report.routing));
    report.duals = std::move(next);
    report.outer_iterations = t;
    if (price_change <= config.eps_outer) {
      report.converged = true;
      break;
    }
  }
  report.objective = objective(instance, report.routing);
  return report;
}

}  // namespace cachefair
