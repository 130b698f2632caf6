#pragma once

// Method of multipliers on the augmented Lagrangian. Each outer iteration
// maximizes L_rho(., lambda) with a Jacobi-style diagonal quadratic
// approximation: every station solves its own bucket-fill subproblem against
// the shared iterate, and the iterate moves a fraction alpha towards the
// stacked answers. Prices then take a step of length rho along the residuals.

#include <cstdint>
#include <vector>

#include "cachefair/instance.hpp"

namespace cachefair {

struct SolverConfig {
  double rho = 1.0;
  double alpha = 0.5;
  double eps_inner = 1e-6;
  double eps_outer = 1e-6;
  int max_inner = 500;
  int max_outer = 1000;
  /// 0: start from y = 0. Otherwise a uniform random start inside the box.
  std::uint64_t seed = 0;
  /// Workers for the per-station solves within one Jacobi sweep.
  unsigned threads = 1;
  /// lambda(0) for every region-file.
  double initial_price = 0.0;

  /// Throws ConfigError.
  void validate() const;
};

/// Parameters expressed relative to the instance's utility scale. With w the
/// mean utility weight and S the mean soft limit, prices live on the scale
/// w / S and volumes on the scale S, so rho = rho_scale * w / S^2,
/// eps_outer = tolerance * w / S, eps_inner = tolerance * S and
/// lambda(0) = -price_offset * w / S. The literal defaults of SolverConfig
/// suit instances with S near 1; these suit any S.
struct ScaledSettings {
  double rho_scale = 8.0;
  double alpha = 0.2;
  double tolerance = 1e-3;
  double price_offset = 0.5;
  int max_inner = 20;
  int max_outer = 20000;
};

SolverConfig scaled_config(const CrpInstance& instance, const ScaledSettings& settings = {});

struct PrimalResult {
  RoutingVector routing;
  int iterations = 0;
  bool converged = false;
  double last_step = 0.0;
};

struct SolveReport {
  RoutingVector routing;
  DualVector duals;
  int outer_iterations = 0;
  long inner_iterations_total = 0;
  /// Outer iterations whose inner loop stopped at max_inner.
  int inner_cap_hits = 0;
  std::vector<double> residual_history;  // max |N_q - sum_m y_{m,q}| per outer iteration
  double objective = 0.0;
  bool converged = false;
};

/// y* for every station given the shared iterate (one Jacobi sweep, unrelaxed).
RoutingVector jacobi_targets(const CrpInstance& instance, const DualVector& lambda,
                             const RoutingVector& y_tilde, double rho, unsigned threads = 1);

PrimalResult dqa_solve_primal(const CrpInstance& instance, const DualVector& lambda,
                              const SolverConfig& config, const RoutingVector& warm_start);

/// lambda_q + rho * (N_q - sum_m y_{m,q}).
DualVector dual_step(const DualVector& lambda, const RoutingVector& y, const CrpInstance& instance,
                     double rho);

SolveReport solve_crp(const CrpInstance& instance, const SolverConfig& config);

/// Starting point used by solve_crp for the given config. Each share depends
/// only on (seed, region-file, position in the eligible list), so stations can
/// draw their own slice without coordination.
RoutingVector initial_routing(const CrpInstance& instance, const SolverConfig& config);
double initial_share(std::uint64_t seed, int q, std::size_t position, double demand);

}  // namespace cachefair
