#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qfuse/solver.hpp"
#include "qfuse/types.hpp"

namespace qfuse {

/// Rate-based weight C * sqrt(log(n) / n) (natural log). C defaults to 10.
double lambda_asymptotic(std::size_t n, double C = 10.0);

/// Smallest weight at which the quantile fit is constant, located by doubling
/// then bisection to 1e-3 relative precision. A constant signal returns 0.
double lambda_max(const Signal& y, const QuantileSpec& spec,
                  const SolverConfig& cfg = {});

/// Closed-form counterpart for the squared-loss baseline: the largest
/// deviation of the centered cumulative sums.
double l2_lambda_max(const Signal& y);

struct LambdaKResult {
  double w = 0.0;
  PiecewiseFit fit;
  bool exact = true;  // false when no weight attains the requested count
};

/// Calibrates the weight so the fit has exactly k_target change-points:
/// bisection on the jump count over (0, lambda_max], then a 64-point sweep of
/// the final bracket keeping the largest weight that attains the target. If
/// the count is never hit (it is not monotone in w), returns the closest
/// count with ties toward larger w and exact=false.
LambdaKResult lambda_for_k(const Signal& y, const QuantileSpec& spec,
                           std::size_t k_target, const SolverConfig& cfg = {});

/// Same calibration for the squared-loss baseline.
LambdaKResult lambda_for_k_l2(const Signal& y, std::size_t k_target,
                              const SolverConfig& cfg = {});

struct LambdaMseResult {
  double w = 0.0;
  PiecewiseFit fit;
  double mse = 0.0;
};

/// Fits every grid point and keeps the weight minimizing the mean squared
/// deviation from the known truth, ties toward larger w. Simulation-only.
LambdaMseResult lambda_oracle_mse(const Signal& y,
                                  std::span<const double> u_true_tau,
                                  const QuantileSpec& spec,
                                  std::span<const double> grid,
                                  const SolverConfig& cfg = {});

LambdaMseResult lambda_oracle_mse_l2(const Signal& y,
                                     std::span<const double> u_true_tau,
                                     std::span<const double> grid,
                                     const SolverConfig& cfg = {});

struct PathPoint {
  double w = 0.0;
  std::size_t k_hat = 0;
  double objective = 0.0;
  ChangePointSet changepoints;
  bool converged = true;
};

/// Diagnostic sweep over an increasing weight grid, warm-starting each fit
/// from the previous solution. Records are in grid order.
std::vector<PathPoint> solution_path(const Signal& y, const QuantileSpec& spec,
                                     std::span<const double> grid,
                                     const SolverConfig& cfg = {});

/// points log-spaced values from lo to hi inclusive (single point: hi).
std::vector<double> log_grid(double lo, double hi, std::size_t points);

}  // namespace qfuse
