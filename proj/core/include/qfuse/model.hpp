#pragma once

#include <span>
#include <vector>

#include "qfuse/types.hpp"

namespace qfuse {

/// Check loss rho_tau(v) = v * (tau - 1{v < 0}). Nonnegative, zero only at
/// v == 0, positively homogeneous.
double check_loss(double v, const QuantileSpec& spec);

/// Sum_i rho_tau(y_i - u_i) + w * sum_i |u_{i+1} - u_i|, with w the total
/// variation multiplier applied directly to the variation sum.
double objective_value(const Signal& y, std::span<const double> u,
                       const QuantileSpec& spec, double w);

/// Relative-scale tolerance under which adjacent values count as equal:
/// 1e-8 * (1 + max|u|).
double default_jump_tol(std::span<const double> u);

/// All t in {2..n} with |u_t - u_{t-1}| > jump_tol, sorted.
ChangePointSet extract_changepoints(std::span<const double> u, double jump_tol);

/// Per-segment values of u in order; requires cps to be consistent with u
/// (matching length, a nonzero jump at every listed index).
std::vector<double> segment_levels(std::span<const double> u,
                                   const ChangePointSet& cps);

/// One-sided set deviation sup_{b in B} inf_{a in A} |a - b| over integer
/// indices. Empty B gives 0 (supremum over nothing); empty A with nonempty B
/// gives +infinity. Callers should surface both degenerate cases instead of
/// averaging them away.
double set_distance(std::span<const std::size_t> a,
                    std::span<const std::size_t> b);

struct ScenarioTruth {
  std::vector<double> u_star;      // true segment level at each position
  std::vector<double> u_star_tau;  // u_star shifted by the error law's tau-quantile
  ChangePointSet breaks;
};

/// Expands a Scenario into per-position truth vectors and the integer break
/// set. u_star_tau is the true conditional tau-quantile line.
ScenarioTruth scenario_truth(const Scenario& s, const QuantileSpec& spec);

/// Lower-endpoint empirical quantile: smallest x with F_n(x) >= tau.
double empirical_quantile(std::span<const double> values, double tau);

}  // namespace qfuse
