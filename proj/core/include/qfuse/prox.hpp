#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qfuse/types.hpp"

namespace qfuse {

/// Kernel parameters used by the splitting solver: sigma is the prox step of
/// the check loss, w_over_rho the variation weight handed to the TV prox.
struct ProxParams {
  double sigma = 1.0;
  double w_over_rho = 0.0;

  void validate() const;
};

/// Unique minimizer of rho_tau(y - v) + (v - x)^2 / (2 sigma). Closed form:
/// shifts x by sigma*tau (resp. sigma*(1-tau)) while the residual is large,
/// and returns exactly y inside the dead zone.
double prox_check(double x, double y, const QuantileSpec& spec, double sigma);

/// Exact minimizer of 0.5*||u - x||^2 + w * sum|u_{i+1} - u_i|, computed by a
/// linear-time taut-string walk. Values within an output segment are
/// bit-identical; plateaus that tie exactly are merged.
std::vector<double> tv_prox(std::span<const double> x, double w);

/// Reference solution of the same problem by exhaustive segmentation and jump
/// sign-pattern enumeration (closed-form segment means per pattern). Only for
/// n <= 12; refuses longer inputs.
std::vector<double> tv_prox_oracle(std::span<const double> x, double w);

namespace detail {

struct TvKnot {
  double x;
  double y;
};

/// Scratch buffers for tv_prox so the solver loop can reuse allocations.
struct TvWorkspace {
  std::vector<double> cumsum;
  std::vector<TvKnot> knots;
  std::vector<TvKnot> hi;
  std::vector<TvKnot> lo;
};

void tv_prox_into(std::span<const double> x, double w, std::vector<double>& out,
                  TvWorkspace& ws);

}  // namespace detail

}  // namespace qfuse
