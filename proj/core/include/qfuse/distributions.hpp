#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

#include "qfuse/types.hpp"

namespace qfuse {

/// Standard normal quantile: rational approximation refined by one Newton
/// step on the erfc-based CDF. Requires p strictly inside (0,1).
double normal_icdf(double p);

/// Quantile of Student's t with 3 degrees of freedom via safeguarded Newton
/// iteration on the closed-form CDF, converged to 1e-12.
double t3_icdf(double p);

/// Standard Cauchy quantile tan(pi*(p - 1/2)).
double cauchy_icdf(double p);

double normal_cdf(double x);
double t3_cdf(double x);
double cauchy_cdf(double x);

double law_icdf(ErrorLaw law, double p);
double law_cdf(ErrorLaw law, double x);

/// 64-bit finalizing mixer (splitmix64 increment + avalanche).
std::uint64_t mix64(std::uint64_t z);

/// Derives the per-replication stream seed from the master seed.
std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t rep_index);

/// Counter-based uniform draw in the open interval (0,1): element `index` of
/// stream `stream`, independent of evaluation order.
double uniform01(std::uint64_t stream, std::uint64_t index);

/// n error draws: uniforms from the counter-based stream mapped through the
/// law's inverse CDF. Same arguments give bit-identical output.
std::vector<double> sample_errors(ErrorLaw law, std::size_t n,
                                  std::uint64_t stream);

}  // namespace qfuse
