#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qfuse/types.hpp"

namespace qfuse {

struct SolverConfig {
  double rho = 1.0;            // splitting penalty
  double tol_primal = 1e-8;    // max|u - v| at termination
  double tol_dual = 1e-8;      // rho * max|u_new - u_old| at termination
  std::size_t max_iter = 200000;
  std::optional<double> jump_tol{};  // empty -> 1e-8 * (1 + max|u|)

  void validate() const;
};

/// Outcome of the stationarity check on a candidate fit. The three violation
/// figures are distances to the admissible intervals; passed means all of
/// them are within the certification tolerance.
struct CertificateReport {
  struct IndexBounds {
    std::size_t index;  // 1-based position j
    double lower_sum;   // L_j: suffix sum of subgradient interval lower ends
    double upper_sum;   // U_j: suffix sum of upper ends
  };

  bool passed = false;
  double max_interior_violation = 0.0;
  double max_active_violation = 0.0;
  double intercept_violation = 0.0;
  std::vector<IndexBounds> per_index_bounds;
};

/// Warm-start state threaded through repeated solves at nearby weights.
struct WarmState {
  std::vector<double> u;
  std::vector<double> dual;
};

/// Solve min_u sum_i rho_tau(y_i - u_i) + w * sum|u_{i+1} - u_i| by
/// alternating the elementwise check prox (v-step), the exact TV prox
/// (u-step), and a scaled dual update, until both residuals fall under the
/// configured tolerances. The returned u_hat is the TV-prox iterate, so it is
/// exactly piecewise constant. Hitting max_iter is reported via
/// converged=false, not an error.
PiecewiseFit fit(const Signal& y, const QuantileSpec& spec, double w,
                 const SolverConfig& cfg = {});

/// Same, but seeds from (and refreshes) an explicit warm-start state.
PiecewiseFit fit(const Signal& y, const QuantileSpec& spec, double w,
                 const SolverConfig& cfg, WarmState& warm);

/// Independent global minimizer for n <= 10: enumerate every segmentation
/// and, within each segment, every choice of level among that segment's own
/// observations (the objective is piecewise linear in u, so some optimum is a
/// vertex pinned by one observation per segment). Ties break toward fewer
/// change-points, then the lexicographically smaller fitted vector.
PiecewiseFit brute_force_fit(const Signal& y, const QuantileSpec& spec,
                             double w);

/// Checks the subgradient stationarity conditions of the penalized quantile
/// problem on a candidate fit. Residuals within tol_res of zero contribute
/// the full interval [tau-1, tau]; suffix interval sums must then cover 0 at
/// the intercept, intersect [-w, w] at every interior index, and cover the
/// signed weight at every active change-point. Necessary conditions checked
/// per index; violations beyond tol_cert fail the certificate.
CertificateReport kkt_certificate(const Signal& y, const PiecewiseFit& fit,
                                  const QuantileSpec& spec, double w,
                                  double tol_res = 1e-6,
                                  double tol_cert = 1e-6);

/// Squared-loss baseline with the same variation penalty: the solution is the
/// TV prox of the data itself. Objective reported as
/// 0.5*sum((y-u)^2) + w*sum|du|.
PiecewiseFit l2_fused_fit(const Signal& y, double w,
                          std::optional<double> jump_tol = {});

}  // namespace qfuse
