#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qfuse/distributions.hpp"
#include "qfuse/solver.hpp"
#include "qfuse/types.hpp"

namespace qfuse {

/// Log-spaced weight grid description for the oracle-MSE mode: `points`
/// values from lambda_max * min_ratio up to lambda_max.
struct GridSpec {
  std::size_t points = 64;
  double min_ratio = 1e-3;
};

struct LambdaMode {
  enum class Kind { fixed, asymptotic, target_k, oracle_mse };

  Kind kind = Kind::fixed;
  double value = 0.0;   // w for fixed, C for asymptotic
  std::size_t k = 0;    // target_k
  GridSpec grid{};      // oracle_mse

  static LambdaMode fixed(double w);
  static LambdaMode asymptotic(double C);
  static LambdaMode target_k(std::size_t k);
  static LambdaMode oracle_mse(GridSpec g = {});

  /// Canonical token: "fixed:W", "as:C", "k:K", "mse".
  std::string label() const;
};

enum class Method { quantile_lasso, l2_lasso };

std::string method_label(Method m);
std::string law_label(ErrorLaw law);

struct StudyConfig {
  Scenario scenario;
  std::vector<double> tau_levels;
  std::vector<LambdaMode> lambda_modes;
  std::vector<Method> methods;
  std::size_t reps = 1;
  std::uint64_t master_seed = 0;
  SolverConfig solver{};

  void validate() const;
};

struct RepResult {
  double bias = 0.0;
  double mse = 0.0;
  std::optional<double> detection_error{};  // missing when n_jumps < K*
  std::size_t n_jumps = 0;
  double lambda_used = 0.0;
  bool converged = true;
};

/// Mean over true breaks of the distance to the nearest estimate, divided by
/// n. Missing when fewer estimates than true breaks were found; reported
/// alongside the jump count since overfitted sets can score 0.
std::optional<double> detection_error(const ChangePointSet& cps_hat,
                                      const ChangePointSet& cps_true,
                                      std::size_t n);

struct Cell {
  Method method = Method::quantile_lasso;
  double tau = 0.5;
  LambdaMode mode{};
};

/// One Monte Carlo replication: errors seeded from (master_seed, rep_index)
/// only, so every cell of a replication sees the same noise. Resolves the
/// weight per the cell's mode, fits per the cell's method, and scores against
/// the tau-shifted truth.
RepResult run_replication(const StudyConfig& cfg, const Cell& cell,
                          std::size_t rep_index);

/// Same, with the error vector supplied by the caller.
RepResult run_replication_with_errors(const StudyConfig& cfg, const Cell& cell,
                                      const std::vector<double>& errors);

struct CellSummary {
  Cell cell;
  double lambda_mean = 0.0, lambda_sd = 0.0;
  double bias_mean = 0.0, bias_sd = 0.0;
  double mse_mean = 0.0, mse_sd = 0.0;
  double det_err_mean = 0.0, det_err_sd = 0.0;  // NaN when every rep excluded
  std::size_t det_err_excluded = 0;
  std::size_t jumps_min = 0, jumps_max = 0;
  double jumps_median = 0.0;
  std::size_t n_unconverged = 0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
};

struct StudySummary {
  std::vector<CellSummary> cells;  // methods x taus x modes, in config order
};

/// Runs every cell for every replication and aggregates. Replications may
/// execute on `threads` workers (0 = QFUSE_THREADS env, else hardware);
/// results are identical regardless of scheduling because each replication is
/// seeded independently and aggregation happens in fixed order.
StudySummary run_study(const StudyConfig& cfg, unsigned threads = 0);

/// Thread-count resolution used by run_study: request, else QFUSE_THREADS,
/// else hardware concurrency.
unsigned resolve_threads(unsigned requested);

}  // namespace qfuse
