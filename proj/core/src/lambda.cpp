#include "qfuse/lambda.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "qfuse/model.hpp"

namespace qfuse {

double lambda_asymptotic(std::size_t n, double C) {
  if (n < 2) throw std::invalid_argument("lambda_asymptotic: n must be >= 2");
  if (!(C > 0.0) || !std::isfinite(C)) {
    throw std::invalid_argument("lambda_asymptotic: C must be finite and > 0");
  }
  const double nn = static_cast<double>(n);
  return C * std::sqrt(std::log(nn) / nn);
}

namespace {

bool is_constant(const std::vector<double>& v) {
  for (double x : v) {
    if (x != v.front()) return false;
  }
  return true;
}

using Fitter = std::function<PiecewiseFit(double)>;

// Weights sitting exactly on a segmentation transition are degenerate: the
// optimum is a face and the splitting iteration crawls along it at tight
// tolerances. Selection probes only need the jump count, so they run at a
// loosened tolerance with a structural jump threshold (real jumps are
// data-scale, solver dust is tolerance-scale) and an iteration cap; the
// chosen weight is refit at the caller's full configuration afterwards.
constexpr std::size_t kProbeIterCap = 20000;
constexpr double kProbeTol = 1e-6;

SolverConfig probe_config(const SolverConfig& cfg,
                          std::span<const double> y_values) {
  SolverConfig p = cfg;
  p.max_iter = std::min(cfg.max_iter, kProbeIterCap);
  p.tol_primal = std::max(cfg.tol_primal, kProbeTol);
  p.tol_dual = std::max(cfg.tol_dual, kProbeTol);
  double scale = 0.0;
  for (double v : y_values) scale = std::max(scale, std::abs(v));
  const double structural = 1e-4 * (1.0 + scale);
  p.jump_tol = std::max(cfg.jump_tol.value_or(0.0), structural);
  return p;
}

double lambda_max_generic(const Fitter& fitfn, double seed) {
  double hi = seed;
  int guard = 0;
  while (fitfn(hi).changepoints.size() > 0) {
    hi *= 2.0;
    if (++guard > 200) break;
  }
  double lo = 0.0;
  while (hi - lo > 1e-3 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (fitfn(mid).changepoints.empty()) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// fit_lo drives the bisection and the ascending half of the bracket sweep,
// fit_hi the descending half, so warm-start states never have to cross the
// transition repeatedly.
LambdaKResult select_for_k(const Fitter& fit_lo, const Fitter& fit_hi,
                           double wmax, std::size_t k_target) {
  struct Candidate {
    double w = 0.0;
    PiecewiseFit fit;
    bool valid = false;
  };
  Candidate exact;    // largest w attaining the target
  Candidate nearest;  // closest count among usable fits, ties to larger w
  std::size_t nearest_gap = 0;

  auto consider = [&](double w, PiecewiseFit f) {
    if (!f.converged) return;  // unusable for selection
    const std::size_t k = f.changepoints.size();
    const std::size_t gap = k > k_target ? k - k_target : k_target - k;
    if (gap == 0 && (!exact.valid || w > exact.w)) {
      exact = {w, f, true};
    }
    if (!nearest.valid || gap < nearest_gap ||
        (gap == nearest_gap && w >= nearest.w)) {
      nearest_gap = gap;
      nearest = {w, std::move(f), true};
    }
  };

  auto probe = [&](const Fitter& fitfn, double w) {
    PiecewiseFit f = fitfn(w);
    const std::size_t k = f.changepoints.size();
    consider(w, std::move(f));
    return k;
  };

  const std::size_t k_top = probe(fit_hi, wmax);
  if (k_target == 0 || wmax == 0.0) {
    return {wmax, fit_hi(wmax), k_top == k_target};
  }

  double a = 0.0, b = wmax;
  const std::size_t k_zero = probe(fit_lo, 0.0);
  if (k_zero < k_target) {
    // Even the unpenalized fit has too few jumps; nothing to bracket.
    return {nearest.w, std::move(nearest.fit), false};
  }

  // Bracket the first descent of the count into the target: stop as soon as
  // the count reaches k_target, so the sweep lands where the k_target
  // strongest jumps survive rather than at the final collapse to a constant
  // (whose last surviving jumps are noise artifacts). When the unpenalized
  // count already equals the target, chase the upper end of that region
  // instead.
  const bool from_above = k_zero > k_target;
  while (b - a > std::max(1e-12, 1e-3 * wmax)) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    const std::size_t k_mid = probe(fit_lo, mid);
    const bool go_down = from_above ? k_mid <= k_target : k_mid < k_target;
    if (go_down) {
      b = mid;
    } else {
      a = mid;
    }
  }

  // Sweep the bracket from both ends inward.
  const std::size_t grid_points = 64;
  std::vector<double> grid(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    grid[i] = a + (b - a) * static_cast<double>(i) /
                      static_cast<double>(grid_points - 1);
  }
  std::size_t left = 0, right = grid_points;
  while (left < right) {
    probe(fit_lo, grid[left++]);
    if (left < right) probe(fit_hi, grid[--right]);
  }

  if (exact.valid) {
    return {exact.w, std::move(exact.fit), true};
  }
  if (nearest.valid) {
    return {nearest.w, std::move(nearest.fit), false};
  }
  return {wmax, fit_hi(wmax), k_target == 0};
}

LambdaMseResult select_oracle_mse(const Fitter& fitfn,
                                  std::span<const double> u_true_tau,
                                  std::span<const double> grid) {
  if (grid.empty()) {
    throw std::invalid_argument("lambda_oracle_mse: grid must be nonempty");
  }
  LambdaMseResult best, fallback;
  bool have = false, have_fallback = false;
  for (double w : grid) {
    PiecewiseFit f = fitfn(w);
    double mse = 0.0;
    for (std::size_t i = 0; i < u_true_tau.size(); ++i) {
      const double r = f.u_hat[i] - u_true_tau[i];
      mse += r * r;
    }
    mse /= static_cast<double>(u_true_tau.size());
    // Ascending grid, so <= keeps the largest tied weight.
    if (!f.converged) {
      if (!have_fallback || mse <= fallback.mse) {
        fallback = {w, std::move(f), mse};
        have_fallback = true;
      }
      continue;
    }
    if (!have || mse <= best.mse) {
      best = {w, std::move(f), mse};
      have = true;
    }
  }
  // Every grid point unusable: surface the best effort, still flagged
  // converged=false.
  return have ? std::move(best) : std::move(fallback);
}

}  // namespace

double lambda_max(const Signal& y, const QuantileSpec& spec,
                  const SolverConfig& cfg) {
  if (is_constant(y.values())) return 0.0;
  const double q = empirical_quantile(y.values(), spec.tau());
  double spread = 0.0;
  for (double v : y.values()) spread = std::max(spread, std::abs(v - q));
  const double seed = static_cast<double>(y.n()) * spread;

  const SolverConfig probe_cfg = probe_config(cfg, y.values());
  WarmState warm;
  return lambda_max_generic(
      [&](double w) { return fit(y, spec, w, probe_cfg, warm); }, seed);
}

double l2_lambda_max(const Signal& y) {
  const std::size_t n = y.n();
  double mean = 0.0;
  for (double v : y.values()) mean += v;
  mean /= static_cast<double>(n);
  double run = 0.0, worst = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    run += y[i] - mean;
    worst = std::max(worst, std::abs(run));
  }
  return worst;
}

LambdaKResult lambda_for_k(const Signal& y, const QuantileSpec& spec,
                           std::size_t k_target, const SolverConfig& cfg) {
  if (k_target > y.n() - 1) {
    throw std::invalid_argument("lambda_for_k: target exceeds n - 1");
  }
  const double wmax = lambda_max(y, spec, cfg);
  const SolverConfig probe_cfg = probe_config(cfg, y.values());
  WarmState warm_lo, warm_hi;
  LambdaKResult sel = select_for_k(
      [&](double w) { return fit(y, spec, w, probe_cfg, warm_lo); },
      [&](double w) { return fit(y, spec, w, probe_cfg, warm_hi); }, wmax,
      k_target);
  // Refit the selected weight at the caller's full configuration, seeded
  // from the probe solution.
  WarmState refit_warm{sel.fit.u_hat, std::vector<double>(y.n(), 0.0)};
  sel.fit = fit(y, spec, sel.w, cfg, refit_warm);
  sel.exact = sel.fit.changepoints.size() == k_target;
  return sel;
}

LambdaKResult lambda_for_k_l2(const Signal& y, std::size_t k_target,
                              const SolverConfig& cfg) {
  if (k_target > y.n() - 1) {
    throw std::invalid_argument("lambda_for_k_l2: target exceeds n - 1");
  }
  const double wmax = l2_lambda_max(y);
  auto direct = [&](double w) { return l2_fused_fit(y, w, cfg.jump_tol); };
  return select_for_k(direct, direct, wmax, k_target);
}

LambdaMseResult lambda_oracle_mse(const Signal& y,
                                  std::span<const double> u_true_tau,
                                  const QuantileSpec& spec,
                                  std::span<const double> grid,
                                  const SolverConfig& cfg) {
  if (u_true_tau.size() != y.n()) {
    throw std::invalid_argument("lambda_oracle_mse: truth length mismatch");
  }
  const SolverConfig probe_cfg = probe_config(cfg, y.values());
  WarmState warm;
  LambdaMseResult sel = select_oracle_mse(
      [&](double w) { return fit(y, spec, w, probe_cfg, warm); }, u_true_tau,
      grid);
  WarmState refit_warm{sel.fit.u_hat, std::vector<double>(y.n(), 0.0)};
  sel.fit = fit(y, spec, sel.w, cfg, refit_warm);
  double mse = 0.0;
  for (std::size_t i = 0; i < u_true_tau.size(); ++i) {
    const double r = sel.fit.u_hat[i] - u_true_tau[i];
    mse += r * r;
  }
  sel.mse = mse / static_cast<double>(u_true_tau.size());
  return sel;
}

LambdaMseResult lambda_oracle_mse_l2(const Signal& y,
                                     std::span<const double> u_true_tau,
                                     std::span<const double> grid,
                                     const SolverConfig& cfg) {
  if (u_true_tau.size() != y.n()) {
    throw std::invalid_argument("lambda_oracle_mse_l2: truth length mismatch");
  }
  return select_oracle_mse(
      [&](double w) { return l2_fused_fit(y, w, cfg.jump_tol); }, u_true_tau,
      grid);
}

std::vector<PathPoint> solution_path(const Signal& y, const QuantileSpec& spec,
                                     std::span<const double> grid,
                                     const SolverConfig& cfg) {
  if (grid.empty()) {
    throw std::invalid_argument("solution_path: grid must be nonempty");
  }
  std::vector<PathPoint> out;
  out.reserve(grid.size());
  WarmState warm;
  for (double w : grid) {
    PiecewiseFit f = fit(y, spec, w, cfg, warm);
    out.push_back(PathPoint{w, f.changepoints.size(), f.objective,
                            f.changepoints, f.converged});
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (points == 0) throw std::invalid_argument("log_grid: need at least one point");
  if (!(lo > 0.0) || !(hi >= lo)) {
    throw std::invalid_argument("log_grid: need 0 < lo <= hi");
  }
  std::vector<double> g;
  g.reserve(points);
  if (points == 1) {
    g.push_back(hi);
    return g;
  }
  const double ratio = std::log(hi / lo);
  for (std::size_t i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(points - 1);
    g.push_back(lo * std::exp(ratio * f));
  }
  g.back() = hi;
  return g;
}

}  // namespace qfuse
