#include "qfuse/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

#include "qfuse/lambda.hpp"
#include "qfuse/model.hpp"

namespace qfuse {

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

LambdaMode LambdaMode::fixed(double w) {
  LambdaMode m;
  m.kind = Kind::fixed;
  m.value = w;
  return m;
}

LambdaMode LambdaMode::asymptotic(double C) {
  LambdaMode m;
  m.kind = Kind::asymptotic;
  m.value = C;
  return m;
}

LambdaMode LambdaMode::target_k(std::size_t k) {
  LambdaMode m;
  m.kind = Kind::target_k;
  m.k = k;
  return m;
}

LambdaMode LambdaMode::oracle_mse(GridSpec g) {
  LambdaMode m;
  m.kind = Kind::oracle_mse;
  m.grid = g;
  return m;
}

std::string LambdaMode::label() const {
  switch (kind) {
    case Kind::fixed: return "fixed:" + format_number(value);
    case Kind::asymptotic: return "as:" + format_number(value);
    case Kind::target_k: return "k:" + std::to_string(k);
    case Kind::oracle_mse: return "mse";
  }
  return "?";
}

std::string method_label(Method m) {
  return m == Method::quantile_lasso ? "qlasso" : "l2lasso";
}

std::string law_label(ErrorLaw law) {
  switch (law) {
    case ErrorLaw::normal: return "normal";
    case ErrorLaw::student3: return "t3";
    case ErrorLaw::cauchy: return "cauchy";
  }
  return "?";
}

void StudyConfig::validate() const {
  scenario.validate();
  if (reps < 1) throw std::invalid_argument("StudyConfig: reps must be >= 1");
  if (tau_levels.empty() || lambda_modes.empty() || methods.empty()) {
    throw std::invalid_argument("StudyConfig: tau levels, modes, and methods must be nonempty");
  }
  for (double t : tau_levels) {
    if (!(t > 0.0 && t < 1.0)) {
      throw std::invalid_argument("StudyConfig: tau must lie strictly in (0,1)");
    }
  }
  for (const LambdaMode& m : lambda_modes) {
    if (m.kind == LambdaMode::Kind::fixed && !(m.value >= 0.0)) {
      throw std::invalid_argument("StudyConfig: fixed weight must be >= 0");
    }
    if (m.kind == LambdaMode::Kind::asymptotic && !(m.value > 0.0)) {
      throw std::invalid_argument("StudyConfig: asymptotic C must be > 0");
    }
    if (m.kind == LambdaMode::Kind::oracle_mse &&
        (m.grid.points == 0 || !(m.grid.min_ratio > 0.0) ||
         !(m.grid.min_ratio <= 1.0))) {
      throw std::invalid_argument("StudyConfig: oracle grid must be nonempty with ratio in (0,1]");
    }
  }
  solver.validate();
}

std::optional<double> detection_error(const ChangePointSet& cps_hat,
                                      const ChangePointSet& cps_true,
                                      std::size_t n) {
  if (cps_true.empty()) {
    throw std::invalid_argument("detection_error: true set must be nonempty");
  }
  if (cps_hat.size() < cps_true.size()) return std::nullopt;
  double total = 0.0;
  for (std::size_t t_true : cps_true.indices()) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t_hat : cps_hat.indices()) {
      const double d = t_hat > t_true ? double(t_hat - t_true)
                                      : double(t_true - t_hat);
      best = std::min(best, d);
    }
    total += best;
  }
  return total / static_cast<double>(cps_true.size()) /
         static_cast<double>(n);
}

namespace {

struct Resolved {
  double w = 0.0;
  PiecewiseFit fit;
};

Resolved resolve_and_fit(const StudyConfig& cfg, const Cell& cell,
                         const Signal& y, const QuantileSpec& spec,
                         std::span<const double> u_true_tau) {
  const std::size_t n = y.n();
  const bool quantile = cell.method == Method::quantile_lasso;

  auto fit_at = [&](double w) {
    return quantile ? fit(y, spec, w, cfg.solver)
                    : l2_fused_fit(y, w, cfg.solver.jump_tol);
  };

  switch (cell.mode.kind) {
    case LambdaMode::Kind::fixed: {
      const double w = cell.mode.value;
      return {w, fit_at(w)};
    }
    case LambdaMode::Kind::asymptotic: {
      const double w = lambda_asymptotic(n, cell.mode.value);
      return {w, fit_at(w)};
    }
    case LambdaMode::Kind::target_k: {
      LambdaKResult r = quantile
                            ? lambda_for_k(y, spec, cell.mode.k, cfg.solver)
                            : lambda_for_k_l2(y, cell.mode.k, cfg.solver);
      return {r.w, std::move(r.fit)};
    }
    case LambdaMode::Kind::oracle_mse: {
      const double wmax =
          quantile ? lambda_max(y, spec, cfg.solver) : l2_lambda_max(y);
      if (wmax <= 0.0) {
        return {0.0, fit_at(0.0)};
      }
      const auto grid = log_grid(wmax * cell.mode.grid.min_ratio, wmax,
                                 cell.mode.grid.points);
      LambdaMseResult r =
          quantile
              ? lambda_oracle_mse(y, u_true_tau, spec, grid, cfg.solver)
              : lambda_oracle_mse_l2(y, u_true_tau, grid, cfg.solver);
      return {r.w, std::move(r.fit)};
    }
  }
  throw std::invalid_argument("run_replication: unknown lambda mode");
}

}  // namespace

RepResult run_replication_with_errors(const StudyConfig& cfg, const Cell& cell,
                                      const std::vector<double>& errors) {
  const std::size_t n = cfg.scenario.n;
  if (errors.size() != n) {
    throw std::invalid_argument("run_replication: error vector length mismatch");
  }
  const QuantileSpec spec(cell.tau);
  const ScenarioTruth truth = scenario_truth(cfg.scenario, spec);

  std::vector<double> yv(n);
  for (std::size_t i = 0; i < n; ++i) yv[i] = truth.u_star[i] + errors[i];
  const Signal y(std::move(yv));

  Resolved res = resolve_and_fit(cfg, cell, y, spec, truth.u_star_tau);

  RepResult out;
  out.lambda_used = res.w;
  out.converged = res.fit.converged;
  out.n_jumps = res.fit.changepoints.size();
  double bias = 0.0, mse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = res.fit.u_hat[i] - truth.u_star_tau[i];
    bias += d;
    mse += d * d;
  }
  out.bias = bias / static_cast<double>(n);
  out.mse = mse / static_cast<double>(n);
  out.detection_error = detection_error(res.fit.changepoints, truth.breaks, n);
  return out;
}

RepResult run_replication(const StudyConfig& cfg, const Cell& cell,
                          std::size_t rep_index) {
  const auto errors = sample_errors(cfg.scenario.error_law, cfg.scenario.n,
                                    stream_seed(cfg.master_seed, rep_index));
  return run_replication_with_errors(cfg, cell, errors);
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("QFUSE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

namespace {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) {
    m.mean = m.sd = std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

CellSummary summarize(const Cell& cell, const std::vector<RepResult>& reps,
                      std::uint64_t seed) {
  CellSummary s;
  s.cell = cell;
  s.reps = reps.size();
  s.seed = seed;

  std::vector<double> lambdas, biases, mses, dets;
  std::vector<std::size_t> jumps;
  lambdas.reserve(reps.size());
  for (const RepResult& r : reps) {
    lambdas.push_back(r.lambda_used);
    biases.push_back(r.bias);
    mses.push_back(r.mse);
    jumps.push_back(r.n_jumps);
    if (r.detection_error) {
      dets.push_back(*r.detection_error);
    }
    if (!r.converged) ++s.n_unconverged;
  }
  const Moments ml = moments(lambdas), mb = moments(biases),
                mm = moments(mses), md = moments(dets);
  s.lambda_mean = ml.mean;
  s.lambda_sd = ml.sd;
  s.bias_mean = mb.mean;
  s.bias_sd = mb.sd;
  s.mse_mean = mm.mean;
  s.mse_sd = mm.sd;
  s.det_err_mean = md.mean;
  s.det_err_sd = md.sd;
  s.det_err_excluded = reps.size() - dets.size();

  std::sort(jumps.begin(), jumps.end());
  s.jumps_min = jumps.front();
  s.jumps_max = jumps.back();
  const std::size_t h = jumps.size() / 2;
  s.jumps_median = jumps.size() % 2 == 1
                       ? static_cast<double>(jumps[h])
                       : 0.5 * (static_cast<double>(jumps[h - 1]) +
                                static_cast<double>(jumps[h]));
  return s;
}

}  // namespace

StudySummary run_study(const StudyConfig& cfg, unsigned threads) {
  cfg.validate();

  std::vector<Cell> cells;
  for (Method method : cfg.methods) {
    for (double tau : cfg.tau_levels) {
      for (const LambdaMode& mode : cfg.lambda_modes) {
        cells.push_back(Cell{method, tau, mode});
      }
    }
  }

  std::vector<std::vector<RepResult>> results(
      cells.size(), std::vector<RepResult>(cfg.reps));

  const std::size_t tasks = cells.size() * cfg.reps;
  auto nt = static_cast<unsigned>(
      std::min<std::size_t>(resolve_threads(threads), tasks));
  if (nt < 1) nt = 1;

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks) break;
      const std::size_t c = t / cfg.reps;
      const std::size_t r = t % cfg.reps;
      results[c][r] = run_replication(cfg, cells[c], r);
    }
  };

  std::vector<std::thread> pool;
  for (unsigned i = 1; i < nt; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();

  StudySummary summary;
  summary.cells.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    summary.cells.push_back(summarize(cells[c], results[c], cfg.master_seed));
  }
  return summary;
}

}  // namespace qfuse
