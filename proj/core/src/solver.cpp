#include "qfuse/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "qfuse/model.hpp"
#include "qfuse/prox.hpp"

namespace qfuse {

void SolverConfig::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("SolverConfig: rho must be finite and > 0");
  }
  if (!(tol_primal > 0.0) || !(tol_dual > 0.0)) {
    throw std::invalid_argument("SolverConfig: tolerances must be > 0");
  }
  if (max_iter < 1) {
    throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
  }
  if (jump_tol && !(*jump_tol >= 0.0)) {
    throw std::invalid_argument("SolverConfig: jump_tol must be >= 0");
  }
}

namespace {

PiecewiseFit assemble_fit(const Signal& y, const QuantileSpec& spec, double w,
                          std::optional<double> jump_tol, std::vector<double> u,
                          std::size_t iterations, bool converged,
                          double primal_residual, double dual_residual) {
  PiecewiseFit f;
  f.u_hat = std::move(u);
  const double jt = jump_tol ? *jump_tol : default_jump_tol(f.u_hat);
  f.changepoints = extract_changepoints(f.u_hat, jt);
  f.levels = segment_levels(f.u_hat, f.changepoints);
  f.objective = objective_value(y, f.u_hat, spec, w);
  f.iterations = iterations;
  f.converged = converged;
  f.primal_residual = primal_residual;
  f.dual_residual = dual_residual;
  return f;
}

}  // namespace

PiecewiseFit fit(const Signal& y, const QuantileSpec& spec, double w,
                 const SolverConfig& cfg) {
  WarmState warm;
  return fit(y, spec, w, cfg, warm);
}

PiecewiseFit fit(const Signal& y, const QuantileSpec& spec, double w,
                 const SolverConfig& cfg, WarmState& warm) {
  cfg.validate();
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw std::invalid_argument("fit: weight must be finite and >= 0");
  }
  const std::size_t n = y.n();
  const ProxParams params{1.0 / cfg.rho, w / cfg.rho};
  params.validate();

  std::vector<double> u;
  std::vector<double> d;
  if (warm.u.size() == n && warm.dual.size() == n) {
    u = warm.u;
    d = warm.dual;
  } else {
    u = y.values();
    d.assign(n, 0.0);
  }
  std::vector<double> v(n), target(n), u_next;
  detail::TvWorkspace ws;

  bool converged = false;
  double primal = 0.0, dualres = 0.0;
  std::size_t it = 0;
  while (it < cfg.max_iter) {
    ++it;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = prox_check(u[i] + d[i], y[i], spec, params.sigma);
    }
    for (std::size_t i = 0; i < n; ++i) target[i] = v[i] - d[i];
    detail::tv_prox_into(target, params.w_over_rho, u_next, ws);

    primal = 0.0;
    dualres = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      primal = std::max(primal, std::abs(u_next[i] - v[i]));
      dualres = std::max(dualres, std::abs(u_next[i] - u[i]));
    }
    dualres *= cfg.rho;
    u.swap(u_next);
    for (std::size_t i = 0; i < n; ++i) d[i] += u[i] - v[i];

    if (primal <= cfg.tol_primal && dualres <= cfg.tol_dual) {
      converged = true;
      break;
    }
  }

  warm.u = u;
  warm.dual = d;
  return assemble_fit(y, spec, w, cfg.jump_tol, std::move(u), it, converged,
                      primal, dualres);
}

PiecewiseFit brute_force_fit(const Signal& y, const QuantileSpec& spec,
                             double w) {
  const std::size_t n = y.n();
  if (n > 10) {
    throw std::invalid_argument("brute_force_fit: refuses n > 10");
  }
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw std::invalid_argument("brute_force_fit: weight must be finite and >= 0");
  }

  const auto count_jumps = [&](const std::vector<double>& u) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (u[i] != u[i - 1]) ++k;
    }
    return k;
  };

  std::vector<double> best_u;
  double best_obj = 0.0;
  std::size_t best_jumps = 0;
  bool have_best = false;

  std::vector<double> u(n);
  std::vector<std::size_t> starts, choice;

  // The objective is piecewise linear in u, so some global optimum sits at a
  // vertex where every segment is pinned by one of its own observations; it
  // is enough to sweep per-segment data values for each segmentation.
  for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
    starts.clear();
    starts.push_back(0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (mask & (1u << i)) starts.push_back(i + 1);
    }
    starts.push_back(n);
    const std::size_t m = starts.size() - 1;

    choice.assign(starts.begin(), starts.end() - 1);
    for (;;) {
      for (std::size_t s = 0; s < m; ++s) {
        const double level = y[choice[s]];
        for (std::size_t t = starts[s]; t < starts[s + 1]; ++t) u[t] = level;
      }
      const double obj = objective_value(y, u, spec, w);
      bool take = false;
      if (!have_best || obj < best_obj) {
        take = true;
      } else if (obj == best_obj) {
        const std::size_t jumps = count_jumps(u);
        if (jumps < best_jumps) {
          take = true;
        } else if (jumps == best_jumps &&
                   std::lexicographical_compare(u.begin(), u.end(),
                                                best_u.begin(),
                                                best_u.end())) {
          take = true;
        }
      }
      if (take) {
        best_u = u;
        best_obj = obj;
        best_jumps = count_jumps(u);
        have_best = true;
      }

      std::size_t s = 0;
      while (s < m) {
        if (++choice[s] < starts[s + 1]) break;
        choice[s] = starts[s];
        ++s;
      }
      if (s == m) break;
    }
  }

  return assemble_fit(y, spec, w, 0.0, std::move(best_u), 0, true, 0.0, 0.0);
}

CertificateReport kkt_certificate(const Signal& y, const PiecewiseFit& fit,
                                  const QuantileSpec& spec, double w,
                                  double tol_res, double tol_cert) {
  const std::size_t n = y.n();
  if (fit.u_hat.size() != n) {
    throw std::invalid_argument("kkt_certificate: fit dimensioned for a different signal");
  }
  if (!(tol_res > 0.0) || !(tol_cert > 0.0)) {
    throw std::invalid_argument("kkt_certificate: tolerances must be > 0");
  }
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw std::invalid_argument("kkt_certificate: weight must be finite and >= 0");
  }
  const double tau = spec.tau();

  CertificateReport rep;
  rep.per_index_bounds.resize(n);

  // Suffix sums of the per-observation subgradient intervals of the check
  // loss: exactly fitted points contribute the whole interval [tau-1, tau].
  double lower = 0.0, upper = 0.0;
  for (std::size_t j = n; j >= 1; --j) {
    const double r = y[j - 1] - fit.u_hat[j - 1];
    double gl, gu;
    if (r < -tol_res) {
      gl = gu = tau - 1.0;
    } else if (r > tol_res) {
      gl = gu = tau;
    } else {
      gl = tau - 1.0;
      gu = tau;
    }
    lower += gl;
    upper += gu;
    rep.per_index_bounds[j - 1] = {j, lower, upper};
  }

  // Intercept stationarity: the full-range sum must admit zero.
  rep.intercept_violation =
      std::max({0.0, rep.per_index_bounds[0].lower_sum,
                -rep.per_index_bounds[0].upper_sum});

  // Every interior suffix interval must intersect [-w, w].
  double interior = 0.0;
  for (std::size_t j = 2; j <= n; ++j) {
    const auto& b = rep.per_index_bounds[j - 1];
    interior = std::max({interior, b.lower_sum - w, -w - b.upper_sum});
  }
  rep.max_interior_violation = std::max(0.0, interior);

  // Active change-points must admit the signed weight exactly.
  double active = 0.0;
  for (std::size_t t : fit.changepoints.indices()) {
    const bool up = fit.u_hat[t - 1] > fit.u_hat[t - 2];
    const double target = up ? w : -w;
    const auto& b = rep.per_index_bounds[t - 1];
    active = std::max({active, b.lower_sum - target, target - b.upper_sum});
  }
  rep.max_active_violation = std::max(0.0, active);

  rep.passed = rep.intercept_violation <= tol_cert &&
               rep.max_interior_violation <= tol_cert &&
               rep.max_active_violation <= tol_cert;
  return rep;
}

PiecewiseFit l2_fused_fit(const Signal& y, double w,
                          std::optional<double> jump_tol) {
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw std::invalid_argument("l2_fused_fit: weight must be finite and >= 0");
  }
  PiecewiseFit f;
  f.u_hat = tv_prox(y.values(), w);
  const double jt = jump_tol ? *jump_tol : default_jump_tol(f.u_hat);
  f.changepoints = extract_changepoints(f.u_hat, jt);
  f.levels = segment_levels(f.u_hat, f.changepoints);
  double obj = 0.0;
  for (std::size_t i = 0; i < y.n(); ++i) {
    const double r = y[i] - f.u_hat[i];
    obj += 0.5 * r * r;
  }
  for (std::size_t i = 0; i + 1 < y.n(); ++i) {
    obj += w * std::abs(f.u_hat[i + 1] - f.u_hat[i]);
  }
  f.objective = obj;
  f.iterations = 0;
  f.converged = true;
  return f;
}

}  // namespace qfuse
