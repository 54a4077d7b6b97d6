#include "qfuse/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qfuse/distributions.hpp"

namespace qfuse {

Signal::Signal(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw std::invalid_argument("Signal: need at least 2 observations");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("Signal: non-finite observation");
    }
  }
}

QuantileSpec::QuantileSpec(double tau) : tau_(tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("QuantileSpec: tau must lie strictly in (0,1)");
  }
}

ChangePointSet::ChangePointSet(std::vector<std::size_t> indices, std::size_t n)
    : indices_(std::move(indices)), n_(n) {
  std::size_t prev = 1;
  for (std::size_t t : indices_) {
    if (t < 2 || t > n_ || t <= prev) {
      throw std::invalid_argument(
          "ChangePointSet: indices must be strictly increasing within {2..n}");
    }
    prev = t;
  }
}

Scenario Scenario::sim1(std::size_t n, ErrorLaw law) {
  Scenario s;
  s.rel_breaks = {0.2, 0.7};
  s.seg_levels = {0.0, 2.0, 1.0};
  s.n = n;
  s.error_law = law;
  s.validate();
  return s;
}

void Scenario::validate() const {
  if (n < 2) throw std::invalid_argument("Scenario: n must be >= 2");
  if (seg_levels.size() != rel_breaks.size() + 1) {
    throw std::invalid_argument("Scenario: need one more level than breaks");
  }
  double prev = 0.0;
  for (double b : rel_breaks) {
    if (!(b > prev && b < 1.0)) {
      throw std::invalid_argument(
          "Scenario: relative breaks must be strictly increasing in (0,1)");
    }
    prev = b;
  }
  for (std::size_t k = 0; k + 1 < seg_levels.size(); ++k) {
    if (seg_levels[k] == seg_levels[k + 1]) {
      throw std::invalid_argument("Scenario: adjacent segment levels must differ");
    }
  }
  std::size_t prev_t = 1;
  for (std::size_t t : break_indices()) {
    if (t < 2 || t > n || t <= prev_t) {
      throw std::invalid_argument(
          "Scenario: derived integer breaks collide or leave {2..n}");
    }
    prev_t = t;
  }
}

std::vector<std::size_t> Scenario::break_indices() const {
  std::vector<std::size_t> out;
  out.reserve(rel_breaks.size());
  for (double b : rel_breaks) {
    out.push_back(static_cast<std::size_t>(std::floor(b * static_cast<double>(n))) + 1);
  }
  return out;
}

double check_loss(double v, const QuantileSpec& spec) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument("check_loss: non-finite argument");
  }
  return v >= 0.0 ? v * spec.tau() : v * (spec.tau() - 1.0);
}

double objective_value(const Signal& y, std::span<const double> u,
                       const QuantileSpec& spec, double w) {
  if (u.size() != y.n()) {
    throw std::invalid_argument("objective_value: length mismatch");
  }
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw std::invalid_argument("objective_value: weight must be finite and >= 0");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    loss += check_loss(y[i] - u[i], spec);
  }
  double variation = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    variation += std::abs(u[i + 1] - u[i]);
  }
  return loss + w * variation;
}

double default_jump_tol(std::span<const double> u) {
  double m = 0.0;
  for (double v : u) m = std::max(m, std::abs(v));
  return 1e-8 * (1.0 + m);
}

ChangePointSet extract_changepoints(std::span<const double> u, double jump_tol) {
  if (!(jump_tol >= 0.0)) {
    throw std::invalid_argument("extract_changepoints: jump_tol must be >= 0");
  }
  std::vector<std::size_t> idx;
  for (std::size_t t = 1; t < u.size(); ++t) {
    if (std::abs(u[t] - u[t - 1]) > jump_tol) idx.push_back(t + 1);
  }
  return ChangePointSet(std::move(idx), u.size());
}

std::vector<double> segment_levels(std::span<const double> u,
                                   const ChangePointSet& cps) {
  if (u.empty()) throw std::invalid_argument("segment_levels: empty input");
  if (cps.signal_length() != u.size()) {
    throw std::invalid_argument("segment_levels: change-point set sized for a different signal");
  }
  std::vector<double> out;
  out.reserve(cps.size() + 1);
  out.push_back(u[0]);
  for (std::size_t t : cps.indices()) {
    if (u[t - 1] == u[t - 2]) {
      throw std::invalid_argument("segment_levels: listed index carries no jump");
    }
    out.push_back(u[t - 1]);
  }
  return out;
}

double set_distance(std::span<const std::size_t> a,
                    std::span<const std::size_t> b) {
  if (b.empty()) return 0.0;
  if (a.empty()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t bv : b) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t av : a) {
      double d = av > bv ? double(av - bv) : double(bv - av);
      best = std::min(best, d);
    }
    worst = std::max(worst, best);
  }
  return worst;
}

ScenarioTruth scenario_truth(const Scenario& s, const QuantileSpec& spec) {
  s.validate();
  ScenarioTruth truth;
  truth.u_star.resize(s.n);
  auto breaks = s.break_indices();
  std::size_t seg = 0;
  for (std::size_t t = 1; t <= s.n; ++t) {
    while (seg < breaks.size() && t >= breaks[seg]) ++seg;
    truth.u_star[t - 1] = s.seg_levels[seg];
  }
  const double shift = law_icdf(s.error_law, spec.tau());
  truth.u_star_tau = truth.u_star;
  for (double& v : truth.u_star_tau) v += shift;
  truth.breaks = ChangePointSet(std::move(breaks), s.n);
  return truth;
}

double empirical_quantile(std::span<const double> values, double tau) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: empty input");
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("empirical_quantile: tau must lie in (0,1)");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double t = tau * static_cast<double>(sorted.size());
  auto k = static_cast<std::size_t>(std::ceil(t - 1e-9));
  if (k < 1) k = 1;
  if (k > sorted.size()) k = sorted.size();
  return sorted[k - 1];
}

}  // namespace qfuse
