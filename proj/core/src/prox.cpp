#include "qfuse/prox.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace qfuse {

void ProxParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("ProxParams: sigma must be finite and > 0");
  }
  if (!(w_over_rho >= 0.0) || !std::isfinite(w_over_rho)) {
    throw std::invalid_argument("ProxParams: w_over_rho must be finite and >= 0");
  }
}

double prox_check(double x, double y, const QuantileSpec& spec, double sigma) {
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw std::invalid_argument("prox_check: non-finite argument");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("prox_check: sigma must be finite and > 0");
  }
  const double tau = spec.tau();
  const double r = y - x;
  if (r > sigma * tau) return x + sigma * tau;
  if (r < -sigma * (1.0 - tau)) return x - sigma * (1.0 - tau);
  return y;
}

namespace detail {

namespace {

using Knot = TvKnot;

// slope(a->b) >= slope(b->c), as a cross product; both x-deltas positive.
inline bool turns_down(const Knot& a, const Knot& b, const Knot& c) {
  return (b.y - a.y) * (c.x - b.x) >= (c.y - b.y) * (b.x - a.x);
}

// slope(a->b) <= slope(b->c).
inline bool turns_up(const Knot& a, const Knot& b, const Knot& c) {
  return (b.y - a.y) * (c.x - b.x) <= (c.y - b.y) * (b.x - a.x);
}

// slope(apex->p) < slope(apex->q).
inline bool slope_lt(const Knot& apex, const Knot& p, const Knot& q) {
  return (p.y - apex.y) * (q.x - apex.x) < (q.y - apex.y) * (p.x - apex.x);
}

}  // namespace

// Taut string through the tube [S_i - w, S_i + w] around the cumulative sums,
// pinned at (0,0) and (n, S_n); the fitted values are the slopes of the
// string. The walk keeps a funnel from the last fixed knot (apex): a convex
// chain of ceiling contact candidates and a concave chain of floor
// candidates. When a new bound closes the funnel, the string is forced
// through the head of the opposite chain and the apex advances. Equal slopes
// collapse (pops at ties), so plateaus merge and each emitted segment gets a
// single value.
void tv_prox_into(std::span<const double> x, double w,
                  std::vector<double>& out, TvWorkspace& ws) {
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw std::invalid_argument("tv_prox: weight must be finite and >= 0");
  }
  const std::size_t n = x.size();
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) {
      throw std::invalid_argument("tv_prox: non-finite input");
    }
    out[i] = x[i];
  }
  if (n <= 1 || w == 0.0) return;

  auto& S = ws.cumsum;
  S.resize(n + 1);
  S[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) S[i + 1] = S[i] + x[i];

  auto& knots = ws.knots;
  auto& hi = ws.hi;
  auto& lo = ws.lo;
  knots.clear();
  hi.clear();
  lo.clear();
  std::size_t hi_head = 0, lo_head = 0;

  Knot apex{0.0, 0.0};
  knots.push_back(apex);

  auto add_upper = [&](Knot p) {
    while (hi.size() > hi_head) {
      const Knot& last = hi.back();
      const Knot& prev = hi.size() - hi_head >= 2 ? hi[hi.size() - 2] : apex;
      if (turns_down(prev, last, p)) {
        hi.pop_back();
      } else {
        break;
      }
    }
    if (hi.size() == hi_head) {
      // Funnel may have closed downward: fix floor contacts until p is
      // reachable again.
      while (lo.size() > lo_head && slope_lt(apex, p, lo[lo_head])) {
        apex = lo[lo_head++];
        knots.push_back(apex);
      }
    }
    hi.push_back(p);
  };

  auto add_lower = [&](Knot p) {
    while (lo.size() > lo_head) {
      const Knot& last = lo.back();
      const Knot& prev = lo.size() - lo_head >= 2 ? lo[lo.size() - 2] : apex;
      if (turns_up(prev, last, p)) {
        lo.pop_back();
      } else {
        break;
      }
    }
    if (lo.size() == lo_head) {
      while (hi.size() > hi_head && slope_lt(apex, hi[hi_head], p)) {
        apex = hi[hi_head++];
        knots.push_back(apex);
      }
    }
    lo.push_back(p);
  };

  for (std::size_t i = 1; i <= n; ++i) {
    const double xi = static_cast<double>(i);
    if (i < n) {
      add_upper(Knot{xi, S[i] + w});
      add_lower(Knot{xi, S[i] - w});
    } else {
      add_upper(Knot{xi, S[n]});
      add_lower(Knot{xi, S[n]});
    }
  }

  // At most one chain still holds interior contacts; the string follows it
  // into the endpoint.
  if (hi.size() - hi_head > 1) {
    for (std::size_t k = hi_head; k < hi.size(); ++k) knots.push_back(hi[k]);
  } else if (lo.size() - lo_head > 1) {
    for (std::size_t k = lo_head; k < lo.size(); ++k) knots.push_back(lo[k]);
  } else {
    knots.push_back(Knot{static_cast<double>(n), S[n]});
  }

  for (std::size_t k = 1; k < knots.size(); ++k) {
    const double slope =
        (knots[k].y - knots[k - 1].y) / (knots[k].x - knots[k - 1].x);
    const auto a = static_cast<std::size_t>(knots[k - 1].x);
    const auto b = static_cast<std::size_t>(knots[k].x);
    for (std::size_t t = a; t < b; ++t) out[t] = slope;
  }
}

}  // namespace detail

std::vector<double> tv_prox(std::span<const double> x, double w) {
  std::vector<double> out;
  detail::TvWorkspace ws;
  detail::tv_prox_into(x, w, out, ws);
  return out;
}

std::vector<double> tv_prox_oracle(std::span<const double> x, double w) {
  const std::size_t n = x.size();
  if (n > 12) {
    throw std::invalid_argument("tv_prox_oracle: refuses n > 12");
  }
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw std::invalid_argument("tv_prox_oracle: weight must be finite and >= 0");
  }
  std::vector<double> best(x.begin(), x.end());
  if (n <= 1) return best;

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];

  const auto eval = [&](const std::vector<double>& u) {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = u[i] - x[i];
      obj += 0.5 * r * r;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) obj += w * std::abs(u[i + 1] - u[i]);
    return obj;
  };

  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<double> u(n);
  std::vector<std::size_t> starts;

  // Every segmentation (boundary bitmask), and for each the stationary
  // segment means under every jump sign pattern; the candidate built from the
  // optimal pattern is the exact minimizer, every other candidate is just a
  // valid upper bound.
  for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
    starts.clear();
    starts.push_back(0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (mask & (1u << i)) starts.push_back(i + 1);
    }
    starts.push_back(n);
    const std::size_t m = starts.size() - 1;
    const std::size_t jumps = m - 1;

    for (std::uint32_t sp = 0; sp < (1u << jumps); ++sp) {
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t a = starts[k], b = starts[k + 1];
        const double len = static_cast<double>(b - a);
        const double mean = (prefix[b] - prefix[a]) / len;
        const double s_prev =
            k == 0 ? 0.0 : ((sp & (1u << (k - 1))) ? 1.0 : -1.0);
        const double s_next =
            k == m - 1 ? 0.0 : ((sp & (1u << k)) ? 1.0 : -1.0);
        const double level = mean + w * (s_next - s_prev) / len;
        for (std::size_t t = a; t < b; ++t) u[t] = level;
      }
      const double obj = eval(u);
      if (obj < best_obj) {
        best_obj = obj;
        best = u;
      }
    }
  }
  return best;
}

}  // namespace qfuse
