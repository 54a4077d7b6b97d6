#include "qfuse/distributions.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qfuse {

namespace {

constexpr double kPi = std::numbers::pi;

void require_open_unit(double p, const char* who) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument(std::string(who) + ": p must lie strictly in (0,1)");
  }
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

// Acklam's rational approximation of the standard normal quantile
// (absolute error ~1.15e-9 before refinement).
double normal_icdf_approx(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  constexpr double p_high = 1.0 - p_low;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > p_high) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double t3_pdf(double x) {
  const double s = 3.0 + x * x;
  return 6.0 * std::sqrt(3.0) / (kPi * s * s);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_icdf(double p) {
  require_open_unit(p, "normal_icdf");
  double x = normal_icdf_approx(p);
  const double pdf = normal_pdf(x);
  if (pdf > 1e-300) {
    x -= (normal_cdf(x) - p) / pdf;
  }
  return x;
}

double t3_cdf(double x) {
  return 0.5 + (std::atan(x / std::sqrt(3.0)) +
                std::sqrt(3.0) * x / (x * x + 3.0)) / kPi;
}

double t3_icdf(double p) {
  require_open_unit(p, "t3_icdf");
  // Expand a bracket around a Cauchy-shaped start, then safeguarded Newton.
  double x = std::tan(kPi * (p - 0.5));
  double lo = x, hi = x;
  double step = 1.0 + std::abs(x);
  while (t3_cdf(lo) > p) lo -= step, step *= 2.0;
  step = 1.0 + std::abs(x);
  while (t3_cdf(hi) < p) hi += step, step *= 2.0;
  x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double err = t3_cdf(x) - p;
    if (err > 0.0) {
      hi = x;
    } else if (err < 0.0) {
      lo = x;
    } else {
      return x;
    }
    double next = x - err / t3_pdf(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-12 * (1.0 + std::abs(next))) {
      return next;
    }
    x = next;
  }
  return x;
}

double cauchy_cdf(double x) { return 0.5 + std::atan(x) / kPi; }

double cauchy_icdf(double p) {
  require_open_unit(p, "cauchy_icdf");
  return std::tan(kPi * (p - 0.5));
}

double law_icdf(ErrorLaw law, double p) {
  switch (law) {
    case ErrorLaw::normal: return normal_icdf(p);
    case ErrorLaw::student3: return t3_icdf(p);
    case ErrorLaw::cauchy: return cauchy_icdf(p);
  }
  throw std::invalid_argument("law_icdf: unknown error law");
}

double law_cdf(ErrorLaw law, double x) {
  switch (law) {
    case ErrorLaw::normal: return normal_cdf(x);
    case ErrorLaw::student3: return t3_cdf(x);
    case ErrorLaw::cauchy: return cauchy_cdf(x);
  }
  throw std::invalid_argument("law_cdf: unknown error law");
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t rep_index) {
  return mix64(mix64(master_seed) ^
               (rep_index * 0x9e3779b97f4a7c15ULL + 0xd1b54a32d192ed03ULL));
}

double uniform01(std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t bits = mix64(stream ^ mix64(index));
  // 53-bit midpoint mapping keeps draws strictly inside (0,1).
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

std::vector<double> sample_errors(ErrorLaw law, std::size_t n,
                                  std::uint64_t stream) {
  if (n < 1) throw std::invalid_argument("sample_errors: n must be >= 1");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = law_icdf(law, uniform01(stream, i));
  }
  return out;
}

}  // namespace qfuse
