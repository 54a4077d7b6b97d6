#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace qfuse {

/// Observed one-dimensional series Y_1..Y_n. Validates on construction:
/// at least two observations, all finite.
class Signal {
 public:
  explicit Signal(std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t n() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

/// Quantile level tau, strictly inside (0,1).
class QuantileSpec {
 public:
  explicit QuantileSpec(double tau);

  double tau() const noexcept { return tau_; }

 private:
  double tau_;
};

/// Sorted 1-based segment-start indices. Index t means the fitted (or true)
/// level changes between positions t-1 and t, so every index lies in {2..n}.
class ChangePointSet {
 public:
  ChangePointSet() = default;
  ChangePointSet(std::vector<std::size_t> indices, std::size_t n);

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  std::size_t signal_length() const noexcept { return n_; }

 private:
  std::vector<std::size_t> indices_;
  std::size_t n_ = 0;
};

/// Result of solving the penalized quantile fit (or the L2 baseline).
/// u_hat is exactly piecewise constant; levels holds the per-segment values
/// in order, so levels.size() == changepoints.size() + 1.
struct PiecewiseFit {
  std::vector<double> u_hat;
  ChangePointSet changepoints;
  std::vector<double> levels;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

enum class ErrorLaw { normal, student3, cauchy };

/// Ground-truth piecewise-constant model on a relative (0,1) time scale.
/// Integer break positions are derived as floor(rel_break * n) + 1, the
/// first index carrying the new segment level.
struct Scenario {
  std::vector<double> rel_breaks;
  std::vector<double> seg_levels;
  std::size_t n = 0;
  ErrorLaw error_law = ErrorLaw::normal;

  /// Two breaks at 0.2 and 0.7 with segment levels 0, 2, 1.
  static Scenario sim1(std::size_t n, ErrorLaw law);

  void validate() const;
  std::vector<std::size_t> break_indices() const;
};

}  // namespace qfuse
