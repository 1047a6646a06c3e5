#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <optional>

namespace aifdom {

using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Matrix = Eigen::MatrixXd;
using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;

/// States within this distance below zero still count as being in the
/// nonnegative orthant.
inline constexpr double kNegativeStateTolerance = 1e-9;

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] bool empty() const { return !(lo <= hi); }
  [[nodiscard]] bool degenerate() const { return lo == hi; }
  [[nodiscard]] bool contains(double v, double tol = 0.0) const {
    return v >= lo - tol && v <= hi + tol;
  }
  [[nodiscard]] double mid() const { return 0.5 * (lo + hi); }
  [[nodiscard]] double width() const { return hi - lo; }
};

/// Parameter values that override a model's nominal ones when evaluating a
/// Jacobian at a corner of an uncertainty box.
struct ParamPoint {
  /// Sequestration (binding) rate, replacing eta in the controller block.
  std::optional<double> eta;
  /// Local actuation slope d(theta1(u))/du, replacing the exact slope of the
  /// actuation map.
  std::optional<double> actuation_slope;
};

}  // namespace aifdom
