#pragma once

#include <Eigen/Dense>

namespace declab {

/// Least-squares line y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

/// Fits a line through (x_i, y_i); requires at least two distinct x values.
template <typename Scalar>
LineFit fit_line(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> design(x.size(), 2);
  design.col(0).setOnes();
  design.col(1) = x;
  const Eigen::Matrix<Scalar, 2, 1> coef = design.colPivHouseholderQr().solve(y);
  const auto residual = (design * coef - y).eval();
  LineFit fit;
  fit.intercept = static_cast<double>(coef(0));
  fit.slope = static_cast<double>(coef(1));
  fit.rms_residual =
      x.size() > 0 ? static_cast<double>(std::sqrt(residual.squaredNorm() / Scalar(x.size()))) : 0.0;
  return fit;
}

}  // namespace declab
