#pragma once

#include <Eigen/Dense>

namespace pass {

// Relative pivot magnitude (against the largest entry of the matrix) below
// which a system is reported as singular.
inline constexpr double kPivotThreshold = 1e-12;

// Dense LU solve with partial pivoting; throws SingularMatrix on a tiny pivot.
Eigen::MatrixXcd solve_checked(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);
Eigen::MatrixXd solve_checked(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace pass
