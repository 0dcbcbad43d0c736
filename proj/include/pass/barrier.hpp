#pragma once

#include <functional>

#include <Eigen/Dense>

namespace pass {

// Smooth convex objective: returns the value and fills gradient and Hessian.
using ConvexObjective =
    std::function<double(const Eigen::VectorXd& t, Eigen::VectorXd& grad, Eigen::MatrixXd& hess)>;

// Minimizes `obj` over t subject to sum_i g(j, i) * t_i^2 <= b(j) for every
// row j, with g >= 0 and b > 0, by a log-barrier interior-point method.
// `start` must be strictly feasible. Stops once the duality gap bound falls
// below `gap_tol`.
Eigen::VectorXd minimize_quadratic_constrained(const ConvexObjective& obj,
                                               const Eigen::MatrixXd& g,
                                               const Eigen::VectorXd& b,
                                               const Eigen::VectorXd& start,
                                               double gap_tol = 1e-12);

}  // namespace pass
