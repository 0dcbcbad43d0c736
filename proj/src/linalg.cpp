#include "pass/linalg.hpp"

#include "pass/errors.hpp"

namespace pass {

namespace {

template <class Mat>
Mat solve_impl(const Mat& a, const Mat& b) {
    if (a.rows() != a.cols() || a.rows() != b.rows())
        throw DimensionMismatch("linear system shape mismatch");
    if (a.rows() == 0) return b;
    const double scale = a.cwiseAbs().maxCoeff();
    if (!(scale > 0)) throw SingularMatrix("zero matrix");
    Eigen::PartialPivLU<Mat> lu(a);
    const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(pivot > kPivotThreshold * scale)) throw SingularMatrix("pivot below threshold");
    return lu.solve(b);
}

}  // namespace

Eigen::MatrixXcd solve_checked(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return solve_impl(a, b);
}

Eigen::MatrixXd solve_checked(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return solve_impl(a, b);
}

}  // namespace pass
