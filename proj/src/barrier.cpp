#include "pass/barrier.hpp"

#include <cmath>
#include <limits>

namespace pass {

namespace {

struct BarrierEval {
    double value;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};

// Returns false when t is outside the strict interior.
bool barrier_terms(const Eigen::MatrixXd& g, const Eigen::VectorXd& b, const Eigen::VectorXd& t,
                   BarrierEval& out) {
    const Eigen::Index n = t.size();
    out.value = 0.0;
    out.grad = Eigen::VectorXd::Zero(n);
    out.hess = Eigen::MatrixXd::Zero(n, n);
    const Eigen::VectorXd t2 = t.cwiseAbs2();
    for (Eigen::Index j = 0; j < g.rows(); ++j) {
        const double slack = b(j) - g.row(j).dot(t2);
        if (!(slack > 0)) return false;
        const Eigen::VectorXd dj = 2.0 * g.row(j).transpose().cwiseProduct(t);
        out.value -= std::log(slack);
        out.grad += dj / slack;
        out.hess += (dj * dj.transpose()) / (slack * slack);
        out.hess.diagonal() += 2.0 * g.row(j).transpose() / slack;
    }
    return true;
}

}  // namespace

Eigen::VectorXd minimize_quadratic_constrained(const ConvexObjective& obj,
                                               const Eigen::MatrixXd& g,
                                               const Eigen::VectorXd& b,
                                               const Eigen::VectorXd& start, double gap_tol) {
    const Eigen::Index n = start.size();
    const double rows = static_cast<double>(g.rows());
    Eigen::VectorXd t = start;
    Eigen::VectorXd og(n);
    Eigen::MatrixXd oh(n, n);
    BarrierEval bar;

    double weight = 1.0;
    auto merit = [&](const Eigen::VectorXd& x, bool& inside) {
        Eigen::VectorXd gg(n);
        Eigen::MatrixXd hh(n, n);
        BarrierEval be;
        inside = barrier_terms(g, b, x, be);
        if (!inside) return std::numeric_limits<double>::infinity();
        return weight * obj(x, gg, hh) + be.value;
    };

    for (int outer = 0; outer < 60; ++outer) {
        for (int it = 0; it < 100; ++it) {
            const double f = obj(t, og, oh);
            barrier_terms(g, b, t, bar);
            const Eigen::VectorXd grad = weight * og + bar.grad;
            const Eigen::MatrixXd hess = weight * oh + bar.hess;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
            Eigen::VectorXd step = -ldlt.solve(grad);
            if (!step.allFinite() || grad.dot(step) >= 0) step = -grad;
            const double decrement = -grad.dot(step);
            if (decrement / 2 <= 1e-10) break;
            const double current = weight * f + bar.value;
            double s = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls, s *= 0.5) {
                bool inside = false;
                const Eigen::VectorXd trial = t + s * step;
                const double m = merit(trial, inside);
                if (inside && m <= current - 0.25 * s * decrement) {
                    t = trial;
                    moved = current - m > 1e-13 * (1 + std::abs(current));
                    break;
                }
            }
            if (!moved) break;
        }
        if (rows / weight < gap_tol) break;
        weight *= 8.0;
    }
    return t;
}

}  // namespace pass
