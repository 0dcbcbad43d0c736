// Independent reference computations used by the unit and acceptance tests.
// These deliberately avoid the library's own helpers.
#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "pass/experiment.hpp"

namespace oracle {

using cplx = std::complex<double>;

// (1/len) * integral_0^len 10^(-kappa0 x / 10) dx by the composite trapezoid
// rule with Richardson extrapolation.
inline double trapezoid_avg_gain(double kappa0_db, double len, int n = 4096) {
    auto f = [&](double x) { return std::pow(10.0, -kappa0_db * x / 10.0); };
    auto trap = [&](int pieces) {
        const double h = len / pieces;
        double s = 0.5 * (f(0) + f(len));
        for (int i = 1; i < pieces; ++i) s += f(i * h);
        return s * h;
    };
    const double coarse = trap(n), fine = trap(2 * n), finer = trap(4 * n);
    const double r1 = (4 * fine - coarse) / 3, r2 = (4 * finer - fine) / 3;
    return (16 * r2 - r1) / 15 / len;
}

// Maximizer of |H| over PA positions in [lo, hi]: coarse scan then repeated
// local refinement down to `resolution`.
inline double grid_best_pa(const pass::UePosition& ue, const pass::Scenario& sc, double lo,
                           double hi, double resolution) {
    auto gain = [&](double x) {
        const double dx = ue.x - x, dy = ue.y - sc.area_half_y;
        const double d = std::sqrt(dx * dx + dy * dy + sc.height * sc.height);
        return std::pow(10.0, -sc.kappa0_db_per_m * std::abs(x - lo) / 20.0) / d;
    };
    double step = (hi - lo) / 20000;
    double best = lo, bestv = -1;
    for (int i = 0; i <= 20000; ++i) {
        const double x = lo + i * step;
        if (gain(x) > bestv) bestv = gain(x), best = x;
    }
    while (step > resolution / 10) {
        const double a = std::max(lo, best - step), b = std::min(hi, best + step);
        step /= 100;
        for (double x = a; x <= b; x += step)
            if (gain(x) > bestv) bestv = gain(x), best = x;
    }
    return best;
}

// Gaussian elimination with partial pivoting on a copy.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const size_t n = b.size();
    for (size_t c = 0; c < n; ++c) {
        size_t p = c;
        for (size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        std::swap(a[p], a[c]);
        std::swap(b[p], b[c]);
        for (size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (size_t i = n; i-- > 0;) {
        double s = b[i];
        for (size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

// Plain-loop inner product u^H g.
inline cplx inner(const Eigen::MatrixXcd& u, int uc, const Eigen::MatrixXcd& g, int gc) {
    cplx s = 0;
    for (int r = 0; r < g.rows(); ++r) s += std::conj(u(r, uc)) * g(r, gc);
    return s;
}

inline double naive_sinr(const pass::BeamState& b, const pass::EffectiveChannel& e, int k) {
    double num = std::norm(inner(b.u, k, e.g, k) * b.v(k));
    double den = 0;
    for (int i = 0; i < e.g.cols(); ++i) {
        const cplx s = inner(b.u, k, e.g, i);
        if (i != k) den += std::norm(s * b.v(i));
        den += std::norm(s * b.w(i));
    }
    double un = 0;
    for (int r = 0; r < b.u.rows(); ++r) un += std::norm(b.u(r, k));
    den += e.noise * un;
    return un == 0 ? 0.0 : num / den;
}

// Sample mean of |z^H y - sum_k s_k|^2 with y = sum_k g_k (w_k s_k + v_k s'_k) + n,
// every UE transmitting the same computation symbol.
struct McEstimate {
    double mean, stderr_;
};

inline McEstimate monte_carlo_mse(const pass::BeamState& b, const pass::EffectiveChannel& e,
                                  long draws, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, std::sqrt(0.5));
    const int K = static_cast<int>(e.g.cols()), D = static_cast<int>(e.g.rows());
    const double nsd = std::sqrt(e.noise);
    Eigen::VectorXcd y(D);
    double sum = 0, sumsq = 0;
    for (long t = 0; t < draws; ++t) {
        const cplx s(n01(rng), n01(rng));
        y.setZero();
        for (int k = 0; k < K; ++k) {
            const cplx sp(n01(rng), n01(rng));
            y += e.g.col(k) * (b.w(k) * s + b.v(k) * sp);
        }
        for (int r = 0; r < D; ++r) y(r) += nsd * cplx(n01(rng), n01(rng));
        const double err = std::norm(b.z.dot(y) - s);
        sum += err;
        sumsq += err * err;
    }
    const double mean = sum / draws;
    const double var = sumsq / draws - mean * mean;
    return {mean, std::sqrt(var / draws)};
}

inline pass::BeamState random_beams(const pass::EffectiveChannel& e, double pmax, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0, 1);
    const int K = static_cast<int>(e.g.cols()), D = static_cast<int>(e.g.rows());
    pass::BeamState b;
    b.w.resize(K);
    b.v.resize(K);
    for (int k = 0; k < K; ++k) {
        const double share = u(rng), total = pmax * u(rng);
        b.w(k) = std::polar(std::sqrt(total * share), 6.283185307179586 * u(rng));
        b.v(k) = std::polar(std::sqrt(total * (1 - share)), 6.283185307179586 * u(rng));
    }
    b.z.resize(D);
    b.u.resize(D, K);
    double scale = 0;
    for (int k = 0; k < K; ++k) scale += e.g.col(k).norm();
    scale = K / scale / std::sqrt(pmax);
    for (int r = 0; r < D; ++r) {
        b.z(r) = scale * cplx(u(rng) - 0.5, u(rng) - 0.5);
        for (int k = 0; k < K; ++k) b.u(r, k) = scale * cplx(u(rng) - 0.5, u(rng) - 0.5);
    }
    return b;
}

// Minimizes f over a complex vector by coordinate sweeps on the real and
// imaginary parts with 41-point grids whose step shrinks fourfold once no
// coordinate improves, starting from zero.
template <class F>
double coordinate_grid_min(F&& f, Eigen::Index dim, double scale) {
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(dim);
    double best = f(x);
    for (double step = scale; step > scale * 1e-7; step /= 4) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (Eigen::Index r = 0; r < dim; ++r)
                for (const cplx dir : {cplx(1, 0), cplx(0, 1)}) {
                    const cplx keep = x(r);
                    cplx best_x = keep;
                    for (int i = -20; i <= 20; ++i) {
                        x(r) = keep + static_cast<double>(i) * step * dir;
                        const double val = f(x);
                        if (val < best - 1e-16) {
                            best = val;
                            best_x = x(r);
                            improved = true;
                        }
                    }
                    x(r) = best_x;
                }
        }
    }
    return best;
}

// Default scenario channel for a seeded UE draw.
inline pass::ChannelSet default_channels(const pass::Scenario& sc, std::uint64_t seed,
                                         std::vector<pass::UePosition>* ues_out = nullptr) {
    const auto ues = pass::draw_ues(sc, seed, 0);
    if (ues_out) *ues_out = ues;
    return pass::composite_channel(ues, pass::place_pas(ues, sc), sc);
}

}  // namespace oracle
