#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pass/errors.hpp"
#include "pass/mse_solver.hpp"

using namespace pass;

namespace {

struct Instance {
    Scenario sc;
    EffectiveChannel eff;
};

Instance make(std::uint64_t seed, Protocol p, int segments = 8, int ues = 4) {
    Instance in;
    in.sc.num_segments = segments;
    in.sc.num_ues = ues;
    const ChannelSet h = oracle::default_channels(in.sc, seed);
    in.eff = effective_channel(h, {p, strongest_segment(h)}, in.sc);
    return in;
}

BeamState with_receivers(BeamState b, const EffectiveChannel& eff) {
    const Receivers rx = mmse_receivers(b, eff);
    b.z = rx.z;
    b.u = rx.u;
    return b;
}

double grid_min_mse(BeamState b, const EffectiveChannel& eff, double scale) {
    return oracle::coordinate_grid_min(
        [&](const Eigen::VectorXcd& z) {
            b.z = z;
            return mse_eval(b, eff);
        },
        b.z.size(), scale);
}

}  // namespace

TEST_CASE("computation receiver vanishes without computation power") {
    const Instance in = make(1, Protocol::SM);
    BeamState b = initial_beams(in.eff, in.sc);
    b.w.setZero();
    CHECK(mmse_receivers(b, in.eff).z.norm() == 0.0);
}

TEST_CASE("computation receiver shrinks as noise grows") {
    Instance in = make(2, Protocol::SS);
    const BeamState b = initial_beams(in.eff, in.sc);
    double last = mmse_receivers(b, in.eff).z.norm();
    for (int i = 0; i < 12; ++i) {
        in.eff.noise *= 10;
        const double now = mmse_receivers(b, in.eff).z.norm();
        CHECK(now < last);
        last = now;
    }
    CHECK(last < 1e-3);
}

TEST_CASE("receivers against a grid search and the stationarity condition") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 5; ++t) {
        const Instance in = make(200 + t, Protocol::SM, 3, 2);
        const BeamState b = with_receivers(oracle::random_beams(in.eff, in.sc.p_max_watts, rng), in.eff);
        const double closed = mse_eval(b, in.eff);
        const double grid = grid_min_mse(b, in.eff, b.z.cwiseAbs().maxCoeff());
        CHECK(closed <= grid + 1e-12);
        CHECK(grid - closed <= 1e-4);

        const Eigen::VectorXd total = b.w.cwiseAbs2() + b.v.cwiseAbs2();
        const Eigen::MatrixXcd omega = in.eff.g * total.cast<cplx>().asDiagonal() * in.eff.g.adjoint() +
                                       in.eff.noise * Eigen::MatrixXcd::Identity(3, 3);
        for (int k = 0; k < 2; ++k) {
            const Eigen::VectorXcd res = omega * b.u.col(k) - in.eff.g.col(k) * b.v(k);
            CHECK(res.norm() <= 1e-10 * (in.eff.g.col(k) * b.v(k)).norm());
        }
    }
}

TEST_CASE("perturbing the computation receiver never lowers the MSE") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> n01;
    const Protocol kinds[] = {Protocol::SS, Protocol::SA, Protocol::SM};
    for (int t = 0; t < 100; ++t) {
        const Instance in = make(300 + t, kinds[t % 3]);
        const BeamState b = with_receivers(oracle::random_beams(in.eff, in.sc.p_max_watts, rng), in.eff);
        const double base = mse_eval(b, in.eff);
        Eigen::VectorXcd dir(b.z.size());
        for (auto& c : dir) c = cplx(n01(rng), n01(rng));
        BeamState p = b;
        p.z += 1e-3 * b.z.norm() * dir / dir.norm();
        CHECK(mse_eval(p, in.eff) >= base - 1e-14);
    }
}

TEST_CASE("sensing MSE at the MMSE receiver equals 1 / (1 + SINR)") {
    std::mt19937_64 rng(14);
    for (int t = 0; t < 30; ++t) {
        const Instance in = make(400 + t, t % 2 ? Protocol::SM : Protocol::SA);
        const BeamState b = with_receivers(oracle::random_beams(in.eff, in.sc.p_max_watts, rng), in.eff);
        const Eigen::VectorXd a = sensing_mse(b, in.eff), s = sinr_eval(b, in.eff);
        for (int k = 0; k < in.eff.users(); ++k) CHECK(std::abs(a(k) * (1 + s(k)) - 1) <= 1e-9);
    }
}

TEST_CASE("rate system: single UE closed form") {
    const Instance in = make(5, Protocol::SS, 8, 1);
    SolverConfig cfg = default_solver_config(in.sc);
    const BeamState b = with_receivers(initial_beams(in.eff, in.sc), in.eff);
    const Receivers rx{b.z, b.u};
    const double gamma = cfg.rate_targets(0);
    const cplx ug = b.u.col(0).dot(in.eff.g.col(0));
    const double expect = gamma * (std::norm(ug * b.w(0)) + in.eff.noise * b.u.col(0).squaredNorm()) / std::norm(ug);
    CHECK(rate_power_system(b, in.eff, rx, in.sc, cfg).powers(0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("rate system: no targets means no sensing power") {
    const Instance in = make(6, Protocol::SM);
    SolverConfig cfg;
    cfg.rate_targets = Eigen::VectorXd::Zero(in.sc.num_ues);
    const BeamState b = with_receivers(initial_beams(in.eff, in.sc), in.eff);
    CHECK(rate_power_system(b, in.eff, {b.z, b.u}, in.sc, cfg).powers.norm() == 0.0);
}

TEST_CASE("rate system matches Gaussian elimination and meets targets") {
    for (int t = 0; t < 10; ++t) {
        const Instance in = make(500 + t, Protocol::SM, 8, 3);
        SolverConfig cfg = default_solver_config(in.sc);
        const BeamState b = with_receivers(initial_beams(in.eff, in.sc), in.eff);
        const Eigen::VectorXd p = rate_power_system(b, in.eff, {b.z, b.u}, in.sc, cfg).powers;

        std::vector<std::vector<double>> a(3, std::vector<double>(3));
        std::vector<double> rhs(3);
        for (int k = 0; k < 3; ++k) {
            double un = 0;
            for (int r = 0; r < b.u.rows(); ++r) un += std::norm(b.u(r, k));
            rhs[k] = in.eff.noise * un;
            for (int i = 0; i < 3; ++i) {
                const double c = std::norm(oracle::inner(b.u, k, in.eff.g, i));
                rhs[k] += c * std::norm(b.w(i));
                a[k][i] = i == k ? c / cfg.rate_targets(k) : -c;
            }
        }
        const auto ref = oracle::gauss_solve(a, rhs);
        for (int k = 0; k < 3; ++k) CHECK(std::abs(p(k) - ref[k]) <= 1e-10 * std::abs(ref[k]));

        BeamState fixed = b;
        for (int k = 0; k < 3; ++k) fixed.v(k) = std::sqrt(p(k)) * b.v(k) / std::abs(b.v(k));
        fixed.u = sensing_directions(b, in.eff) * fixed.v.asDiagonal();
        // The receive beams are held at the old ones' directions.
        for (int k = 0; k < 3; ++k) fixed.u.col(k) = b.u.col(k);
        const Eigen::VectorXd s = sinr_eval(fixed, in.eff);
        for (int k = 0; k < 3; ++k) CHECK(s(k) == doctest::Approx(cfg.rate_targets(k)).epsilon(1e-9));
    }
}

TEST_CASE("infeasible rate targets follow the policy") {
    Instance in = make(7, Protocol::SS);
    SolverConfig cfg;
    cfg.rate_targets = Eigen::VectorXd::Constant(in.sc.num_ues, 5.0);
    const BeamState b = with_receivers(initial_beams(in.eff, in.sc), in.eff);
    cfg.infeasibility_policy = InfeasibilityPolicy::Error;
    CHECK_THROWS_AS(rate_power_system(b, in.eff, {b.z, b.u}, in.sc, cfg), InfeasibleRates);
    CHECK_THROWS_AS(ao_mmse(initial_beams(in.eff, in.sc), in.eff, in.sc, cfg), InfeasibleRates);
    cfg.infeasibility_policy = InfeasibilityPolicy::ClampToPower;
    const auto res = rate_power_system(b, in.eff, {b.z, b.u}, in.sc, cfg);
    bool any_flag = false;
    for (int k = 0; k < in.sc.num_ues; ++k) {
        CHECK(res.powers(k) >= 0);
        CHECK(res.powers(k) <= in.sc.p_max_watts);
        any_flag = any_flag || !res.feasible[k];
    }
    CHECK(any_flag);
    const SolverReport rep = ao_mmse(initial_beams(in.eff, in.sc), in.eff, in.sc, cfg);
    bool all = true;
    for (bool f : rep.rate_feasible) all = all && f;
    CHECK_FALSE(all);
}

TEST_CASE("transmit block is power feasible and phase aligned") {
    Scenario sc;
    sc.num_segments = 1;
    sc.num_ues = 1;
    ChannelSet h(1, 1);
    h << cplx(2e-4, 0.0);
    const EffectiveChannel eff = effective_channel(h, {Protocol::SS, 0}, sc);
    const SolverConfig cfg = default_solver_config(sc);
    const BeamState b = with_receivers(initial_beams(eff, sc), eff);
    const TransmitResult tr = transmit_update(b, eff, {b.z, b.u}, sc, cfg);
    CHECK(std::abs(tr.beams.w(0).imag()) <= 1e-12 * std::abs(tr.beams.w(0)));
    CHECK(tr.beams.w(0).real() > 0);
    CHECK(tr.beams.v(0).real() > 0);
    CHECK(std::norm(tr.beams.w(0)) + std::norm(tr.beams.v(0)) <= sc.p_max_watts * (1 + 1e-9));
}

TEST_CASE("transmit block beats random feasible transmit choices") {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(0, 1);
    const Protocol kinds[] = {Protocol::SS, Protocol::SA, Protocol::SM};
    for (int t = 0; t < 6; ++t) {
        const Instance in = make(600 + t, kinds[t % 3]);
        const SolverConfig cfg = default_solver_config(in.sc);
        const BeamState b = with_receivers(initial_beams(in.eff, in.sc), in.eff);
        const TransmitResult tr = transmit_update(b, in.eff, {b.z, b.u}, in.sc, cfg);
        // The vector receiver form also refreshes z, so judge it with MMSE z.
        const double ours = in.eff.dims() > 1 ? mse_eval(with_receivers(tr.beams, in.eff), in.eff)
                                              : mse_eval(tr.beams, in.eff);
        for (int k = 0; k < in.sc.num_ues; ++k)
            CHECK(std::norm(tr.beams.w(k)) + std::norm(tr.beams.v(k)) <= in.sc.p_max_watts * (1 + 1e-9));

        const RatePowerSystem sys = build_rate_system(sensing_directions(b, in.eff), in.eff, cfg.rate_targets);
        const Eigen::VectorXcd proj = in.eff.g.adjoint() * b.z;
        int tried = 0;
        for (int s = 0; s < 10000; ++s) {
            Eigen::VectorXd t2(in.sc.num_ues);
            for (int k = 0; k < in.sc.num_ues; ++k) t2(k) = in.sc.p_max_watts * u(rng);
            const Eigen::VectorXd p = sensing_powers(sys, t2);
            if ((t2 + p).maxCoeff() > in.sc.p_max_watts) continue;
            ++tried;
            BeamState c = b;
            for (int k = 0; k < in.sc.num_ues; ++k) {
                const double ph = in.eff.dims() > 1 ? 6.283185307179586 * u(rng) : std::arg(proj(k));
                c.w(k) = std::polar(std::sqrt(t2(k)), ph);
                c.v(k) = std::sqrt(p(k));
            }
            c.z = mmse_receivers(c, in.eff).z;
            if (in.eff.dims() == 1) {
                // Same receive direction as the block, best gain along it.
                c.z = b.z * (std::abs(c.z(0)) / std::abs(b.z(0)));
            }
            CHECK(ours <= mse_eval(c, in.eff) + 1e-12);
        }
        CHECK(tried > 100);
    }
}

TEST_CASE("AO-MMSE: infinite tolerance stops after one iteration") {
    const Instance in = make(8, Protocol::SA);
    SolverConfig cfg = default_solver_config(in.sc);
    cfg.tol_rel = std::numeric_limits<double>::infinity();
    const SolverReport rep = ao_mmse(initial_beams(in.eff, in.sc), in.eff, in.sc, cfg);
    CHECK(rep.iterations_used == 1);
    CHECK(rep.converged);
}

TEST_CASE("AO-MMSE descends monotonically and converges quickly") {
    const Protocol kinds[] = {Protocol::SS, Protocol::SA, Protocol::SM};
    for (Protocol p : kinds)
        for (int t = 0; t < 15; ++t) {
            const Instance in = make(700 + t, p);
            const SolverConfig cfg = default_solver_config(in.sc);
            const SolverReport rep = ao_mmse(initial_beams(in.eff, in.sc), in.eff, in.sc, cfg);
            for (size_t i = 1; i < rep.mse_trace.size(); ++i)
                CHECK(rep.mse_trace[i] <= rep.mse_trace[i - 1] + 1e-9);
            CHECK(rep.converged);
            CHECK(rep.iterations_used <= 25);
            CHECK(rep.sensing_identity_residual <= 1e-9);
            CHECK(mse_eval(rep.final_beams, in.eff) <= rep.mse_trace.back() + 1e-12);
            for (int k = 0; k < in.sc.num_ues; ++k) {
                CHECK(rep.rate_feasible[k]);
                const double used = std::norm(rep.final_beams.w(k)) + std::norm(rep.final_beams.v(k));
                CHECK(used <= in.sc.p_max_watts * (1 + 1e-9));
            }
        }
}

TEST_CASE("AO-MMSE without rate targets uses no sensing power") {
    const Instance in = make(9, Protocol::SM);
    SolverConfig cfg;
    cfg.rate_targets = Eigen::VectorXd::Zero(in.sc.num_ues);
    const SolverReport rep = ao_mmse(initial_beams(in.eff, in.sc), in.eff, in.sc, cfg);
    CHECK(rep.final_beams.v.norm() == 0.0);
    CHECK(rep.converged);
}
