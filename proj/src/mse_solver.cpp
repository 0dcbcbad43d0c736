#include "pass/mse_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pass/barrier.hpp"
#include "pass/errors.hpp"
#include "pass/linalg.hpp"

namespace pass {

namespace {

Eigen::VectorXd power_budgets(const Scenario& sc, int users) {
    return Eigen::VectorXd::Constant(users, sc.p_max_watts);
}

Eigen::VectorXd targets_for(const SolverConfig& cfg, int users) {
    if (cfg.rate_targets.size() == 0) return Eigen::VectorXd::Zero(users);
    if (cfg.rate_targets.size() != users) throw DimensionMismatch("one rate target per UE");
    return cfg.rate_targets;
}

cplx unit_phase(cplx x, cplx fallback) {
    const double mag = std::abs(x);
    return mag > 0 ? x / mag : fallback;
}

// Unit phasor of an existing coefficient, or 1 when it is zero.
cplx phase_of(cplx x) { return unit_phase(x, cplx(1.0, 0.0)); }

Eigen::MatrixXcd noise_identity(const EffectiveChannel& eff) {
    return eff.noise * Eigen::MatrixXcd::Identity(eff.dims(), eff.dims());
}

double worst_identity_residual(const BeamState& beams, const EffectiveChannel& eff) {
    const Eigen::VectorXd a = sensing_mse(beams, eff);
    const Eigen::VectorXd s = sinr_eval(beams, eff);
    double worst = 0.0;
    for (int k = 0; k < eff.users(); ++k) {
        if (beams.v(k) == cplx(0.0)) continue;
        worst = std::max(worst, std::abs(a(k) * (1.0 + s(k)) - 1.0));
    }
    return worst;
}

}  // namespace

SolverConfig default_solver_config(const Scenario& sc) {
    SolverConfig cfg;
    const double gamma = std::exp2(sc.rate_min_bps_hz) - 1.0;
    cfg.rate_targets = Eigen::VectorXd::Constant(sc.num_ues, gamma);
    return cfg;
}

BeamState initial_beams(const EffectiveChannel& eff, const Scenario& sc) {
    const int K = eff.users();
    BeamState b;
    b.w.resize(K);
    b.v.resize(K);
    const double amp = std::sqrt(sc.p_max_watts / 2.0);
    for (int k = 0; k < K; ++k) {
        const cplx rot = std::conj(phase_of(eff.g.col(k).sum()));
        b.w(k) = amp * rot;
        b.v(k) = amp * rot;
    }
    b.z = Eigen::VectorXcd::Zero(eff.dims());
    b.u = Eigen::MatrixXcd::Zero(eff.dims(), K);
    return b;
}

Eigen::MatrixXcd sensing_directions(const BeamState& beams, const EffectiveChannel& eff) {
    const Eigen::VectorXd total = beams.w.cwiseAbs2() + beams.v.cwiseAbs2();
    const Eigen::MatrixXcd omega =
        eff.g * total.cast<cplx>().asDiagonal() * eff.g.adjoint() + noise_identity(eff);
    return solve_checked(omega, eff.g);
}

Receivers mmse_receivers(const BeamState& beams, const EffectiveChannel& eff) {
    if (beams.w.size() != eff.users() || beams.v.size() != eff.users())
        throw DimensionMismatch("transmit beams need one entry per UE");
    const Eigen::VectorXcd a = eff.g * beams.w;
    const Eigen::VectorXd sense = beams.v.cwiseAbs2();
    const Eigen::MatrixXcd r = a * a.adjoint() +
                               eff.g * sense.cast<cplx>().asDiagonal() * eff.g.adjoint() +
                               noise_identity(eff);
    Receivers rx;
    rx.z = solve_checked(r, a);
    rx.u = sensing_directions(beams, eff) * beams.v.asDiagonal();
    return rx;
}

RatePowerSystem build_rate_system(const Eigen::MatrixXcd& directions, const EffectiveChannel& eff,
                                  const Eigen::VectorXd& targets) {
    const int K = eff.users();
    RatePowerSystem sys;
    sys.coupling = (directions.adjoint() * eff.g).cwiseAbs2();
    sys.noise = eff.noise * directions.colwise().squaredNorm().transpose();
    sys.targets = targets;
    sys.inverse = Eigen::MatrixXd::Zero(K, K);

    std::vector<int> active;
    for (int k = 0; k < K; ++k)
        if (targets(k) > 0) active.push_back(k);
    const auto n = static_cast<Eigen::Index>(active.size());
    if (n == 0) return sys;

    Eigen::MatrixXd a(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) {
            const double gain = sys.coupling(active[r], active[c]);
            a(r, c) = r == c ? gain / targets(active[r]) : -gain;
        }
    Eigen::MatrixXd inv;
    try {
        inv = solve_checked(a, Eigen::MatrixXd::Identity(n, n));
    } catch (const SingularMatrix&) {
        sys.solvable = false;
        return sys;
    }
    // Nonnegative powers for every right-hand side need a nonnegative inverse.
    if (inv.minCoeff() < -1e-9 * inv.cwiseAbs().maxCoeff()) sys.solvable = false;
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            sys.inverse(active[r], active[c]) = std::max(inv(r, c), 0.0);
    return sys;
}

Eigen::VectorXd sensing_powers(const RatePowerSystem& sys, const Eigen::VectorXd& comp_powers) {
    return sys.inverse * (sys.noise + sys.coupling * comp_powers);
}

RatePowerResult rate_power_system(const BeamState& beams, const EffectiveChannel& eff,
                                  const Receivers& rx, const Scenario& sc,
                                  const SolverConfig& cfg) {
    const int K = eff.users();
    Eigen::MatrixXcd dirs = rx.u;
    bool degenerate = dirs.cols() != K || dirs.rows() != eff.dims();
    for (int k = 0; !degenerate && k < K; ++k) degenerate = dirs.col(k).squaredNorm() == 0.0;
    if (degenerate) dirs = sensing_directions(beams, eff);

    const Eigen::VectorXd targets = targets_for(cfg, K);
    const RatePowerSystem sys = build_rate_system(dirs, eff, targets);
    RatePowerResult out;
    out.feasible.assign(static_cast<size_t>(K), true);
    const Eigen::VectorXd budget = power_budgets(sc, K);
    out.powers = sys.solvable ? sensing_powers(sys, beams.w.cwiseAbs2())
                              : Eigen::VectorXd(budget);
    for (int k = 0; k < K; ++k) {
        if (targets(k) <= 0) continue;
        const double p = out.powers(k);
        if (!sys.solvable || p < 0 || p > budget(k)) {
            if (cfg.infeasibility_policy == InfeasibilityPolicy::Error)
                throw InfeasibleRates("sensing power for UE " + std::to_string(k) +
                                      " outside [0, P_max]");
            out.feasible[static_cast<size_t>(k)] = false;
            out.powers(k) = std::clamp(p, 0.0, budget(k));
        }
    }
    return out;
}

TransmitResult transmit_update(const BeamState& beams, const EffectiveChannel& eff,
                               const Receivers& rx, const Scenario& sc, const SolverConfig& cfg) {
    const int K = eff.users();
    const Eigen::VectorXd budget = power_budgets(sc, K);
    const Eigen::VectorXd targets = targets_for(cfg, K);
    const Eigen::MatrixXcd dirs = sensing_directions(beams, eff);
    const RatePowerSystem sys = build_rate_system(dirs, eff, targets);

    const Eigen::VectorXcd proj = eff.g.adjoint() * rx.z;  // conj(z^H g_k)
    const Eigen::VectorXd gain = proj.cwiseAbs();
    const Eigen::VectorXd gain2 = gain.cwiseAbs2();
    const double rx_noise = eff.noise * rx.z.squaredNorm();

    TransmitResult out;
    out.beams = beams;
    Eigen::VectorXd t(K), p(K);

    const Eigen::VectorXd p0 = sys.inverse * sys.noise;
    const Eigen::MatrixXd spread = sys.inverse * sys.coupling;
    const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(K, K) + spread;
    const Eigen::VectorXd b = budget - p0;
    const bool solvable = sys.solvable && b.minCoeff() > 0;

    if (!solvable) {
        if (cfg.infeasibility_policy == InfeasibilityPolicy::Error)
            throw InfeasibleRates("rate targets cannot be met within the power budget");
        out.feasible = false;
        const Eigen::VectorXd raw =
            sys.solvable ? sensing_powers(sys, beams.w.cwiseAbs2()) : Eigen::VectorXd(budget);
        for (int k = 0; k < K; ++k) {
            p(k) = targets(k) > 0 ? std::clamp(raw(k), 0.0, budget(k)) : 0.0;
            t(k) = std::min(std::abs(beams.w(k)), std::sqrt(budget(k) - p(k)));
        }
    } else if (gain.maxCoeff() == 0.0) {
        t = beams.w.cwiseAbs();
        p = sensing_powers(sys, t.cwiseAbs2());
    } else {
        // Work in amplitudes normalized by the budget, constraint rows scaled to 1.
        const Eigen::VectorXd root = budget.cwiseSqrt();
        const Eigen::VectorXd a = gain.cwiseProduct(root);
        const Eigen::VectorXd d = (spread.transpose() * gain2).cwiseProduct(budget);
        const double q0 = gain2.dot(p0) + rx_noise;
        Eigen::MatrixXd gn = g * budget.asDiagonal();
        for (int j = 0; j < K; ++j) gn.row(j) /= b(j);
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(K);

        auto ratio = [&](const Eigen::VectorXd& x) {
            return a.dot(x) / std::sqrt(d.dot(x.cwiseAbs2()) + q0);
        };
        auto strictly_inside = [&](const Eigen::VectorXd& x) {
            return (gn * x.cwiseAbs2()).maxCoeff() < 1.0;
        };

        Eigen::VectorXd x = Eigen::VectorXd::Constant(K, std::sqrt(0.5 / gn.rowwise().sum().maxCoeff()));
        const Eigen::VectorXd current = 0.9 * beams.w.cwiseAbs().cwiseQuotient(root);
        if (strictly_inside(current) && ratio(current) > ratio(x)) x = current;

        double lambda = ratio(x);
        for (int round = 0; round < 60; ++round) {
            const double lam = lambda;
            ConvexObjective obj = [&](const Eigen::VectorXd& y, Eigen::VectorXd& grad,
                                      Eigen::MatrixXd& hess) {
                const Eigen::VectorXd dy = d.cwiseProduct(y);
                const double q = d.dot(y.cwiseAbs2()) + q0;
                const double sq = std::sqrt(q);
                grad = -a + lam * dy / sq;
                hess = lam * (Eigen::MatrixXd(d.asDiagonal()) / sq - dy * dy.transpose() / (q * sq));
                return -a.dot(y) + lam * sq;
            };
            const Eigen::VectorXd next = minimize_quadratic_constrained(obj, gn, ones, x);
            const double r = ratio(next);
            if (!(r > lambda * (1 + 1e-13))) {
                if (r >= lambda) x = next;
                break;
            }
            x = next;
            lambda = r;
        }
        t = x.cwiseAbs().cwiseProduct(root);
        p = sensing_powers(sys, t.cwiseAbs2());
    }

    for (int k = 0; k < K; ++k) {
        if (targets(k) <= 0) p(k) = 0.0;
        p(k) = std::clamp(p(k), 0.0, budget(k));
        t(k) = std::min(t(k), std::sqrt(std::max(budget(k) - p(k), 0.0)));
        out.beams.w(k) = t(k) * unit_phase(proj(k), phase_of(beams.w(k)));
        out.beams.v(k) = std::sqrt(p(k)) * phase_of(beams.v(k));
    }

    if (eff.dims() > 1) {
        // With a vector receiver the computation phases interact; raise the
        // quadratic form a^H Q^-1 a over unit phasors, then take the MMSE beam.
        const Eigen::MatrixXcd cov =
            eff.g * p.cast<cplx>().asDiagonal() * eff.g.adjoint() + noise_identity(eff);
        const Eigen::MatrixXcd scaled = eff.g * t.cast<cplx>().asDiagonal();
        const Eigen::MatrixXcd form = scaled.adjoint() * solve_checked(cov, scaled);
        Eigen::VectorXcd phi(K);
        for (int k = 0; k < K; ++k) phi(k) = phase_of(out.beams.w(k));
        double value = std::real(phi.dot(form * phi));
        for (int round = 0; round < 1000; ++round) {
            const Eigen::VectorXcd m = form * phi;
            for (int k = 0; k < K; ++k) phi(k) = phase_of(m(k));
            const double next = std::real(phi.dot(form * phi));
            const bool done = next <= value * (1 + 1e-15);
            value = next;
            if (done) break;
        }
        for (int k = 0; k < K; ++k) out.beams.w(k) = t(k) * phi(k);
        out.beams.z = mmse_receivers(out.beams, eff).z;
        out.beams.u = dirs * out.beams.v.asDiagonal();
        return out;
    }

    // Best gain for the fixed receive direction.
    const double signal = gain.dot(t);
    const double q = gain2.dot(p) + rx_noise;
    const double scale = signal > 0 ? signal / (signal * signal + q) : 1.0;
    out.beams.z = scale * rx.z;
    out.beams.u = dirs * out.beams.v.asDiagonal();
    return out;
}

namespace {

// MSE with the MMSE computation beam, 1 / (1 + a^H Q^-1 a).
double mse_at_best_receiver(const Eigen::VectorXcd& w, const Eigen::VectorXd& p,
                            const EffectiveChannel& eff) {
    const Eigen::VectorXcd a = eff.g * w;
    const Eigen::MatrixXcd q =
        eff.g * p.cast<cplx>().asDiagonal() * eff.g.adjoint() + noise_identity(eff);
    const double form = std::real(a.dot(Eigen::LLT<Eigen::MatrixXcd>(q).solve(a)));
    return 1.0 / (1.0 + form);
}

// One sweep of exact line searches over each UE's computation power, phases
// fixed, sensing powers tied through the rate system and the computation
// beam re-solved at every point. Returns the new MSE.
double coordinate_power_sweep(BeamState& beams, const RatePowerSystem& sys,
                              const EffectiveChannel& eff, const Scenario& sc) {
    const int K = eff.users();
    Eigen::VectorXd y = beams.w.cwiseAbs2();
    Eigen::VectorXcd phase(K);
    for (int k = 0; k < K; ++k) phase(k) = phase_of(beams.w(k));
    const Eigen::VectorXd budget = Eigen::VectorXd::Constant(K, sc.p_max_watts);
    const Eigen::MatrixXd spread = sys.inverse * sys.coupling;
    const Eigen::VectorXd p0 = sys.inverse * sys.noise;

    auto powers = [&](const Eigen::VectorXd& yy) {
        Eigen::VectorXd p = (p0 + spread * yy).cwiseMax(0.0);
        for (int k = 0; k < K; ++k)
            if (sys.targets(k) <= 0) p(k) = 0.0;
        return p;
    };
    auto value = [&](const Eigen::VectorXd& yy) {
        Eigen::VectorXcd w(K);
        for (int k = 0; k < K; ++k) w(k) = std::sqrt(yy(k)) * phase(k);
        return mse_at_best_receiver(w, powers(yy), eff);
    };

    double best = value(y);
    for (int k = 0; k < K; ++k) {
        // Largest y_k keeping every UE within budget, the others fixed.
        double hi = std::numeric_limits<double>::infinity();
        Eigen::VectorXd base = y;
        base(k) = 0.0;
        const Eigen::VectorXd used = base + powers(base);
        for (int j = 0; j < K; ++j) {
            const double rate = (j == k ? 1.0 : 0.0) + (sys.targets(j) > 0 ? spread(j, k) : 0.0);
            if (rate > 0) hi = std::min(hi, (budget(j) - used(j)) / rate);
        }
        if (!(hi > 0)) continue;
        auto at = [&](double yk) {
            Eigen::VectorXd yy = y;
            yy(k) = yk;
            return value(yy);
        };
        const int n = 24;
        int arg = 0;
        double bestv = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= n; ++i) {
            const double f = at(hi * i / n);
            if (f < bestv) bestv = f, arg = i;
        }
        double lo = hi * std::max(arg - 1, 0) / n, up = hi * std::min(arg + 1, n) / n;
        const double r = (std::sqrt(5.0) - 1) / 2;
        double x1 = up - r * (up - lo), x2 = lo + r * (up - lo);
        double f1 = at(x1), f2 = at(x2);
        for (int it = 0; it < 60 && up - lo > 1e-14 * hi; ++it) {
            if (f1 < f2) {
                up = x2, x2 = x1, f2 = f1, x1 = up - r * (up - lo), f1 = at(x1);
            } else {
                lo = x1, x1 = x2, f1 = f2, x2 = lo + r * (up - lo), f2 = at(x2);
            }
        }
        double cand = arg * hi / n, candv = bestv;
        if (f1 < candv) cand = x1, candv = f1;
        if (f2 < candv) cand = x2, candv = f2;
        if (candv < best) {
            y(k) = cand;
            best = candv;
        }
    }
    const Eigen::VectorXd p = powers(y);
    for (int k = 0; k < K; ++k) {
        beams.w(k) = std::sqrt(y(k)) * phase(k);
        beams.v(k) = std::sqrt(p(k)) * phase_of(beams.v(k));
    }
    beams.z = mmse_receivers(beams, eff).z;
    return mse_eval(beams, eff);
}

// Moves further along the last iteration's change in (|w_k|^2, arg w_k),
// sensing powers tied through the rate system. Returns the MSE of the best
// step found, or +inf when no step within budget improves on `current`.
double extrapolate(BeamState& beams, const BeamState& before, const RatePowerSystem& sys,
                   const EffectiveChannel& eff, const Scenario& sc, double current) {
    const int K = eff.users();
    const Eigen::VectorXd y1 = beams.w.cwiseAbs2(), y0 = before.w.cwiseAbs2();
    Eigen::VectorXd turn(K);
    for (int k = 0; k < K; ++k)
        turn(k) = std::abs(before.w(k)) > 0 && std::abs(beams.w(k)) > 0
                      ? std::arg(beams.w(k) / before.w(k))
                      : 0.0;
    const Eigen::MatrixXd spread = sys.inverse * sys.coupling;
    const Eigen::VectorXd p0 = sys.inverse * sys.noise;

    double best = current;
    Eigen::VectorXcd best_w;
    Eigen::VectorXd best_p;
    for (double step : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        const Eigen::VectorXd y = (y1 + step * (y1 - y0)).cwiseMax(0.0);
        Eigen::VectorXd p = (p0 + spread * y).cwiseMax(0.0);
        bool within = true;
        for (int k = 0; k < K; ++k) {
            if (sys.targets(k) <= 0) p(k) = 0.0;
            within = within && y(k) + p(k) <= sc.p_max_watts * (1 + 1e-12);
        }
        if (!within) break;
        Eigen::VectorXcd w(K);
        for (int k = 0; k < K; ++k)
            w(k) = std::sqrt(y(k)) * phase_of(beams.w(k)) * std::polar(1.0, step * turn(k));
        const double m = mse_at_best_receiver(w, p, eff);
        if (!(m < best)) break;
        best = m;
        best_w = w;
        best_p = p;
    }
    if (!(best < current)) return std::numeric_limits<double>::infinity();
    beams.w = best_w;
    for (int k = 0; k < K; ++k) beams.v(k) = std::sqrt(best_p(k)) * phase_of(beams.v(k));
    beams.z = mmse_receivers(beams, eff).z;
    return mse_eval(beams, eff);
}

}  // namespace

SolverReport ao_mmse(const BeamState& initial, const EffectiveChannel& eff, const Scenario& sc,
                     const SolverConfig& cfg) {
    const int K = eff.users();
    const Eigen::VectorXd targets = targets_for(cfg, K);
    SolverReport rep;
    BeamState beams = initial;
    Receivers rx = mmse_receivers(beams, eff);
    beams.z = rx.z;
    beams.u = rx.u;
    double prev = mse_eval(beams, eff);
    bool feasible_state = false;

    for (int it = 1; it <= cfg.max_iters; ++it) {
        rx = mmse_receivers(beams, eff);
        beams.z = rx.z;
        beams.u = rx.u;
        rep.sensing_identity_residual =
            std::max(rep.sensing_identity_residual, worst_identity_residual(beams, eff));
        const double held = mse_eval(beams, eff);

        TransmitResult tr = transmit_update(beams, eff, rx, sc, cfg);
        double m = mse_eval(tr.beams, eff);
        if (feasible_state && tr.feasible && m > held) {
            m = held;  // numerical safeguard: keep the incumbent
        } else {
            if (eff.dims() > 1 && tr.feasible) {
                // Sweep against the pre-update directions, then refresh them
                // from the swept beams while that keeps helping. Fixed
                // directions only understate the SINR, so rates stay met.
                Eigen::MatrixXcd dirs = sensing_directions(beams, eff);
                for (int pass = 0; pass < 6; ++pass) {
                    const RatePowerSystem sys = build_rate_system(dirs, eff, targets);
                    if (!sys.solvable) break;
                    BeamState swept = tr.beams;
                    const double ms = coordinate_power_sweep(swept, sys, eff, sc);
                    if (!(ms < m)) break;
                    const bool small = m - ms <= 1e-3 * cfg.tol_rel * m;
                    tr.beams = swept;
                    m = ms;
                    if (small) break;
                    dirs = sensing_directions(tr.beams, eff);
                }
                const RatePowerSystem sys =
                    build_rate_system(sensing_directions(tr.beams, eff), eff, targets);
                if (sys.solvable) {
                    BeamState ahead = tr.beams;
                    const double me = extrapolate(ahead, beams, sys, eff, sc, m);
                    if (me < m) {
                        tr.beams = ahead;
                        m = me;
                    }
                }
                tr.beams.u = sensing_directions(tr.beams, eff) * tr.beams.v.asDiagonal();
            }
            beams = tr.beams;
        }
        feasible_state = tr.feasible;

        rep.mse_trace.push_back(m);
        BeamState probe = beams;
        probe.u = sensing_directions(beams, eff) * beams.v.asDiagonal();
        rep.sinr_trace.push_back(sinr_eval(probe, eff));
        rep.iterations_used = it;
        const bool small = std::abs(prev - m) <= cfg.tol_rel * std::abs(prev);
        prev = m;
        if (small) {
            rep.converged = true;
            break;
        }
    }

    rx = mmse_receivers(beams, eff);
    beams.z = rx.z;
    beams.u = rx.u;
    rep.final_beams = beams;
    const Eigen::VectorXd sinr = sinr_eval(beams, eff);
    rep.rate_feasible.resize(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k)
        rep.rate_feasible[static_cast<size_t>(k)] = sinr(k) >= targets(k) * (1 - 1e-6);
    rep.mse_constraint_ok = mse_eval(beams, eff) <= sc.mse_budget;
    return rep;
}

}  // namespace pass
