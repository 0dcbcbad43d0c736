#include "pass/wsr_solver.hpp"

#include <algorithm>
#include <cmath>

namespace pass {

namespace {

cplx phase_or_one(cplx x) {
    const double mag = std::abs(x);
    return mag > 0 ? x / mag : cplx(1.0, 0.0);
}

// Largest common factor in (0, 1] that brings |w|^2 + |v|^2 within budget.
void rescale_into_budget(BeamState& b, const Scenario& sc) {
    for (Eigen::Index k = 0; k < b.w.size(); ++k) {
        const double used = std::norm(b.w(k)) + std::norm(b.v(k));
        if (used > sc.p_max_watts) {
            const double c = std::sqrt(sc.p_max_watts / used);
            b.w(k) *= c;
            b.v(k) *= c;
        }
    }
}

}  // namespace

Receivers wsr_mmse_receivers(const BeamState& beams, const EffectiveChannel& eff) {
    return mmse_receivers(beams, eff);
}

Eigen::VectorXd update_weights(const BeamState& beams, const EffectiveChannel& eff) {
    const Eigen::VectorXd a = sensing_mse(beams, eff);
    Eigen::VectorXd beta(a.size());
    for (Eigen::Index k = 0; k < a.size(); ++k) beta(k) = std::max(1.0, 1.0 / a(k));
    return beta;
}

double wmmse_objective(const BeamState& beams, const EffectiveChannel& eff,
                       const Eigen::VectorXd& weights, const Scenario& sc) {
    const Eigen::VectorXd a = sensing_mse(beams, eff);
    double out = 0.0;
    for (int k = 0; k < eff.users(); ++k)
        out += sc.weight(k) * (weights(k) * a(k) - std::log(weights(k)));
    return out;
}

BeamState wsr_closed_form(const BeamState& beams, const EffectiveChannel& eff,
                          const Eigen::VectorXd& weights, const Scenario& sc) {
    const int K = eff.users();
    BeamState out = beams;
    const Eigen::VectorXcd zproj = eff.g.adjoint() * beams.z;  // conj(z^H g_k)
    Eigen::VectorXcd uproj(K);                                 // u_k^H g_k
    for (int k = 0; k < K; ++k) uproj(k) = beams.u.col(k).dot(eff.g.col(k));

    if (eff.dims() == 1) {
        const double zmag = std::abs(beams.z(0));
        double denom = 0.0;
        for (int i = 0; i < K; ++i)
            denom += sc.weight(i) * weights(i) * eff.g.col(i).squaredNorm() *
                     std::abs(beams.u(0, i));
        denom *= zmag * zmag;
        for (int k = 0; k < K; ++k) {
            const double num = sc.weight(k) * weights(k) * std::abs(beams.u(0, k)) * zmag *
                               std::abs(eff.g(0, k));
            out.w(k) = denom > 0 ? num / denom * phase_or_one(zproj(k)) : cplx(0.0);
        }
    } else {
        double theta_sum = 0.0, comp_gain = 0.0, sense_sum = 0.0;
        for (int i = 0; i < K; ++i) {
            theta_sum += sc.weight(i);
            comp_gain += std::norm(zproj(i));
            sense_sum += sc.weight(i) * weights(i) * std::norm(uproj(i));
        }
        const double lead = 1.0 + std::sqrt(sc.mse_budget);
        for (int k = 0; k < K; ++k) {
            const double first = comp_gain / theta_sum * weights(k) * std::norm(uproj(k));
            const bool ok = first > 0 && sense_sum > 0;
            out.w(k) = ok ? lead / first * std::conj(zproj(k)) / sense_sum : cplx(0.0);
        }
    }
    for (int k = 0; k < K; ++k)
        out.v(k) = std::sqrt(sc.p_max_watts) * phase_or_one(std::conj(uproj(k)));
    rescale_into_budget(out, sc);
    return out;
}

BeamState wsr_exact_block(const BeamState& beams, const EffectiveChannel& eff,
                          const Eigen::VectorXd& weights, const Scenario& sc) {
    const int K = eff.users();
    BeamState out = beams;
    // leak(k, i) = |u_k^H g_i|^2
    const Eigen::MatrixXcd cross = beams.u.adjoint() * eff.g;
    const Eigen::MatrixXd leak = cross.cwiseAbs2();
    const double cap = std::sqrt(sc.p_max_watts);
    for (int i = 0; i < K; ++i) {
        // The computation stream only adds interference to the sensing MSEs.
        out.w(i) = 0.0;
        const double own = sc.weight(i) * weights(i);
        double quad = own * leak(i, i);
        for (int k = 0; k < K; ++k)
            if (k != i) quad += sc.weight(k) * weights(k) * leak(k, i);
        cplx v = quad > 0 ? own * std::conj(cross(i, i)) / quad : cplx(0.0);
        if (std::abs(v) > cap) v *= cap / std::abs(v);
        out.v(i) = v;
    }
    return out;
}

WsrTransmitResult wsr_transmit_update(const BeamState& beams, const EffectiveChannel& eff,
                                      const Eigen::VectorXd& weights, const Scenario& sc) {
    WsrTransmitResult res;
    const BeamState closed = wsr_closed_form(beams, eff, weights, sc);
    const double before = wmmse_objective(beams, eff, weights, sc);
    if (wmmse_objective(closed, eff, weights, sc) <= before) {
        res.beams = closed;
        res.closed_form_kept = true;
    } else {
        res.beams = wsr_exact_block(beams, eff, weights, sc);
    }
    return res;
}

SolverReport ao_wmmse(const BeamState& initial, const EffectiveChannel& eff, const Scenario& sc,
                      const SolverConfig& cfg) {
    SolverReport rep;
    BeamState beams = initial;
    double prev = 0.0;
    bool have_prev = false;

    for (int it = 1; it <= cfg.max_iters; ++it) {
        const Receivers rx = wsr_mmse_receivers(beams, eff);
        beams.z = rx.z;
        beams.u = rx.u;
        rep.mse_constraint_ok = rep.mse_constraint_ok && mse_eval(beams, eff) <= sc.mse_budget;
        const Eigen::VectorXd beta = update_weights(beams, eff);
        if (!have_prev) {
            prev = wmmse_objective(beams, eff, beta, sc);
            have_prev = true;
        }

        beams = wsr_transmit_update(beams, eff, beta, sc).beams;
        const double obj = wmmse_objective(beams, eff, beta, sc);
        rep.objective_trace.push_back(obj);

        BeamState probe = beams;
        probe.u = sensing_directions(beams, eff) * beams.v.asDiagonal();
        const Eigen::VectorXd sinr = sinr_eval(probe, eff);
        rep.sinr_trace.push_back(sinr);
        rep.wsr_trace.push_back(wsr_eval(probe, eff, sc));
        rep.iterations_used = it;

        const bool small = std::abs(prev - obj) <= cfg.tol_rel * std::max(std::abs(prev), 1.0);
        prev = obj;
        if (small) {
            rep.converged = true;
            break;
        }
    }

    const Receivers rx = wsr_mmse_receivers(beams, eff);
    beams.z = rx.z;
    beams.u = rx.u;
    rep.final_beams = beams;
    rep.mse_trace.push_back(mse_eval(beams, eff));
    rep.mse_constraint_ok = rep.mse_constraint_ok && rep.mse_trace.back() <= sc.mse_budget;
    const Eigen::VectorXd sinr = sinr_eval(beams, eff);
    rep.rate_feasible.resize(static_cast<size_t>(eff.users()));
    for (int k = 0; k < eff.users(); ++k) {
        const double target = cfg.rate_targets.size() ? cfg.rate_targets(k) : 0.0;
        rep.rate_feasible[static_cast<size_t>(k)] = sinr(k) >= target * (1 - 1e-6);
    }
    return rep;
}

}  // namespace pass
