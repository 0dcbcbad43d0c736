#include "pass/protocol.hpp"

#include <cmath>

#include "pass/errors.hpp"

namespace pass {

const char* protocol_name(Protocol p) {
    switch (p) {
        case Protocol::SS: return "SS";
        case Protocol::SA: return "SA";
        case Protocol::SM: return "SM";
    }
    return "?";
}

int strongest_segment(const ChannelSet& h) {
    Eigen::Index best = 0;
    h.cwiseAbs2().colwise().sum().maxCoeff(&best);
    return static_cast<int>(best);
}

EffectiveChannel effective_channel(const ChannelSet& h, const ProtocolKind& protocol,
                                   const Scenario& sc) {
    if (h.cols() != sc.num_segments) throw DimensionMismatch("channel set has wrong segment count");
    EffectiveChannel eff;
    switch (protocol.kind) {
        case Protocol::SS:
            if (protocol.selected_segment < 0 || protocol.selected_segment >= h.cols())
                throw DimensionMismatch("selected segment out of range");
            eff.g = h.col(protocol.selected_segment).transpose();
            eff.noise = sc.noise_watts;
            break;
        case Protocol::SA:
            eff.g = h.rowwise().sum().transpose();
            eff.noise = sc.num_segments * sc.noise_watts;
            break;
        case Protocol::SM:
            eff.g = h.transpose();
            eff.noise = sc.noise_watts;
            break;
    }
    return eff;
}

void check_dims(const BeamState& beams, const EffectiveChannel& eff) {
    const auto k = eff.g.cols();
    const auto d = eff.g.rows();
    if (beams.w.size() != k || beams.v.size() != k)
        throw DimensionMismatch("transmit beams need one entry per UE");
    if (beams.z.size() != d) throw DimensionMismatch("computation receive beam has wrong size");
    if (beams.u.rows() != d || beams.u.cols() != k)
        throw DimensionMismatch("sensing receive beams have wrong shape");
}

double mse_eval(const BeamState& beams, const EffectiveChannel& eff) {
    check_dims(beams, eff);
    const Eigen::VectorXcd proj = eff.g.adjoint() * beams.z;  // conj(z^H g_k)
    const cplx aligned = (proj.conjugate().array() * beams.w.array()).sum();
    double out = std::norm(aligned - 1.0);
    out += (proj.cwiseAbs2().array() * beams.v.cwiseAbs2().array()).sum();
    out += eff.noise * beams.z.squaredNorm();
    return out;
}

namespace {

// Interference-plus-noise seen by UE k's sensing beam, and its useful term.
void sensing_terms(const BeamState& beams, const EffectiveChannel& eff, int k, cplx& useful,
                   double& other) {
    const Eigen::VectorXcd s = eff.g.adjoint() * beams.u.col(k);  // conj(u^H g_i)
    useful = std::conj(s(k)) * beams.v(k);
    other = eff.noise * beams.u.col(k).squaredNorm();
    for (int i = 0; i < eff.users(); ++i) {
        const double gain = std::norm(s(i));
        other += gain * std::norm(beams.w(i));
        if (i != k) other += gain * std::norm(beams.v(i));
    }
}

}  // namespace

Eigen::VectorXd sinr_eval(const BeamState& beams, const EffectiveChannel& eff) {
    check_dims(beams, eff);
    Eigen::VectorXd out(eff.users());
    for (int k = 0; k < eff.users(); ++k) {
        if (beams.u.col(k).squaredNorm() == 0.0) {
            out(k) = 0.0;
            continue;
        }
        cplx useful;
        double other = 0.0;
        sensing_terms(beams, eff, k, useful, other);
        out(k) = std::norm(useful) / other;
    }
    return out;
}

Eigen::VectorXd sensing_mse(const BeamState& beams, const EffectiveChannel& eff) {
    check_dims(beams, eff);
    Eigen::VectorXd out(eff.users());
    for (int k = 0; k < eff.users(); ++k) {
        cplx useful;
        double other = 0.0;
        sensing_terms(beams, eff, k, useful, other);
        out(k) = std::norm(useful - 1.0) + other;
    }
    return out;
}

double wsr_eval(const BeamState& beams, const EffectiveChannel& eff, const Scenario& sc) {
    const Eigen::VectorXd sinr = sinr_eval(beams, eff);
    double out = 0.0;
    for (int k = 0; k < eff.users(); ++k) out += sc.weight(k) * std::log2(1.0 + sinr(k));
    return out;
}

Metrics evaluate(const BeamState& beams, const EffectiveChannel& eff, const Scenario& sc) {
    Metrics m;
    m.mse = mse_eval(beams, eff);
    m.sinr = sinr_eval(beams, eff);
    m.rate = (1.0 + m.sinr.array()).log() / std::log(2.0);
    m.wsr = 0.0;
    for (int k = 0; k < eff.users(); ++k) m.wsr += sc.weight(k) * m.rate(k);
    return m;
}

}  // namespace pass
