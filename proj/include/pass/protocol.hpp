#pragma once

#include <vector>

#include <Eigen/Dense>

#include "pass/geometry.hpp"

namespace pass {

enum class Protocol { SS, SA, SM };

struct ProtocolKind {
    Protocol kind = Protocol::SM;
    int selected_segment = 0;  // zero-based, SS only
};

const char* protocol_name(Protocol p);

// Per-UE effective coefficients in receive space: column k is UE k's
// channel, one row for SS/SA (a scalar) and M rows for SM.
struct EffectiveChannel {
    Eigen::MatrixXcd g;
    double noise = 0.0;  // per receive branch

    int dims() const { return static_cast<int>(g.rows()); }
    int users() const { return static_cast<int>(g.cols()); }
};

// Transmit pairs and receive beams. z has eff.dims() entries; column k of u
// is UE k's sensing receive beam.
struct BeamState {
    Eigen::VectorXcd w;
    Eigen::VectorXcd v;
    Eigen::VectorXcd z;
    Eigen::MatrixXcd u;
};

struct Metrics {
    double mse = 0.0;
    Eigen::VectorXd sinr;
    Eigen::VectorXd rate;
    double wsr = 0.0;
};

// Segment with the largest summed channel power across UEs.
int strongest_segment(const ChannelSet& h);

EffectiveChannel effective_channel(const ChannelSet& h, const ProtocolKind& protocol,
                                   const Scenario& sc);

double mse_eval(const BeamState& beams, const EffectiveChannel& eff);
Eigen::VectorXd sinr_eval(const BeamState& beams, const EffectiveChannel& eff);
double wsr_eval(const BeamState& beams, const EffectiveChannel& eff, const Scenario& sc);
Metrics evaluate(const BeamState& beams, const EffectiveChannel& eff, const Scenario& sc);

// Per-UE sensing MSE of the linear estimate of v_k's symbol.
Eigen::VectorXd sensing_mse(const BeamState& beams, const EffectiveChannel& eff);

// Throws DimensionMismatch when beam sizes disagree with the channel.
void check_dims(const BeamState& beams, const EffectiveChannel& eff);

}  // namespace pass
