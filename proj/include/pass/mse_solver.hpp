#pragma once

#include <vector>

#include <Eigen/Dense>

#include "pass/protocol.hpp"

namespace pass {

enum class InfeasibilityPolicy { Error, ClampToPower };

struct SolverConfig {
    int max_iters = 100;
    double tol_rel = 1e-6;
    Eigen::VectorXd rate_targets;  // SINR targets 2^r - 1 per UE; empty means none
    InfeasibilityPolicy infeasibility_policy = InfeasibilityPolicy::ClampToPower;
};

struct SolverReport {
    int iterations_used = 0;
    std::vector<double> mse_trace;
    std::vector<Eigen::VectorXd> sinr_trace;
    std::vector<double> wsr_trace;  // WMMSE runs only
    std::vector<double> objective_trace;
    BeamState final_beams;
    bool converged = false;
    std::vector<bool> rate_feasible;
    bool mse_constraint_ok = true;
    // Largest |a_k (1 + SINR_k) - 1| seen right after a receiver update.
    double sensing_identity_residual = 0.0;
};

SolverConfig default_solver_config(const Scenario& sc);

// Equal power split with transmit phases opposite to each UE's summed
// coefficient; receive beams zero.
BeamState initial_beams(const EffectiveChannel& eff, const Scenario& sc);

struct Receivers {
    Eigen::VectorXcd z;
    Eigen::MatrixXcd u;
};

Receivers mmse_receivers(const BeamState& beams, const EffectiveChannel& eff);

// Sensing receive directions with unit transmit amplitude; u_k is this
// column scaled by v_k.
Eigen::MatrixXcd sensing_directions(const BeamState& beams, const EffectiveChannel& eff);

// Sensing powers |v_k|^2 that meet every active rate target with equality
// for fixed sensing receive beams and computation powers |w_k|^2. Only UEs
// with a positive target take part; the others get zero.
struct RatePowerSystem {
    Eigen::MatrixXd coupling;     // K x K leakage gains |u_k^H g_i|^2
    Eigen::VectorXd noise;        // sigma^2 |u_k|^2
    Eigen::VectorXd targets;      // per UE SINR target
    Eigen::MatrixXd inverse;      // K x K, zero outside the active block
    bool solvable = true;
};

RatePowerSystem build_rate_system(const Eigen::MatrixXcd& directions, const EffectiveChannel& eff,
                                  const Eigen::VectorXd& targets);
Eigen::VectorXd sensing_powers(const RatePowerSystem& sys, const Eigen::VectorXd& comp_powers);

struct RatePowerResult {
    Eigen::VectorXd powers;
    std::vector<bool> feasible;
};

// Throws InfeasibleRates under the Error policy; otherwise clamps into
// [0, P_max] and marks the affected UEs.
RatePowerResult rate_power_system(const BeamState& beams, const EffectiveChannel& eff,
                                  const Receivers& rx, const Scenario& sc,
                                  const SolverConfig& cfg);

struct TransmitResult {
    BeamState beams;  // receive beams hold the rescaled computation beam
    bool feasible = true;
};

// Transmit block: jointly picks the computation amplitudes |w_k| and the
// gain of the computation receive beam (its direction held fixed), with
// sensing powers tied to |w_k|^2 through the rate system. Phases are aligned
// to the receive beams.
TransmitResult transmit_update(const BeamState& beams, const EffectiveChannel& eff,
                               const Receivers& rx, const Scenario& sc, const SolverConfig& cfg);

SolverReport ao_mmse(const BeamState& initial, const EffectiveChannel& eff, const Scenario& sc,
                     const SolverConfig& cfg);

}  // namespace pass
