#pragma once

#include <Eigen/Dense>

#include "pass/mse_solver.hpp"

namespace pass {

// Same receivers as the MSE solver.
Receivers wsr_mmse_receivers(const BeamState& beams, const EffectiveChannel& eff);

// beta_k = 1 / a_k with a_k the sensing MSE at the given receive beams,
// floored at 1.
Eigen::VectorXd update_weights(const BeamState& beams, const EffectiveChannel& eff);

// Weighted-MMSE surrogate sum_k theta_k (beta_k a_k - ln beta_k).
double wmmse_objective(const BeamState& beams, const EffectiveChannel& eff,
                       const Eigen::VectorXd& weights, const Scenario& sc);

struct WsrTransmitResult {
    BeamState beams;
    bool closed_form_kept = false;  // false when the exact block minimizer replaced it
};

// Closed-form transmit pair with per-UE joint rescaling into the budget,
// kept when it does not raise the surrogate; otherwise the exact minimizer of
// the surrogate over the transmit block.
WsrTransmitResult wsr_transmit_update(const BeamState& beams, const EffectiveChannel& eff,
                                      const Eigen::VectorXd& weights, const Scenario& sc);

// The closed form alone, after rescaling. Vector receivers use the form
// carrying the (1 + sqrt(mse_budget)) factor.
BeamState wsr_closed_form(const BeamState& beams, const EffectiveChannel& eff,
                          const Eigen::VectorXd& weights, const Scenario& sc);

// Exact surrogate minimizer over (w, v) for fixed receive beams and weights.
BeamState wsr_exact_block(const BeamState& beams, const EffectiveChannel& eff,
                          const Eigen::VectorXd& weights, const Scenario& sc);

SolverReport ao_wmmse(const BeamState& initial, const EffectiveChannel& eff, const Scenario& sc,
                      const SolverConfig& cfg);

}  // namespace pass
