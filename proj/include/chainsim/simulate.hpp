#pragma once

#include <vector>

#include "chainsim/analysis.hpp"
#include "chainsim/chain.hpp"
#include "chainsim/controller.hpp"
#include "chainsim/disturbance.hpp"
#include "chainsim/exec.hpp"

namespace chainsim {

struct RunOptions {
    Exec exec = Exec::Serial;
    bool record_states = false;  // keep full x/v histories (needed for CSV output)
};

/// Trajectories of one closed-loop run from the all-zero state.
struct RunResult {
    int N = 0;
    double dt = 0.0;
    long steps = 0;
    ErrorHistory errors;             // e(n, k)
    ErrorHistory error_rates;        // edot(n, k), same layout
    std::vector<double> x_history;   // (steps+1) * (N+1) if recorded, else empty
    std::vector<double> v_history;
    ChainState final_state;

    double x_at(long n, int k) const { return x_history[static_cast<size_t>(n) * (N + 1) + k]; }
    double v_at(long n, int k) const { return v_history[static_cast<size_t>(n) * (N + 1) + k]; }
};

/// Advances the chain over config.horizon steps under the given controller
/// and disturbance: per step, all control laws are evaluated against the
/// frozen state, the dynamics advance with the pre-computed inputs, then the
/// controller memory and the freshly produced communication signals are
/// installed for the next step.
RunResult simulate(const SimulationConfig& config, const ControllerDefinition& controller,
                   const DisturbanceProfile& disturbance, const RunOptions& options = {});

}  // namespace chainsim
