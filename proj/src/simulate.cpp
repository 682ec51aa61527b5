#include "chainsim/simulate.hpp"

#include <utility>

namespace chainsim {

namespace {

void record_errors(const ChainState& state, long n, ErrorHistory& e, ErrorHistory& ed,
                   Exec exec) {
    const int N = state.chain_n();
    auto fill = [&](int k) {
        e.at(n, k) = state.x[k - 1] - state.x[k];
        ed.at(n, k) = state.v[k - 1] - state.v[k];
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int k = 1; k <= N; ++k) fill(k);
    } else {
        for (int k = 1; k <= N; ++k) fill(k);
    }
}

}  // namespace

RunResult simulate(const SimulationConfig& config, const ControllerDefinition& controller,
                   const DisturbanceProfile& disturbance, const RunOptions& options) {
    config.validate();
    disturbance.validate(config.dt);
    const int N = config.N;
    const double dt = config.dt;
    const long steps = config.horizon;

    RunResult result;
    result.N = N;
    result.dt = dt;
    result.steps = steps;
    const size_t cells = static_cast<size_t>(steps + 1) * N;
    result.errors = ErrorHistory{N, dt, steps, std::vector<double>(cells, 0.0)};
    result.error_rates = ErrorHistory{N, dt, steps, std::vector<double>(cells, 0.0)};
    if (options.record_states) {
        result.x_history.assign(static_cast<size_t>(steps + 1) * (N + 1), 0.0);
        result.v_history.assign(static_cast<size_t>(steps + 1) * (N + 1), 0.0);
    }

    ChainState state = init_zero(config, controller.n_xi, controller.n_c);
    std::vector<double> d1(N + 1), d2(N + 1);

    auto record_states = [&](const ChainState& s, long n) {
        if (!options.record_states) return;
        for (int k = 0; k <= N; ++k) {
            result.x_history[static_cast<size_t>(n) * (N + 1) + k] = s.x[k];
            result.v_history[static_cast<size_t>(n) * (N + 1) + k] = s.v[k];
        }
    };

    record_errors(state, 0, result.errors, result.error_rates, options.exec);
    record_states(state, 0);

    auto fill_disturbance = [&](long n) {
        auto fill = [&](int k) {
            const DisturbancePair d = sample(disturbance, k, n, N, dt);
            d1[k] = d.d1;
            d2[k] = d.d2;
        };
        if (options.exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
            for (int k = 0; k <= N; ++k) fill(k);
        } else {
            for (int k = 0; k <= N; ++k) fill(k);
        }
    };

    for (long n = 0; n < steps; ++n) {
        ChainControls controls = evaluate_chain(controller, state, dt, options.exec);
        fill_disturbance(n);
        ChainState next = step(state, {controls.u1, controls.u2, d1, d2}, dt, options.exec);
        next.xi = std::move(controls.next_xi);
        next.c_plus = std::move(controls.next_c_plus);
        next.c_minus = std::move(controls.next_c_minus);
        state = std::move(next);
        record_errors(state, n + 1, result.errors, result.error_rates, options.exec);
        record_states(state, n + 1);
    }

    result.final_state = std::move(state);
    return result;
}

}  // namespace chainsim
