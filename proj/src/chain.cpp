#include "chainsim/chain.hpp"

#include <string>

#include "chainsim/errors.hpp"

namespace chainsim {

void SimulationConfig::validate() const {
    if (N < 1) throw ConfigError("sim.N must be >= 1, got " + std::to_string(N));
    if (!(dt > 0.0)) throw ConfigError("sim.dt must be > 0, got " + std::to_string(dt));
    if (horizon < 1) throw ConfigError("sim.horizon must be >= 1, got " + std::to_string(horizon));
}

ChainState init_zero(const SimulationConfig& config, int n_xi, int n_c) {
    config.validate();
    if (n_xi < 0 || n_c < 0) throw ConfigError("controller dimensions must be >= 0");
    const auto count = static_cast<size_t>(config.N) + 1;
    ChainState s;
    s.step = 0;
    s.n_xi = n_xi;
    s.n_c = n_c;
    s.x.assign(count, 0.0);
    s.v.assign(count, 0.0);
    s.xi.assign(count * n_xi, 0.0);
    s.c_plus.assign(count * n_c, 0.0);
    s.c_minus.assign(count * n_c, 0.0);
    return s;
}

ChainState step(const ChainState& state, const StepInput& input, double dt, Exec exec) {
    const auto count = state.x.size();
    if (input.u1.size() != count || input.u2.size() != count ||
        input.d1.size() != count || input.d2.size() != count) {
        throw DimensionError("step input length does not match vehicle count");
    }
    ChainState next = state;
    next.step = state.step + 1;
    const int n = static_cast<int>(count);
    auto body = [&](int k) {
        next.v[k] = state.v[k] + input.u1[k] + input.d1[k];
        next.x[k] = state.x[k] + state.v[k] * dt + input.u2[k] + input.d2[k];
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for
        for (int k = 0; k < n; ++k) body(k);
    } else {
        for (int k = 0; k < n; ++k) body(k);
    }
    return next;
}

void spacing_errors(const ChainState& state, std::span<double> e, std::span<double> edot) {
    const int N = state.chain_n();
    if (e.size() != static_cast<size_t>(N) || edot.size() != static_cast<size_t>(N)) {
        throw DimensionError("spacing error output length must be N");
    }
    for (int k = 1; k <= N; ++k) {
        e[k - 1] = state.x[k - 1] - state.x[k];
        edot[k - 1] = state.v[k - 1] - state.v[k];
    }
}

std::pair<std::vector<double>, std::vector<double>> spacing_errors(const ChainState& state) {
    const int N = state.chain_n();
    std::vector<double> e(N), edot(N);
    spacing_errors(state, e, edot);
    return {std::move(e), std::move(edot)};
}

}  // namespace chainsim
