#include "chainsim/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chainsim/errors.hpp"

namespace chainsim {

namespace {

constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

struct PaddedErrors {
    // slot j + m1 holds e_j; error indices j in [-m1, N + m2]
    std::vector<double> e;
    std::vector<double> edot;
    std::vector<std::uint8_t> present;
};

PaddedErrors build_padded(const ChainState& state, int m1, int m2, Exec exec) {
    const int N = state.chain_n();
    const size_t padded = static_cast<size_t>(N + m1 + m2 + 1);
    PaddedErrors p;
    p.e.assign(padded, kAbsent);
    p.edot.assign(padded, kAbsent);
    p.present.assign(padded, 0);
    auto fill = [&](int j) {
        p.e[j + m1] = state.x[j - 1] - state.x[j];
        p.edot[j + m1] = state.v[j - 1] - state.v[j];
        p.present[j + m1] = 1;
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int j = 1; j <= N; ++j) fill(j);
    } else {
        for (int j = 1; j <= N; ++j) fill(j);
    }
    return p;
}

}  // namespace

ChainControls evaluate_chain(const ControllerDefinition& controller, const ChainState& state,
                             double dt, Exec exec) {
    if (state.n_xi != controller.n_xi || state.n_c != controller.n_c) {
        throw DimensionError("controller dimensions do not match state (n_xi/n_c)");
    }
    const int N = state.chain_n();
    const int m1 = controller.m1;
    const int m2 = controller.m2;
    const int n_c = controller.n_c;
    const int n_xi = controller.n_xi;
    const int wlen = m1 + m2 + 1;

    const PaddedErrors pad = build_padded(state, m1, m2, exec);

    ChainControls out;
    out.u1.assign(N + 1, 0.0);
    out.u2.assign(N + 1, 0.0);
    out.next_c_plus.assign(static_cast<size_t>(N + 1) * n_c, 0.0);
    out.next_c_minus.assign(static_cast<size_t>(N + 1) * n_c, 0.0);
    out.next_xi.assign(static_cast<size_t>(N + 1) * n_xi, 0.0);

    const double time = static_cast<double>(state.step) * dt;
    auto body = [&](int k) {
        ControllerInputs in;
        // window of vehicle k starts at padded slot k (error index k - m1)
        in.window.e = {pad.e.data() + k, static_cast<size_t>(wlen)};
        in.window.edot = {pad.edot.data() + k, static_cast<size_t>(wlen)};
        in.window.present = {pad.present.data() + k, static_cast<size_t>(wlen)};
        in.window.m1 = m1;
        in.window.m2 = m2;
        in.c_plus = state.c_plus_of(k);
        in.c_minus = state.c_minus_of(k);
        in.xi = state.xi_of(k);
        in.chain_n = N;
        in.time = time;

        if (controller.f1) out.u1[k] = controller.f1(in);
        if (controller.f2) out.u2[k] = controller.f2(in);
        // one-hop routing with one-step delay: k's forward signal reaches
        // k+1 next step, its backward signal reaches k-1
        if (controller.g1 && k + 1 <= N) {
            controller.g1(in, {out.next_c_plus.data() + static_cast<size_t>(k + 1) * n_c,
                               static_cast<size_t>(n_c)});
        }
        if (controller.g2 && k - 1 >= 0) {
            controller.g2(in, {out.next_c_minus.data() + static_cast<size_t>(k - 1) * n_c,
                               static_cast<size_t>(n_c)});
        }
        if (controller.h) {
            controller.h(in, {out.next_xi.data() + static_cast<size_t>(k) * n_xi,
                              static_cast<size_t>(n_xi)});
        }
    };

    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int k = 0; k <= N; ++k) body(k);
    } else {
        for (int k = 0; k <= N; ++k) body(k);
    }
    return out;
}

AdaptedWindow boundary_adapt(const ControllerDefinition& controller, const NeighborhoodWindow& window) {
    (void)controller;
    AdaptedWindow w;
    w.m1 = window.m1;
    w.m2 = window.m2;
    const int n = window.size();
    w.e.resize(n);
    w.edot.resize(n);
    for (int i = 0; i < n; ++i) {
        const bool ok = window.present[i] != 0;
        w.e[i] = ok ? window.e[i] : 0.0;
        w.edot[i] = ok ? window.edot[i] : 0.0;
    }
    return w;
}

ControllerDefinition zero_controller() {
    ControllerDefinition c;
    c.name = "zero";
    c.m1 = 0;
    c.m2 = 0;
    c.n_xi = 0;
    c.n_c = 0;
    c.f1 = [](const ControllerInputs&) { return 0.0; };
    c.f2 = [](const ControllerInputs&) { return 0.0; };
    return c;
}

ControllerDefinition pd_asymmetric(double a, double b1, double b2, double dt) {
    if (!(dt > 0.0)) throw ParameterError("pd_asymmetric: dt must be > 0");
    ControllerDefinition c;
    c.name = "pd-asymmetric";
    c.m1 = 1;
    c.m2 = 1;
    c.n_xi = 0;
    c.n_c = 0;
    // f in window terms: b1*edot_k - b2*edot_{k+1} + a*e_k - a*e_{k+1};
    // a term whose error slot is absent is dropped
    auto f = [a, b1, b2](const ControllerInputs& in) {
        const auto& w = in.window;
        double val = 0.0;
        if (w.present_rel(0)) val += b1 * w.edot_rel(0) + a * w.e_rel(0);
        if (w.present_rel(1)) val += -b2 * w.edot_rel(1) - a * w.e_rel(1);
        return val;
    };
    c.f1 = [f, dt](const ControllerInputs& in) { return f(in) * dt; };
    c.f2 = [f, dt](const ControllerInputs& in) { return f(in) * dt * dt / 2.0; };
    return c;
}

ControllerDefinition pd_symmetric(double a, double b, double dt) {
    ControllerDefinition c = pd_asymmetric(a, b, b, dt);
    c.name = "pd-symmetric";
    return c;
}

ControllerDefinition nonlinear_comm_controller(double kappa, double sat_limit, double dt) {
    if (!(kappa > 0.0) || !(sat_limit > 0.0)) {
        throw ParameterError("nonlinear_comm_controller: kappa and sat_limit must be > 0");
    }
    if (!(dt > 0.0)) throw ParameterError("nonlinear_comm_controller: dt must be > 0");
    ControllerDefinition c;
    c.name = "nonlinear-comm";
    c.m1 = 1;
    c.m2 = 1;
    c.n_xi = 1;
    c.n_c = 1;
    auto f = [kappa, sat_limit](const ControllerInputs& in) {
        const auto& w = in.window;
        const double raw = kappa * (w.e_or_zero(0) - w.e_or_zero(1) + in.c_plus[0] -
                                    in.c_minus[0] + in.xi[0]);
        return std::clamp(raw, -sat_limit, sat_limit);
    };
    c.f1 = [f, dt](const ControllerInputs& in) { return f(in) * dt; };
    c.f2 = [f, dt](const ControllerInputs& in) { return f(in) * dt * dt / 2.0; };
    c.g1 = [](const ControllerInputs& in, std::span<double> outv) {
        outv[0] = in.window.e_or_zero(0);
    };
    c.g2 = [](const ControllerInputs& in, std::span<double> outv) {
        outv[0] = in.window.e_or_zero(1);
    };
    c.h = [](const ControllerInputs& in, std::span<double> outv) {
        outv[0] = 0.5 * in.xi[0] + 0.5 * in.window.e_or_zero(0);
    };
    return c;
}

}  // namespace chainsim
