#include "property_suites.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "chainsim/config.hpp"
#include "chainsim/harness.hpp"
#include "chainsim/simulate.hpp"

namespace chainsim::props {

namespace {

using Rng = std::mt19937_64;

int rand_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double rand_real(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// dyadic value: integer in [-mag, mag] scaled by 2^-frac_bits
double rand_dyadic(Rng& rng, int mag, int frac_bits) {
    return std::ldexp(static_cast<double>(rand_int(rng, -mag, mag)), -frac_bits);
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void note_failure(SuiteResult& r, const std::string& msg) {
    ++r.failures;
    if (r.messages.size() < 5) r.messages.push_back(msg);
}

// hand-rolled closed loop from an arbitrary initial state (simulate() always
// starts from zero); returns the concatenated e/edot trajectories
struct Trajectory {
    std::vector<double> e;
    std::vector<double> edot;
};

Trajectory roll_out(ChainState state, const ControllerDefinition& controller, double dt,
                    long steps, Exec exec) {
    const int N = state.chain_n();
    Trajectory traj;
    std::vector<double> zeros(N + 1, 0.0);
    for (long n = 0; n <= steps; ++n) {
        auto [e, edot] = spacing_errors(state);
        traj.e.insert(traj.e.end(), e.begin(), e.end());
        traj.edot.insert(traj.edot.end(), edot.begin(), edot.end());
        if (n == steps) break;
        ChainControls controls = evaluate_chain(controller, state, dt, exec);
        ChainState next = step(state, {controls.u1, controls.u2, zeros, zeros}, dt, exec);
        next.xi = std::move(controls.next_xi);
        next.c_plus = std::move(controls.next_c_plus);
        next.c_minus = std::move(controls.next_c_minus);
        state = std::move(next);
    }
    return traj;
}

// power-of-two gain in {1, 2} keeps products exact on dyadic states
double pow2_gain(Rng& rng) { return rand_int(rng, 0, 1) ? 2.0 : 1.0; }

ControllerDefinition random_exact_controller(Rng& rng, double dt, bool allow_comm) {
    const int kind = rand_int(rng, 0, allow_comm ? 2 : 1);
    if (kind == 0) return pd_asymmetric(pow2_gain(rng), pow2_gain(rng), pow2_gain(rng), dt);
    if (kind == 1) return pd_symmetric(pow2_gain(rng), pow2_gain(rng), dt);
    return nonlinear_comm_controller(pow2_gain(rng), pow2_gain(rng), dt);
}

ControllerDefinition random_controller(Rng& rng, double dt) {
    const int kind = rand_int(rng, 0, 2);
    if (kind == 0) {
        return pd_asymmetric(rand_real(rng, 0.2, 2.0), rand_real(rng, 0.2, 2.5),
                             rand_real(rng, 0.1, 1.5), dt);
    }
    if (kind == 1) return pd_symmetric(rand_real(rng, 0.2, 2.0), rand_real(rng, 0.2, 2.0), dt);
    return nonlinear_comm_controller(rand_real(rng, 0.3, 2.0), rand_real(rng, 0.2, 1.5), dt);
}

}  // namespace

SuiteResult galilean_invariance(std::uint64_t seed, int cases) {
    SuiteResult r{"galilean-invariance", seed};
    Rng rng(seed);
    for (int c = 0; c < cases; ++c) {
        ++r.cases;
        const double dt = 0.5;  // power of two: dt products are exact shifts
        const int N = rand_int(rng, 3, 12);
        const long steps = 6;
        ControllerDefinition controller = random_exact_controller(rng, dt, true);

        SimulationConfig cfg{N, dt, steps};
        ChainState base = init_zero(cfg, controller.n_xi, controller.n_c);
        for (int k = 0; k <= N; ++k) {
            base.x[k] = rand_dyadic(rng, 256, 8);
            base.v[k] = rand_dyadic(rng, 256, 8);
        }
        const double shift_x = static_cast<double>(rand_int(rng, -256, 256));
        const double shift_v = std::ldexp(static_cast<double>(rand_int(rng, -32, 32)), -1);

        ChainState shifted = base;
        for (int k = 0; k <= N; ++k) {
            shifted.x[k] += shift_x;
            shifted.v[k] += shift_v;
        }

        const Trajectory a = roll_out(base, controller, dt, steps, Exec::Serial);
        const Trajectory b = roll_out(shifted, controller, dt, steps, Exec::Serial);
        if (!bits_equal(a.e, b.e) || !bits_equal(a.edot, b.edot)) {
            note_failure(r, "case " + std::to_string(c) + ": N=" + std::to_string(N) +
                                " controller=" + controller.name +
                                " shifted trajectories differ");
        }
    }
    return r;
}

SuiteResult propagation_cone(std::uint64_t seed, int cases) {
    SuiteResult r{"propagation-cone", seed};
    Rng rng(seed);
    for (int c = 0; c < cases; ++c) {
        ++r.cases;
        const double dt = 0.1;
        const int N = rand_int(rng, 12, 32);
        const long steps = rand_int(rng, 2, 6);
        ControllerDefinition controller = random_controller(rng, dt);
        const int reach = std::max(controller.m1, controller.m2);

        SimulationConfig cfg{N, dt, steps};
        ChainState a = init_zero(cfg, controller.n_xi, controller.n_c);
        for (int k = 0; k <= N; ++k) {
            a.x[k] = rand_real(rng, -1.0, 1.0);
            a.v[k] = rand_real(rng, -1.0, 1.0);
        }
        const int j = rand_int(rng, 0, N);
        ChainState b = a;
        b.x[j] += rand_real(rng, 0.1, 2.0);
        b.v[j] += rand_real(rng, -2.0, -0.1);
        for (int i = 0; i < controller.n_xi; ++i) {
            b.xi[static_cast<size_t>(j) * controller.n_xi + i] += 0.25;
        }

        DisturbanceProfile ramp{DisturbanceKind::RampStep, 0.7, 0.0};
        std::vector<double> d1(N + 1), d2(N + 1);
        bool ok = true;
        for (long m = 0; m <= steps && ok; ++m) {
            ChainControls ca = evaluate_chain(controller, a, dt, Exec::Serial);
            ChainControls cb = evaluate_chain(controller, b, dt, Exec::Serial);
            const long cone = m * reach + controller.m1 + controller.m2;
            for (int k = 0; k <= N; ++k) {
                if (std::abs(k - j) <= cone) continue;
                if (ca.u1[k] != cb.u1[k] || ca.u2[k] != cb.u2[k]) {
                    note_failure(r, "case " + std::to_string(c) + ": influence outside cone at m=" +
                                        std::to_string(m) + " |k-j|=" + std::to_string(std::abs(k - j)));
                    ok = false;
                    break;
                }
            }
            if (m == steps) break;
            for (int k = 0; k <= N; ++k) {
                const DisturbancePair d = sample(ramp, k, m, N, dt);
                d1[k] = d.d1;
                d2[k] = d.d2;
            }
            auto advance = [&](ChainState& s, ChainControls& ctl) {
                ChainState next = step(s, {ctl.u1, ctl.u2, d1, d2}, dt, Exec::Serial);
                next.xi = std::move(ctl.next_xi);
                next.c_plus = std::move(ctl.next_c_plus);
                next.c_minus = std::move(ctl.next_c_minus);
                s = std::move(next);
            };
            advance(a, ca);
            advance(b, cb);
        }
    }
    return r;
}

SuiteResult homogeneity_bit_equality(std::uint64_t seed, int cases) {
    SuiteResult r{"homogeneity-bit-equality", seed};
    Rng rng(seed);
    for (int c = 0; c < cases; ++c) {
        ++r.cases;
        const double dt = 0.1;
        const int N = rand_int(rng, 6, 40);
        ControllerDefinition controller = random_controller(rng, dt);

        SimulationConfig cfg{N, dt, 1};
        ChainState s = init_zero(cfg, controller.n_xi, controller.n_c);
        // dyadic uniform spacing/velocity ladder: every e_k and edot_k is the
        // exact same double
        const double spacing = rand_dyadic(rng, 1024, 8);
        const double closing = rand_dyadic(rng, 1024, 8);
        const double x0 = rand_dyadic(rng, 1024, 8);
        const double v0 = rand_dyadic(rng, 1024, 8);
        for (int k = 0; k <= N; ++k) {
            s.x[k] = x0 - k * spacing;
            s.v[k] = v0 - k * closing;
        }
        for (int k = 0; k <= N; ++k) {
            for (int i = 0; i < controller.n_xi; ++i) {
                s.xi[static_cast<size_t>(k) * controller.n_xi + i] = 0.375;
            }
            for (int i = 0; i < controller.n_c; ++i) {
                s.c_plus[static_cast<size_t>(k) * controller.n_c + i] = -0.125;
                s.c_minus[static_cast<size_t>(k) * controller.n_c + i] = 0.0625;
            }
        }

        ChainControls out = evaluate_chain(controller, s, dt, Exec::Serial);
        const int lo = controller.m1 + 1;      // full window, no absent slots
        const int hi = N - controller.m2;
        if (hi - lo < 1) continue;
        const int j = rand_int(rng, lo, hi);
        const int k = rand_int(rng, lo, hi);
        bool same = out.u1[j] == out.u1[k] && out.u2[j] == out.u2[k];
        for (int i = 0; i < controller.n_xi && same; ++i) {
            same = out.next_xi[static_cast<size_t>(j) * controller.n_xi + i] ==
                   out.next_xi[static_cast<size_t>(k) * controller.n_xi + i];
        }
        // g1 output of vehicle j lands in row j+1, g2 in row j-1
        for (int i = 0; i < controller.n_c && same; ++i) {
            same = out.next_c_plus[static_cast<size_t>(j + 1) * controller.n_c + i] ==
                       out.next_c_plus[static_cast<size_t>(k + 1) * controller.n_c + i] &&
                   out.next_c_minus[static_cast<size_t>(j - 1) * controller.n_c + i] ==
                       out.next_c_minus[static_cast<size_t>(k - 1) * controller.n_c + i];
        }
        if (!same) {
            note_failure(r, "case " + std::to_string(c) + ": vehicles " + std::to_string(j) +
                                " and " + std::to_string(k) + " disagree under " +
                                controller.name);
        }
    }
    return r;
}

SuiteResult determinism_round_trip(std::uint64_t seed, int cases) {
    SuiteResult r{"determinism-round-trip", seed};
    Rng rng(seed);
    for (int c = 0; c < cases; ++c) {
        ++r.cases;
        ExperimentConfig cfg;
        cfg.N_values = {rand_int(rng, 3, 20)};
        cfg.dt = rand_int(rng, 0, 1) ? 0.1 : 0.05;
        cfg.horizon = HorizonRule{HorizonRuleKind::Steps, rand_int(rng, 5, 40), 0.0};
        const int ctrl = rand_int(rng, 0, 3);
        if (ctrl == 0) {
            cfg.controller.name = "zero";
        } else if (ctrl == 1) {
            cfg.controller.name = "pd-asymmetric";
            cfg.controller.params = {{"a", rand_real(rng, 0.2, 1.5)},
                                     {"b1", rand_real(rng, 0.2, 2.0)},
                                     {"b2", rand_real(rng, 0.1, 1.0)}};
        } else if (ctrl == 2) {
            cfg.controller.name = "pd-symmetric";
            cfg.controller.params = {{"a", rand_real(rng, 0.2, 1.5)},
                                     {"b", rand_real(rng, 0.2, 1.5)}};
        } else {
            cfg.controller.name = "nonlinear-comm";
            cfg.controller.params = {{"kappa", rand_real(rng, 0.3, 1.5)},
                                     {"sat_limit", rand_real(rng, 0.2, 1.0)}};
        }
        const int dist = rand_int(rng, 0, 2);
        if (dist == 0) {
            cfg.disturbance.kind = DisturbanceKind::Zero;
        } else if (dist == 1) {
            cfg.disturbance.kind = DisturbanceKind::RampStep;
            cfg.disturbance.alpha = rand_real(rng, 0.1, 2.0);
        } else {
            cfg.disturbance.kind = DisturbanceKind::RampWindowed;
            cfg.disturbance.alpha = rand_real(rng, 0.1, 2.0);
            const long t_steps = rand_int(rng, 1, 5);
            cfg.disturbance.T = TRule{TRuleKind::Value, t_steps * cfg.dt};
        }

        const int N = cfg.N_values.front();
        ControllerDefinition controller = make_controller(cfg.controller, cfg.dt);
        DisturbanceProfile profile =
            resolve_profile(cfg.disturbance, N, cfg.dt, controller.m1, controller.m2);
        SimulationConfig sim{N, cfg.dt, cfg.horizon->steps};

        RunResult serial = simulate(sim, controller, profile, {Exec::Serial, true});
        RunResult parallel = simulate(sim, controller, profile, {Exec::Parallel, true});
        RunResult again = simulate(sim, controller, profile, {Exec::Parallel, true});
        if (!bits_equal(serial.errors.e, parallel.errors.e) ||
            !bits_equal(parallel.errors.e, again.errors.e) ||
            !bits_equal(serial.x_history, parallel.x_history)) {
            note_failure(r, "case " + std::to_string(c) + ": runs not bit-identical");
            continue;
        }

        // config -> JSON -> config reproduces the trajectory file byte for byte
        ExperimentConfig reparsed = parse_config(to_json(cfg));
        ControllerDefinition controller2 = make_controller(reparsed.controller, reparsed.dt);
        DisturbanceProfile profile2 = resolve_profile(reparsed.disturbance, N, reparsed.dt,
                                                      controller2.m1, controller2.m2);
        SimulationConfig sim2{reparsed.N_values.front(), reparsed.dt, reparsed.horizon->steps};
        RunResult rerun = simulate(sim2, controller2, profile2, {Exec::Parallel, true});
        std::ostringstream csv_a, csv_b;
        write_trajectory_csv(csv_a, serial, profile, controller.m1, controller.m2);
        write_trajectory_csv(csv_b, rerun, profile2, controller2.m1, controller2.m2);
        if (csv_a.str() != csv_b.str()) {
            note_failure(r, "case " + std::to_string(c) + ": round-tripped config CSV differs");
        }
    }
    return r;
}

std::vector<SuiteResult> run_all(int cases) {
    return {
        galilean_invariance(0xC0FFEE01, cases),
        propagation_cone(0xC0FFEE02, cases),
        homogeneity_bit_equality(0xC0FFEE03, cases),
        determinism_round_trip(0xC0FFEE04, cases),
    };
}

}  // namespace chainsim::props
