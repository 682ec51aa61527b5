#pragma once

#include <span>
#include <utility>
#include <vector>

#include "chainsim/exec.hpp"

namespace chainsim {

/// Static parameters of one run. The chain has N+1 vehicles (leader is
/// vehicle 0) and is advanced with a fixed update period dt that is never
/// adapted to the chain length.
struct SimulationConfig {
    int N = 1;          // chain size parameter, vehicles are k = 0..N
    double dt = 0.1;    // controller update period [s]
    long horizon = 1;   // number of steps to advance

    void validate() const;  // throws ConfigError
};

/// Full state of the chain at one time step.
///
/// Positions/velocities are absolute, but controllers only ever see the
/// spacing errors e_k = x_{k-1} - x_k and their rates. Each vehicle carries a
/// controller memory vector (n_xi entries) and the communication values
/// delivered to it for the current step: c_plus from its predecessor,
/// c_minus from its follower (n_c entries each).
///
/// States are immutable snapshots; advancing produces a new value.
struct ChainState {
    long step = 0;  // physical time is step * dt
    std::vector<double> x;        // N+1 positions
    std::vector<double> v;        // N+1 velocities
    std::vector<double> xi;       // (N+1) * n_xi, row per vehicle
    std::vector<double> c_plus;   // (N+1) * n_c, incoming forward signals
    std::vector<double> c_minus;  // (N+1) * n_c, incoming backward signals
    int n_xi = 0;
    int n_c = 0;

    int vehicle_count() const { return static_cast<int>(x.size()); }
    int chain_n() const { return vehicle_count() - 1; }

    std::span<const double> xi_of(int k) const { return {xi.data() + static_cast<size_t>(k) * n_xi, static_cast<size_t>(n_xi)}; }
    std::span<const double> c_plus_of(int k) const { return {c_plus.data() + static_cast<size_t>(k) * n_c, static_cast<size_t>(n_c)}; }
    std::span<const double> c_minus_of(int k) const { return {c_minus.data() + static_cast<size_t>(k) * n_c, static_cast<size_t>(n_c)}; }
};

/// Per-step inputs for one exact discretization step: u1/d1 enter the
/// velocity update, u2/d2 the position update (control and disturbance
/// integrated once resp. twice over the step).
struct StepInput {
    std::span<const double> u1;
    std::span<const double> u2;
    std::span<const double> d1;
    std::span<const double> d2;
};

/// All-zero state for the given configuration and controller dimensions.
ChainState init_zero(const SimulationConfig& config, int n_xi = 0, int n_c = 0);

/// One exact step of the chain of double integrators:
///   v_k' = v_k + u1_k + d1_k
///   x_k' = x_k + v_k * dt + u2_k + d2_k   (pre-step velocity)
/// Memory and communication fields are carried over unchanged; the
/// controller layer owns their update.
ChainState step(const ChainState& state, const StepInput& input, double dt,
                Exec exec = Exec::Serial);

/// Spacing errors e_k = x_{k-1} - x_k and rates for k = 1..N.
/// Output spans must have length N.
void spacing_errors(const ChainState& state, std::span<double> e, std::span<double> edot);
std::pair<std::vector<double>, std::vector<double>> spacing_errors(const ChainState& state);

}  // namespace chainsim
