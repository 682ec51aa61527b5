#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "chainsim/chain.hpp"
#include "chainsim/exec.hpp"

namespace chainsim {

/// Windowed view of the spacing errors around one vehicle.
///
/// Slot i covers error index k - m1 + i for i = 0..m1+m2; the window always
/// has m1 + m2 + 1 slots. Slots whose error index falls outside 1..N are
/// absent: present[i] == 0 and the value holds NaN, never a silent zero.
struct NeighborhoodWindow {
    std::span<const double> e;
    std::span<const double> edot;
    std::span<const std::uint8_t> present;
    int m1 = 0;
    int m2 = 0;

    int size() const { return m1 + m2 + 1; }

    // access by offset r relative to the vehicle's own error e_k (r = 0)
    bool present_rel(int r) const { return present[m1 + r] != 0; }
    double e_rel(int r) const { return e[m1 + r]; }
    double edot_rel(int r) const { return edot[m1 + r]; }
    // absent terms read as zero, i.e. the term is dropped from a sum
    double e_or_zero(int r) const { return present_rel(r) ? e[m1 + r] : 0.0; }
    double edot_or_zero(int r) const { return present_rel(r) ? edot[m1 + r] : 0.0; }
};

/// Everything a control law may look at for one vehicle: its error window,
/// the communication values delivered this step, its memory, the chain size
/// and the current time. There is deliberately no vehicle index.
struct ControllerInputs {
    NeighborhoodWindow window;
    std::span<const double> c_plus;
    std::span<const double> c_minus;
    std::span<const double> xi;
    int chain_n = 0;
    double time = 0.0;
};

/// A homogeneous control law: the same five pure maps are evaluated at every
/// vehicle. f1/f2 produce the once/twice-integrated control for the next
/// step; g1 is sent forward (delivered to vehicle k+1 one step later), g2 is
/// sent backward (to vehicle k-1); h updates the memory vector.
struct ControllerDefinition {
    std::string name;
    int m1 = 0;    // neighborhood radius ahead
    int m2 = 0;    // neighborhood radius behind
    int n_xi = 0;  // memory dimension
    int n_c = 0;   // communication signal dimension

    std::function<double(const ControllerInputs&)> f1;
    std::function<double(const ControllerInputs&)> f2;
    std::function<void(const ControllerInputs&, std::span<double>)> g1;
    std::function<void(const ControllerInputs&, std::span<double>)> g2;
    std::function<void(const ControllerInputs&, std::span<double>)> h;
};

/// Outputs of one whole-chain controller evaluation. The next_* arrays are
/// already routed: next_c_plus row k holds what vehicle k-1 sent forward,
/// next_c_minus row k what vehicle k+1 sent backward; rows with no sender
/// are zero.
struct ChainControls {
    std::vector<double> u1;            // N+1
    std::vector<double> u2;            // N+1
    std::vector<double> next_c_plus;   // (N+1) * n_c
    std::vector<double> next_c_minus;  // (N+1) * n_c
    std::vector<double> next_xi;       // (N+1) * n_xi
};

/// Evaluates the controller at every vehicle against the frozen pre-step
/// state (Jacobi style: all windows are gathered first, results never feed
/// back within the step). Signals produced here are consumed one step later.
/// dt is only used to derive the physical time passed to the maps.
ChainControls evaluate_chain(const ControllerDefinition& controller, const ChainState& state,
                             double dt, Exec exec = Exec::Serial);

/// Effective window used by the built-in laws at the chain ends: absent
/// slots are replaced by zero so that every term referencing a missing
/// neighbor drops out of the sums. User-defined laws receive the raw window
/// (mask plus NaN) and make their own choice.
struct AdaptedWindow {
    std::vector<double> e;
    std::vector<double> edot;
    int m1 = 0;
    int m2 = 0;
};
AdaptedWindow boundary_adapt(const ControllerDefinition& controller, const NeighborhoodWindow& window);

// ---- built-in controllers -------------------------------------------------

/// No actuation at all (m1 = m2 = 0).
ControllerDefinition zero_controller();

/// Bidirectional PD with symmetric position gain a and asymmetric velocity
/// gains b1 (front) / b2 (rear), sample-and-hold actuation:
///   f = b1*(v_{k-1}-v_k) + b2*(v_{k+1}-v_k) + a*(x_{k-1}-x_k) + a*(x_{k+1}-x_k)
///   u1 = f*dt, u2 = f*dt^2/2
/// Terms referencing a missing neighbor are dropped at the chain ends.
ControllerDefinition pd_asymmetric(double a, double b1, double b2, double dt);

/// pd_asymmetric with b1 == b2.
ControllerDefinition pd_symmetric(double a, double b, double dt);

/// Saturated nonlinear law with one memory value and one communication
/// channel per direction; exercises the full controller interface:
///   forward signal  g1 = e_k, backward signal g2 = e_{k+1}
///   memory          h  = 0.5*xi + 0.5*e_k           (leaky average)
///   control         f  = clamp(kappa*(e_k - e_{k+1} + c_plus - c_minus + xi))
/// clamped to +-sat_limit, u1 = f*dt, u2 = f*dt^2/2.
ControllerDefinition nonlinear_comm_controller(double kappa, double sat_limit, double dt);

}  // namespace chainsim
