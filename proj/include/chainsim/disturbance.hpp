#pragma once

#include <string>

namespace chainsim {

enum class DisturbanceKind { Zero, RampWindowed, RampStep };

std::string to_string(DisturbanceKind kind);

/// Deterministic per-vehicle disturbance profile.
///
/// The ramp kinds grade the input linearly along the chain with per-step
/// magnitudes |d_{k,1}| = alpha*k*dt/N and |d_{k,2}| = alpha*k*dt^2/N, applied
/// with a common negative sign so that consecutive-vehicle differences come
/// out as d_{k-1,s} - d_{k,s} = +alpha*dt^s/N and the spacing errors of a
/// zero-initialized chain grow positive. RampWindowed is active on the grid
/// t = 0, dt, ..., T (both endpoints included); RampStep applies the same
/// values for every t >= 0.
struct DisturbanceProfile {
    DisturbanceKind kind = DisturbanceKind::Zero;
    double alpha = 0.0;  // amplitude, >= 0
    double T = 0.0;      // window end, multiple of dt; ignored for RampStep/Zero

    void validate(double dt) const;  // throws ConfigError / GridError
};

struct DisturbancePair {
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Norm budget for one string-stability definition's disturbance side.
struct AmplitudeBudget {
    int definition_id = 4;  // 1..4
    int p = 2;
    int q = 2;   // unused for definitions 3 and 4
    double C1 = 1.0;

    void validate() const;  // throws ParameterError
};

/// Number of active grid steps of the profile starting at n = 0, i.e. the
/// largest n with a nonzero sample (T/dt for the windowed ramp). For
/// RampStep the profile never ends and the caller's horizon applies.
long support_steps(const DisturbanceProfile& profile, double dt);

/// Disturbance pair for vehicle k at step n (t = n*dt).
DisturbancePair sample(const DisturbanceProfile& profile, int k, long n, int N, double dt);

/// Left-hand-side disturbance norm of the selected definition, evaluated by
/// exact summation over k = 0..N and grid steps n = 0..horizon_steps:
///   defs 1/2: sum_s sum_k (sum_n |d_{k,s}/dt^s|^p dt)^(q/p)
///   def 3:    max_{k,s}   sum_n |d_{k,s}/dt^s|^p dt
///   def 4:    max_{k,s,n} |d_{k,s}|/dt^s
/// horizon_steps must cover the profile support (mandatory for RampStep,
/// where only definition 4 has a finite untruncated value).
double disturbance_norm(const DisturbanceProfile& profile, const AmplitudeBudget& budget,
                        int N, double dt, long horizon_steps);

/// Largest alpha whose windowed ramp of duration T satisfies the budget,
/// obtained by exact inversion: the norm is homogeneous in alpha of degree
/// q (defs 1/2), p (def 3) or 1 (def 4).
double admissible_alpha(const AmplitudeBudget& budget, int N, double T, double dt);

}  // namespace chainsim
