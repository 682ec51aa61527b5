#pragma once

#include <cstddef>
#include <vector>

#include "chainsim/exec.hpp"

namespace chainsim {

/// Parameters of the closed-form ramp response; must match the simulated
/// configuration exactly.
struct OracleParams {
    double alpha = 1.0;
    int N = 1;
    double dt = 0.1;
    int m1 = 0;
    int m2 = 0;
};

struct OraclePoint {
    double e = 0.0;
    double edot = 0.0;
};

/// Closed-form response of every centrally located vehicle to the graded
/// ramp from a zero-initialized chain, independent of the controller:
///   e(t) = t*(t+dt)*alpha/(2N),  edot(t) = t*alpha/N.
/// t must be a nonnegative grid multiple of dt.
OraclePoint ramp_oracle(const OracleParams& params, double t);

/// Inclusive integer range; empty when hi < lo.
struct IndexRange {
    int lo = 0;
    int hi = -1;
    bool empty() const { return hi < lo; }
    int count() const { return empty() ? 0 : hi - lo + 1; }
    bool contains(int k) const { return k >= lo && k <= hi; }
};

/// Vehicles still unaffected by boundary information at time t: the integers
/// strictly between (t/dt)*m1 and N - (t/dt)*m2.
IndexRange oracle_window(const OracleParams& params, double t);

/// Largest ramp duration for which the closed form still covers about half
/// the chain: N*dt/(2*(m1+m2)), rounded down to the step grid.
double oracle_horizon(int N, double dt, int m1, int m2);

/// Spacing-error trajectories of one run: e(n, k) for steps n = 0..steps and
/// vehicles k = 1..N, stored row-major.
struct ErrorHistory {
    int N = 0;
    double dt = 0.0;
    long steps = 0;
    std::vector<double> e;  // (steps+1) * N

    double at(long n, int k) const { return e[static_cast<size_t>(n) * N + (k - 1)]; }
    double& at(long n, int k) { return e[static_cast<size_t>(n) * N + (k - 1)]; }
};

/// String-stability criterion: definition id plus norm parameters. C1 is the
/// disturbance budget used when resolving amplitudes.
struct StabilityCriterion {
    int definition_id = 4;
    int p = 2;
    int q = 2;
    double C1 = 1.0;
};

/// Per-vehicle error energies sum_n |e_k(n dt)|^p * dt (the error side of
/// definitions 1 and 3), over the full recorded history.
std::vector<double> error_metric_per_vehicle(const ErrorHistory& history, int p,
                                             Exec exec = Exec::Serial);

/// Scalar error metric of the selected definition restricted to the given
/// vehicle range: defs 1/3 take the max of the per-vehicle energies, def 2
/// sums their (q/p)-th powers, def 4 is the pointwise max of |e|.
double error_metric(const ErrorHistory& history, const StabilityCriterion& criterion,
                    IndexRange vehicles, Exec exec = Exec::Serial);

/// Closed-form counterpart of error_metric for the budget-saturating ramp:
/// the in-window trajectory is the oracle, so the metric follows from it and
/// the window size alone. steps is the evaluated horizon T/dt.
double oracle_error_metric(const StabilityCriterion& criterion, const OracleParams& params,
                           long steps);

/// N-growth exponent of the error metric under the budget-saturating ramp
/// with the half-coverage horizon:
///   def 1 -> p - p/q,  def 2 -> q,  def 3 -> p,  def 4 -> 1.
double reference_growth_exponent(int definition_id, int p, int q);

struct ScalingSample {
    int N = 0;
    double metric = 0.0;
};

/// Least-squares slope of log(metric) against log(N). Requires >= 3 samples
/// with distinct N and positive metrics.
double fit_exponent(const std::vector<ScalingSample>& samples);

/// Result of one N-sweep against a criterion.
struct ScalingReport {
    StabilityCriterion criterion;
    std::vector<ScalingSample> samples;  // sorted by N
    double fitted_exponent = 0.0;
    double reference_exponent = 0.0;
};

/// Sorts the samples by N, fits the growth exponent and pairs it with the
/// criterion's reference value.
ScalingReport make_scaling_report(const StabilityCriterion& criterion,
                                  std::vector<ScalingSample> samples);

}  // namespace chainsim
