#include "chainsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "chainsim/errors.hpp"

namespace chainsim {

namespace {

long grid_index(double t, double dt) {
    if (t < 0.0) throw GridError("t must be >= 0");
    const double ratio = t / dt;
    const long n = std::lround(ratio);
    if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, std::abs(ratio))) {
        throw GridError("t = " + std::to_string(t) + " is not on the dt grid");
    }
    return n;
}

}  // namespace

OraclePoint ramp_oracle(const OracleParams& params, double t) {
    grid_index(t, params.dt);
    return {t * (t + params.dt) * params.alpha / (2.0 * params.N),
            t * params.alpha / params.N};
}

IndexRange oracle_window(const OracleParams& params, double t) {
    const long n = grid_index(t, params.dt);
    const long lo_excl = n * params.m1;
    const long hi_excl = params.N - n * params.m2;
    IndexRange r;
    r.lo = static_cast<int>(lo_excl + 1);
    r.hi = static_cast<int>(hi_excl - 1);
    if (r.hi < r.lo) { r.lo = 0; r.hi = -1; }
    return r;
}

double oracle_horizon(int N, double dt, int m1, int m2) {
    if (m1 + m2 < 1) throw ParameterError("oracle_horizon requires m1 + m2 >= 1");
    const long steps = N / (2 * (m1 + m2));  // exact integer floor
    return static_cast<double>(steps) * dt;
}

std::vector<double> error_metric_per_vehicle(const ErrorHistory& history, int p, Exec exec) {
    if (history.steps < 0 || history.N < 1) throw ParameterError("empty history");
    if (p < 1) throw ParameterError("p must be >= 1");
    std::vector<double> out(history.N, 0.0);
    auto body = [&](int k) {
        double acc = 0.0;
        for (long n = 0; n <= history.steps; ++n) {
            acc += std::pow(std::abs(history.at(n, k)), p) * history.dt;
        }
        out[k - 1] = acc;
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int k = 1; k <= history.N; ++k) body(k);
    } else {
        for (int k = 1; k <= history.N; ++k) body(k);
    }
    return out;
}

double error_metric(const ErrorHistory& history, const StabilityCriterion& criterion,
                    IndexRange vehicles, Exec exec) {
    const int def = criterion.definition_id;
    if (def < 1 || def > 4) throw ParameterError("definition id must be 1..4");
    if (vehicles.empty()) throw ScenarioError("error_metric: empty vehicle range");
    if (vehicles.lo < 1 || vehicles.hi > history.N) {
        throw ParameterError("vehicle range outside 1..N");
    }
    if (def == 4) {
        double worst = 0.0;
        for (long n = 0; n <= history.steps; ++n) {
            for (int k = vehicles.lo; k <= vehicles.hi; ++k) {
                worst = std::max(worst, std::abs(history.at(n, k)));
            }
        }
        return worst;
    }
    const std::vector<double> per_vehicle = error_metric_per_vehicle(history, criterion.p, exec);
    if (def == 2) {
        const double expo = static_cast<double>(criterion.q) / criterion.p;
        double total = 0.0;
        for (int k = vehicles.lo; k <= vehicles.hi; ++k) {
            total += std::pow(per_vehicle[k - 1], expo);
        }
        return total;
    }
    // definitions 1 and 3 share the per-vehicle error side
    double worst = 0.0;
    for (int k = vehicles.lo; k <= vehicles.hi; ++k) {
        worst = std::max(worst, per_vehicle[k - 1]);
    }
    return worst;
}

double oracle_error_metric(const StabilityCriterion& criterion, const OracleParams& params,
                           long steps) {
    const int def = criterion.definition_id;
    if (def < 1 || def > 4) throw ParameterError("definition id must be 1..4");
    if (steps < 0) throw ParameterError("steps must be >= 0");
    const double T = static_cast<double>(steps) * params.dt;
    const IndexRange window = oracle_window(params, T);
    if (window.empty()) {
        throw ScenarioError("empty oracle window at T for N = " + std::to_string(params.N));
    }
    if (def == 4) return ramp_oracle(params, T).e;
    double energy = 0.0;  // per-vehicle sum, identical for every in-window vehicle
    for (long n = 0; n <= steps; ++n) {
        const double e = ramp_oracle(params, static_cast<double>(n) * params.dt).e;
        energy += std::pow(std::abs(e), criterion.p) * params.dt;
    }
    if (def == 2) {
        const double expo = static_cast<double>(criterion.q) / criterion.p;
        return window.count() * std::pow(energy, expo);
    }
    return energy;
}

double reference_growth_exponent(int definition_id, int p, int q) {
    switch (definition_id) {
        case 1:
            if (p < 1 || q < 1) throw ParameterError("definition 1 requires p, q >= 1");
            return static_cast<double>(p) - static_cast<double>(p) / q;
        case 2:
            if (p < 1 || q < 1) throw ParameterError("definition 2 requires p, q >= 1");
            return static_cast<double>(q);
        case 3:
            if (p < 1) throw ParameterError("definition 3 requires p >= 1");
            return static_cast<double>(p);
        case 4:
            return 1.0;
        default:
            throw ParameterError("definition id must be 1..4");
    }
}

ScalingReport make_scaling_report(const StabilityCriterion& criterion,
                                  std::vector<ScalingSample> samples) {
    std::sort(samples.begin(), samples.end(),
              [](const ScalingSample& a, const ScalingSample& b) { return a.N < b.N; });
    ScalingReport r;
    r.criterion = criterion;
    r.fitted_exponent = fit_exponent(samples);
    r.reference_exponent =
        reference_growth_exponent(criterion.definition_id, criterion.p, criterion.q);
    r.samples = std::move(samples);
    return r;
}

double fit_exponent(const std::vector<ScalingSample>& samples) {
    if (samples.size() < 3) throw FitError("need at least 3 samples");
    std::set<int> ns;
    for (const auto& s : samples) {
        if (!(s.metric > 0.0)) throw FitError("metrics must be positive for a log-log fit");
        ns.insert(s.N);
    }
    if (ns.size() != samples.size()) throw FitError("N values must be distinct");
    const double m = static_cast<double>(samples.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& s : samples) {
        const double x = std::log(static_cast<double>(s.N));
        const double y = std::log(s.metric);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace chainsim
