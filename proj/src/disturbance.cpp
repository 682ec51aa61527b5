#include "chainsim/disturbance.hpp"

#include <cmath>
#include <string>

#include "chainsim/errors.hpp"

namespace chainsim {

std::string to_string(DisturbanceKind kind) {
    switch (kind) {
        case DisturbanceKind::Zero: return "zero";
        case DisturbanceKind::RampWindowed: return "ramp-windowed";
        case DisturbanceKind::RampStep: return "ramp-step";
    }
    return "?";
}

namespace {

long grid_steps(double T, double dt) {
    const double ratio = T / dt;
    const long n = std::lround(ratio);
    if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, std::abs(ratio))) {
        throw GridError("T = " + std::to_string(T) + " is not a multiple of dt = " +
                        std::to_string(dt));
    }
    return n;
}

}  // namespace

void DisturbanceProfile::validate(double dt) const {
    if (!(alpha >= 0.0)) throw ConfigError("disturbance.alpha must be >= 0");
    if (kind == DisturbanceKind::RampWindowed) {
        if (T < 0.0) throw ConfigError("disturbance.T must be >= 0");
        grid_steps(T, dt);
    }
}

void AmplitudeBudget::validate() const {
    if (definition_id < 1 || definition_id > 4) {
        throw ParameterError("definition id must be 1..4, got " + std::to_string(definition_id));
    }
    if (definition_id <= 3 && p < 1) throw ParameterError("p must be a positive integer");
    if (definition_id <= 2 && q < 1) throw ParameterError("q must be a positive integer");
    if (!(C1 > 0.0)) throw ParameterError("C1 must be > 0");
}

long support_steps(const DisturbanceProfile& profile, double dt) {
    switch (profile.kind) {
        case DisturbanceKind::Zero: return -1;
        case DisturbanceKind::RampWindowed: return grid_steps(profile.T, dt);
        case DisturbanceKind::RampStep: return -2;  // unbounded
    }
    return -1;
}

DisturbancePair sample(const DisturbanceProfile& profile, int k, long n, int N, double dt) {
    if (k < 0 || k > N) throw IndexError("vehicle index " + std::to_string(k) + " out of 0.." +
                                         std::to_string(N));
    if (profile.kind == DisturbanceKind::Zero || n < 0) return {};
    if (profile.kind == DisturbanceKind::RampWindowed && n > grid_steps(profile.T, dt)) return {};
    const double base = -(profile.alpha * k * dt) / N;
    if (base == 0.0) return {};  // normalize -0.0 away (k = 0 or alpha = 0)
    return {base, base * dt};
}

double disturbance_norm(const DisturbanceProfile& profile, const AmplitudeBudget& budget,
                        int N, double dt, long horizon_steps) {
    budget.validate();
    profile.validate(dt);
    if (horizon_steps < 0) throw ParameterError("horizon_steps must be >= 0");
    const long sup = support_steps(profile, dt);
    if (sup >= 0 && horizon_steps < sup) {
        throw ParameterError("horizon does not cover the disturbance support (" +
                             std::to_string(horizon_steps) + " < " + std::to_string(sup) + ")");
    }

    const int def = budget.definition_id;
    const double p = budget.p;
    const double q = budget.q;

    // per-vehicle, per-channel time accumulation; s = 1, 2 indexes the
    // once/twice-integrated channel and |d_{k,s}|/dt^s removes the dt scaling
    auto channel_sum = [&](int k, int s) {
        double acc = 0.0;
        const double scale = (s == 1) ? dt : dt * dt;
        for (long n = 0; n <= horizon_steps; ++n) {
            const DisturbancePair d = sample(profile, k, n, N, dt);
            const double normalized = std::abs((s == 1 ? d.d1 : d.d2) / scale);
            acc += std::pow(normalized, p) * dt;
        }
        return acc;
    };

    if (def == 1 || def == 2) {
        double total = 0.0;
        for (int s = 1; s <= 2; ++s) {
            for (int k = 0; k <= N; ++k) {
                total += std::pow(channel_sum(k, s), q / p);
            }
        }
        return total;
    }
    if (def == 3) {
        double worst = 0.0;
        for (int s = 1; s <= 2; ++s) {
            for (int k = 0; k <= N; ++k) {
                worst = std::max(worst, channel_sum(k, s));
            }
        }
        return worst;
    }
    // definition 4: pointwise bound
    double worst = 0.0;
    const long scan = (profile.kind == DisturbanceKind::RampStep)
                          ? std::min(horizon_steps, 0L)  // constant in n, one sample suffices
                          : horizon_steps;
    for (int k = 0; k <= N; ++k) {
        for (long n = 0; n <= scan; ++n) {
            const DisturbancePair d = sample(profile, k, n, N, dt);
            worst = std::max(worst, std::abs(d.d1 / dt));
            worst = std::max(worst, std::abs(d.d2 / (dt * dt)));
        }
    }
    return worst;
}

double admissible_alpha(const AmplitudeBudget& budget, int N, double T, double dt) {
    budget.validate();
    if (N < 1) throw ParameterError("N must be >= 1");
    if (!(T >= 0.0)) throw ParameterError("T must be >= 0");
    DisturbanceProfile unit{DisturbanceKind::RampWindowed, 1.0, T};
    const long steps = support_steps(unit, dt);
    const double unit_norm = disturbance_norm(unit, budget, N, dt, steps);
    if (unit_norm == 0.0) throw ParameterError("degenerate profile: unit norm is zero");
    const double degree = (budget.definition_id <= 2)   ? budget.q
                          : (budget.definition_id == 3) ? budget.p
                                                        : 1.0;
    return std::pow(budget.C1 / unit_norm, 1.0 / degree);
}

}  // namespace chainsim
