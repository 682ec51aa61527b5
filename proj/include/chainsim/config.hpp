#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "chainsim/analysis.hpp"
#include "chainsim/controller.hpp"
#include "chainsim/disturbance.hpp"

namespace chainsim {

/// How a step count is derived from the chain parameters:
///   LemmaWindow -> the half-coverage horizon N*dt/(2*(m1+m2))
///   Fig2        -> N*dt/5
///   Steps/Time  -> explicit; times are floored to the grid.
enum class HorizonRuleKind { LemmaWindow, Fig2, Steps, Time };

struct HorizonRule {
    HorizonRuleKind kind = HorizonRuleKind::LemmaWindow;
    long steps = 0;
    double time = 0.0;
};

enum class TRuleKind { Value, LemmaWindow, Fig2 };

struct TRule {
    TRuleKind kind = TRuleKind::LemmaWindow;
    double value = 0.0;
};

struct ControllerSpec {
    std::string name = "zero";
    nlohmann::json params = nlohmann::json::object();
};

struct DisturbanceSpec {
    DisturbanceKind kind = DisturbanceKind::Zero;
    std::optional<double> alpha;           // explicit amplitude
    std::optional<AmplitudeBudget> budget; // or: amplitude from a budget
    std::optional<TRule> T;
};

struct OutputSpec {
    std::string trajectory_csv = "trajectory.csv";
    std::string report_json = "report.json";
    std::string plot_data = "plotdata.csv";
};

enum class SweepMode { Oracle, Simulation, Both };

/// One experiment: chain parameters, controller, disturbance, criterion and
/// output locations. Parsed strictly from JSON (schema_version "1"); unknown
/// fields are rejected with their path.
struct ExperimentConfig {
    std::vector<int> N_values;  // one entry unless the config carried N_list
    bool has_N_list = false;
    double dt = 0.1;
    std::optional<HorizonRule> horizon;
    ControllerSpec controller;
    DisturbanceSpec disturbance;
    std::optional<StabilityCriterion> criterion;
    SweepMode sweep_mode = SweepMode::Both;
    OutputSpec outputs;

    int single_N() const;  // throws ConfigError when the config carries a list
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Instantiates a controller by name. Built-ins: "zero", "pd-asymmetric"
/// {a, b1, b2}, "pd-symmetric" {a, b}, "nonlinear-comm" {kappa, sat_limit}.
/// Additional laws can be registered programmatically.
ControllerDefinition make_controller(const ControllerSpec& spec, double dt);

using ControllerFactory =
    std::function<ControllerDefinition(const nlohmann::json& params, double dt)>;
void register_controller(const std::string& name, ControllerFactory factory);

// ---- rule resolution -------------------------------------------------------

/// Window end T for the given chain; rule times are floored to the grid,
/// explicit values must already lie on it.
double resolve_T(const TRule& rule, int N, double dt, int m1, int m2);

/// Ramp amplitude: explicit alpha, or the admissible amplitude of the budget
/// for the resolved T.
double resolve_alpha(const DisturbanceSpec& spec, int N, double dt, int m1, int m2);

/// Concrete profile for one chain size.
DisturbanceProfile resolve_profile(const DisturbanceSpec& spec, int N, double dt, int m1, int m2);

/// Step count from the horizon rule (>= 1).
long resolve_horizon_steps(const HorizonRule& rule, int N, double dt, int m1, int m2);

}  // namespace chainsim
