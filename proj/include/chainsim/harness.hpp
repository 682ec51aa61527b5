#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chainsim/config.hpp"
#include "chainsim/simulate.hpp"

namespace chainsim {

/// Deterministic shortest-faithful text form used in every emitted file.
std::string format_double(double value);

// ---- closed-form verification ----------------------------------------------

struct LemmaVerification {
    int N = 0;
    double dt = 0.0;
    double T = 0.0;
    long steps = 0;
    double alpha = 0.0;
    std::string controller_name;
    double tolerance = 1e-9;
    double max_rel_dev_e = 0.0;
    double max_rel_dev_edot = 0.0;
    long points_checked = 0;
    bool pass = false;
};

/// Simulates the configured ramp scenario from the all-zero state and
/// compares every vehicle inside the shrinking oracle window against the
/// closed form, for all grid times up to the half-coverage horizon (or the
/// configured shorter window).
LemmaVerification verify_lemma(const ExperimentConfig& config, double tolerance = 1e-9,
                               Exec exec = Exec::Serial);
void write_lemma_report(const LemmaVerification& v, std::ostream& out);

// ---- single simulation -------------------------------------------------------

struct SimulationSummary {
    int N = 0;
    double dt = 0.0;
    long steps = 0;
    std::string controller_name;
    double alpha = 0.0;
    double max_abs_e = 0.0;
    // error metrics over all vehicles for each definition, with the
    // configured criterion's (p, q) (default 2, 2)
    double def1_max_per_vehicle = 0.0;
    double def2_sum = 0.0;
    double def3_max_per_vehicle = 0.0;
    double def4_sup = 0.0;
    std::optional<double> oracle_max_rel_dev;  // ramp runs only
    std::optional<double> tail_variation;      // max_k |e_k(end) - e_k(end-100)|
};

/// Runs one simulation and writes the trajectory CSV (long format:
/// n,t,k,x,v,e,edot,d1,d2,in_window), a plot-ready wide table of e_k(t) and
/// a JSON report; returns the summary.
SimulationSummary run_simulation(const ExperimentConfig& config,
                                 const std::filesystem::path& out_dir,
                                 Exec exec = Exec::Serial);

void write_trajectory_csv(std::ostream& out, const RunResult& run,
                          const DisturbanceProfile& disturbance, int m1, int m2);
void write_error_table(std::ostream& out, const RunResult& run);

// ---- scaling sweep -----------------------------------------------------------

struct SweepPoint {
    int N = 0;
    long steps = 0;
    double T = 0.0;
    double alpha = 0.0;
    int window_count = 0;
    std::optional<double> oracle_metric;
    std::optional<double> sim_metric;
    std::optional<double> rel_gap;
};

struct SweepResult {
    StabilityCriterion criterion;
    std::string controller_name;
    double dt = 0.0;
    int m1 = 0;
    int m2 = 0;
    SweepMode mode = SweepMode::Both;
    std::vector<SweepPoint> points;  // sorted by N
    std::optional<double> fitted_exponent_oracle;
    std::optional<double> fitted_exponent_simulation;
    double reference_exponent = 0.0;
    double exponent_tolerance = 0.15;
    double cross_tolerance = 1e-9;
    bool exponent_ok = false;
    bool cross_check_ok = false;
    bool pass = false;
};

/// Budget-mode N-sweep: per chain size resolves T and the admissible
/// amplitude, evaluates the error metric over the half-coverage window
/// (closed form and/or full simulation) and fits the growth exponent.
/// jobs > 1 evaluates the N-points concurrently; outputs are ordered by N
/// regardless of completion order.
SweepResult run_sweep(const ExperimentConfig& config, int jobs = 1, bool oracle_only = false,
                      Exec exec = Exec::Serial);
void write_sweep_report(const SweepResult& r, std::ostream& out);

/// Convenience wrapper writing the report to config.outputs.report_json.
SweepResult run_sweep_to_files(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                               int jobs = 1, bool oracle_only = false, Exec exec = Exec::Serial);

// ---- figure data -------------------------------------------------------------

enum class FigScenario { Fig1, Fig2, Fig3 };

/// Reference-scenario data files (PD gains 1/2/0.5, dt = 0.1, step-ramp
/// amplitude 1): fig1 the per-vehicle inputs, fig2 the error trajectories up
/// to T = N*dt/5 next to the closed-form dots, fig3 the long-horizon errors
/// with the T marker in the metadata.
void emit_fig_data(FigScenario scenario, int N, const std::filesystem::path& out_dir,
                   Exec exec = Exec::Serial);

}  // namespace chainsim
