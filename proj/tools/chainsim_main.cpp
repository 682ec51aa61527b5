#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>

#include "CLI11.hpp"

#include "chainsim/errors.hpp"
#include "chainsim/harness.hpp"

namespace {

using namespace chainsim;

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    ExperimentConfig cfg = load_config(config_path);
    SimulationSummary s = run_simulation(cfg, out_dir, Exec::Parallel);
    std::printf("simulate: N=%d steps=%ld controller=%s alpha=%s max|e|=%s\n", s.N, s.steps,
                s.controller_name.c_str(), format_double(s.alpha).c_str(),
                format_double(s.max_abs_e).c_str());
    if (s.oracle_max_rel_dev) {
        std::printf("  in-window oracle deviation: %s\n",
                    format_double(*s.oracle_max_rel_dev).c_str());
    }
    return 0;
}

int cmd_verify(const std::string& config_path, const std::string& out_dir, double tolerance) {
    ExperimentConfig cfg = load_config(config_path);
    LemmaVerification v = verify_lemma(cfg, tolerance, Exec::Parallel);
    {
        std::filesystem::path report = std::filesystem::path(out_dir) / cfg.outputs.report_json;
        if (report.has_parent_path()) std::filesystem::create_directories(report.parent_path());
        std::ofstream out(report, std::ios::binary);
        write_lemma_report(v, out);
    }
    std::printf("verify-lemma: N=%d controller=%s T=%s alpha=%s\n", v.N,
                v.controller_name.c_str(), format_double(v.T).c_str(),
                format_double(v.alpha).c_str());
    std::printf("  max rel dev: e=%s edot=%s over %ld points (tolerance %s)\n",
                format_double(v.max_rel_dev_e).c_str(), format_double(v.max_rel_dev_edot).c_str(),
                v.points_checked, format_double(v.tolerance).c_str());
    std::printf("  %s\n", v.pass ? "PASS" : "FAIL");
    return v.pass ? 0 : 1;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int jobs,
              bool oracle_only) {
    ExperimentConfig cfg = load_config(config_path);
    SweepResult r = run_sweep_to_files(cfg, out_dir, jobs, oracle_only, Exec::Parallel);
    std::printf("sweep: definition %d (p=%d q=%d) controller=%s\n", r.criterion.definition_id,
                r.criterion.p, r.criterion.q, r.controller_name.c_str());
    for (const auto& pt : r.points) {
        std::printf("  N=%4d T=%s alpha=%s", pt.N, format_double(pt.T).c_str(),
                    format_double(pt.alpha).c_str());
        if (pt.oracle_metric) std::printf(" oracle=%s", format_double(*pt.oracle_metric).c_str());
        if (pt.sim_metric) std::printf(" sim=%s", format_double(*pt.sim_metric).c_str());
        if (pt.rel_gap) std::printf(" gap=%s", format_double(*pt.rel_gap).c_str());
        std::printf("\n");
    }
    if (r.fitted_exponent_oracle) {
        std::printf("  fitted exponent (oracle): %s\n",
                    format_double(*r.fitted_exponent_oracle).c_str());
    }
    if (r.fitted_exponent_simulation) {
        std::printf("  fitted exponent (simulation): %s\n",
                    format_double(*r.fitted_exponent_simulation).c_str());
    }
    std::printf("  reference exponent: %s (tolerance %s)\n",
                format_double(r.reference_exponent).c_str(),
                format_double(r.exponent_tolerance).c_str());
    std::printf("  %s\n", r.pass ? "PASS" : "FAIL");
    return r.pass ? 0 : 1;
}

int cmd_figdata(const std::string& scenario, int N, const std::string& out_dir) {
    FigScenario sc;
    if (scenario == "fig1") {
        sc = FigScenario::Fig1;
    } else if (scenario == "fig2") {
        sc = FigScenario::Fig2;
    } else if (scenario == "fig3") {
        sc = FigScenario::Fig3;
    } else {
        throw ConfigError("--scenario must be fig1|fig2|fig3");
    }
    emit_fig_data(sc, N, out_dir, Exec::Parallel);
    std::printf("figdata: wrote %s files for N=%d to %s\n", scenario.c_str(), N, out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator and falsification harness for chains of discrete-time double "
                 "integrators under relative-measurement controllers"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    double tolerance = 1e-9;
    int jobs = 1;
    bool oracle_only = false;
    std::string scenario;
    int N = 10;

    auto* sim = app.add_subcommand("simulate", "run one closed-loop simulation");
    sim->add_option("--config", config_path, "experiment config (JSON)")->required();
    sim->add_option("--out-dir", out_dir, "directory for output files");

    auto* verify = app.add_subcommand(
        "verify-lemma", "check the simulated ramp response against the closed form");
    verify->add_option("--config", config_path, "experiment config (JSON)")->required();
    verify->add_option("--out-dir", out_dir, "directory for output files");
    verify->add_option("--tolerance", tolerance, "relative tolerance (default 1e-9)");

    auto* sweep = app.add_subcommand("sweep", "growth-exponent sweep over chain sizes");
    sweep->add_option("--config", config_path, "experiment config (JSON)")->required();
    sweep->add_option("--out-dir", out_dir, "directory for output files");
    sweep->add_option("--jobs", jobs, "concurrent chain sizes (default 1)")
        ->check(CLI::PositiveNumber);
    sweep->add_flag("--oracle-only", oracle_only, "skip the simulation cross-check");

    auto* fig = app.add_subcommand("figdata", "emit plot-ready reference scenario data");
    fig->add_option("--scenario", scenario, "fig1|fig2|fig3")->required();
    fig->add_option("--N", N, "chain size parameter")->required();
    fig->add_option("--out-dir", out_dir, "directory for output files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(sim)) return cmd_simulate(config_path, out_dir);
        if (app.got_subcommand(verify)) return cmd_verify(config_path, out_dir, tolerance);
        if (app.got_subcommand(sweep)) return cmd_sweep(config_path, out_dir, jobs, oracle_only);
        if (app.got_subcommand(fig)) return cmd_figdata(scenario, N, out_dir);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const ScenarioError& e) {
        std::fprintf(stderr, "scenario error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
