#include "chainsim/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>

#include "chainsim/errors.hpp"

namespace chainsim {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

double rel_dev(double sim, double ref) {
    if (ref == 0.0) return sim == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(sim - ref) / std::abs(ref);
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
    if (!out) throw ConfigError("cannot open output file: " + path.string());
    return out;
}

struct ResolvedScenario {
    int N = 0;
    ControllerDefinition controller;
    DisturbanceProfile profile;
    OracleParams oracle;
};

ResolvedScenario resolve_scenario(const ExperimentConfig& cfg, int N) {
    ResolvedScenario s;
    s.N = N;
    s.controller = make_controller(cfg.controller, cfg.dt);
    s.profile = resolve_profile(cfg.disturbance, N, cfg.dt, s.controller.m1, s.controller.m2);
    s.oracle = OracleParams{s.profile.alpha, N, cfg.dt, s.controller.m1, s.controller.m2};
    return s;
}

// largest grid step up to which the closed form applies for this profile
long oracle_limit_steps(const DisturbanceProfile& profile, double dt, long run_steps) {
    if (profile.kind == DisturbanceKind::RampWindowed) {
        return std::min(run_steps, support_steps(profile, dt));
    }
    if (profile.kind == DisturbanceKind::RampStep) return run_steps;
    return -1;  // zero disturbance: closed form not applicable
}

}  // namespace

std::string format_double(double value) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;  // 40 chars always suffice for a double
    return std::string(buf, end);
}

// ---- closed-form verification ----------------------------------------------

LemmaVerification verify_lemma(const ExperimentConfig& config, double tolerance, Exec exec) {
    const int N = config.single_N();
    ControllerDefinition controller = make_controller(config.controller, config.dt);
    const double dt = config.dt;
    if (config.disturbance.kind == DisturbanceKind::Zero) {
        throw ScenarioError("verify-lemma needs a ramp disturbance (windowed or step)");
    }

    long steps = 0;
    if (controller.m1 + controller.m2 >= 1) {
        const double t_half = oracle_horizon(N, dt, controller.m1, controller.m2);
        steps = std::lround(t_half / dt);
        if (config.disturbance.kind == DisturbanceKind::RampWindowed) {
            const double t_profile =
                resolve_T(*config.disturbance.T, N, dt, controller.m1, controller.m2);
            steps = std::min(steps, std::lround(t_profile / dt));
        }
    } else {
        // a memory-free, communication-free zero-radius law never reacts, so
        // the window never shrinks; the run length must come from the config
        if (!config.horizon || (config.horizon->kind != HorizonRuleKind::Steps &&
                                config.horizon->kind != HorizonRuleKind::Time)) {
            throw ConfigError("/sim/horizon: an explicit steps/time horizon is required when "
                              "the controller has m1 + m2 = 0");
        }
        steps = resolve_horizon_steps(*config.horizon, N, dt, 0, 0);
    }
    if (steps < 1) {
        throw ScenarioError("oracle window covers no full step for N = " + std::to_string(N));
    }

    DisturbanceProfile profile =
        resolve_profile(config.disturbance, N, dt, controller.m1, controller.m2);
    const OracleParams oracle{profile.alpha, N, dt, controller.m1, controller.m2};

    SimulationConfig sim{N, dt, steps};
    RunResult run = simulate(sim, controller, profile, {exec, false});

    LemmaVerification v;
    v.N = N;
    v.dt = dt;
    v.T = static_cast<double>(steps) * dt;
    v.steps = steps;
    v.alpha = profile.alpha;
    v.controller_name = controller.name;
    v.tolerance = tolerance;
    for (long n = 0; n <= steps; ++n) {
        const double t = static_cast<double>(n) * dt;
        const IndexRange window = oracle_window(oracle, t);
        if (window.empty()) continue;
        const OraclePoint ref = ramp_oracle(oracle, t);
        for (int k = window.lo; k <= window.hi; ++k) {
            v.max_rel_dev_e = std::max(v.max_rel_dev_e, rel_dev(run.errors.at(n, k), ref.e));
            v.max_rel_dev_edot =
                std::max(v.max_rel_dev_edot, rel_dev(run.error_rates.at(n, k), ref.edot));
            ++v.points_checked;
        }
    }
    v.pass = v.max_rel_dev_e <= tolerance && v.max_rel_dev_edot <= tolerance;
    return v;
}

void write_lemma_report(const LemmaVerification& v, std::ostream& out) {
    json j;
    j["schema_version"] = "1";
    j["N"] = v.N;
    j["dt"] = v.dt;
    j["T"] = v.T;
    j["steps"] = v.steps;
    j["alpha"] = v.alpha;
    j["controller"] = v.controller_name;
    j["tolerance"] = v.tolerance;
    j["max_rel_dev_e"] = v.max_rel_dev_e;
    j["max_rel_dev_edot"] = v.max_rel_dev_edot;
    j["points_checked"] = v.points_checked;
    j["pass"] = v.pass;
    out << j.dump(2) << "\n";
}

// ---- single simulation -------------------------------------------------------

void write_trajectory_csv(std::ostream& out, const RunResult& run,
                          const DisturbanceProfile& disturbance, int m1, int m2) {
    out << "n,t,k,x,v,e,edot,d1,d2,in_window\n";
    const OracleParams oracle{disturbance.alpha, run.N, run.dt, m1, m2};
    const long limit = oracle_limit_steps(disturbance, run.dt, run.steps);
    for (long n = 0; n <= run.steps; ++n) {
        const double t = static_cast<double>(n) * run.dt;
        IndexRange window{0, -1};
        if (n <= limit) window = oracle_window(oracle, t);
        for (int k = 0; k <= run.N; ++k) {
            // disturbance applied over the step that produced this state
            DisturbancePair d{};
            if (n >= 1) d = sample(disturbance, k, n - 1, run.N, run.dt);
            out << n << ',' << format_double(t) << ',' << k << ','
                << format_double(run.x_at(n, k)) << ',' << format_double(run.v_at(n, k)) << ',';
            if (k >= 1) {
                out << format_double(run.errors.at(n, k)) << ','
                    << format_double(run.error_rates.at(n, k));
            } else {
                out << ',';  // spacing error undefined for the leader
            }
            out << ',' << format_double(d.d1) << ',' << format_double(d.d2) << ','
                << (k >= 1 && window.contains(k) ? 1 : 0) << "\n";
        }
    }
}

void write_error_table(std::ostream& out, const RunResult& run) {
    out << "t";
    for (int k = 1; k <= run.N; ++k) out << ",e" << k;
    out << "\n";
    for (long n = 0; n <= run.steps; ++n) {
        out << format_double(static_cast<double>(n) * run.dt);
        for (int k = 1; k <= run.N; ++k) out << ',' << format_double(run.errors.at(n, k));
        out << "\n";
    }
}

SimulationSummary run_simulation(const ExperimentConfig& config, const fs::path& out_dir,
                                 Exec exec) {
    const int N = config.single_N();
    if (!config.horizon) throw ConfigError("/sim/horizon: required for simulate");
    const ResolvedScenario sc = resolve_scenario(config, N);
    const long steps =
        resolve_horizon_steps(*config.horizon, N, config.dt, sc.controller.m1, sc.controller.m2);
    if (config.disturbance.kind == DisturbanceKind::RampWindowed) {
        const long t_steps = support_steps(sc.profile, config.dt);
        if (steps < t_steps) {
            throw ConfigError("/sim/horizon: resolves to " + std::to_string(steps) +
                              " steps, below the disturbance window of " +
                              std::to_string(t_steps));
        }
    }

    SimulationConfig sim{N, config.dt, steps};
    RunResult run = simulate(sim, sc.controller, sc.profile, {exec, true});

    SimulationSummary s;
    s.N = N;
    s.dt = config.dt;
    s.steps = steps;
    s.controller_name = sc.controller.name;
    s.alpha = sc.profile.alpha;

    for (double e : run.errors.e) s.max_abs_e = std::max(s.max_abs_e, std::abs(e));

    const StabilityCriterion base = config.criterion.value_or(StabilityCriterion{});
    const IndexRange all{1, N};
    s.def1_max_per_vehicle = error_metric(run.errors, {1, base.p, base.q, base.C1}, all, exec);
    s.def2_sum = error_metric(run.errors, {2, base.p, base.q, base.C1}, all, exec);
    s.def3_max_per_vehicle = error_metric(run.errors, {3, base.p, base.q, base.C1}, all, exec);
    s.def4_sup = error_metric(run.errors, {4, base.p, base.q, base.C1}, all, exec);

    const long limit = oracle_limit_steps(sc.profile, config.dt, steps);
    if (limit >= 0) {
        double worst = 0.0;
        for (long n = 0; n <= limit; ++n) {
            const double t = static_cast<double>(n) * config.dt;
            const IndexRange window = oracle_window(sc.oracle, t);
            if (window.empty()) break;
            const OraclePoint ref = ramp_oracle(sc.oracle, t);
            for (int k = window.lo; k <= window.hi; ++k) {
                worst = std::max(worst, rel_dev(run.errors.at(n, k), ref.e));
                worst = std::max(worst, rel_dev(run.error_rates.at(n, k), ref.edot));
            }
        }
        s.oracle_max_rel_dev = worst;
    }

    if (steps > 100) {
        double var = 0.0;
        for (int k = 1; k <= N; ++k) {
            var = std::max(var, std::abs(run.errors.at(steps, k) - run.errors.at(steps - 100, k)));
        }
        s.tail_variation = var;
    }

    {
        auto out = open_out(out_dir / config.outputs.trajectory_csv);
        write_trajectory_csv(out, run, sc.profile, sc.controller.m1, sc.controller.m2);
    }
    {
        auto out = open_out(out_dir / config.outputs.plot_data);
        write_error_table(out, run);
    }
    {
        json j;
        j["schema_version"] = "1";
        j["summary"] = {
            {"N", s.N},
            {"dt", s.dt},
            {"steps", s.steps},
            {"controller", s.controller_name},
            {"alpha", s.alpha},
            {"max_abs_e", s.max_abs_e},
            {"metrics",
             {{"def1_max_per_vehicle", s.def1_max_per_vehicle},
              {"def2_sum", s.def2_sum},
              {"def3_max_per_vehicle", s.def3_max_per_vehicle},
              {"def4_sup", s.def4_sup},
              {"p", base.p},
              {"q", base.q}}},
        };
        if (s.oracle_max_rel_dev) j["summary"]["oracle_max_rel_dev"] = *s.oracle_max_rel_dev;
        if (s.tail_variation) j["summary"]["tail_variation"] = *s.tail_variation;
        j["config"] = to_json(config);
        auto out = open_out(out_dir / config.outputs.report_json);
        out << j.dump(2) << "\n";
    }
    return s;
}

// ---- scaling sweep -----------------------------------------------------------

SweepResult run_sweep(const ExperimentConfig& config, int jobs, bool oracle_only, Exec exec) {
    if (config.N_values.size() < 3) {
        throw ConfigError("/sim/N_list: a sweep needs at least 3 chain sizes");
    }
    if (!config.disturbance.budget) {
        throw ConfigError("/disturbance/budget: a sweep resolves alpha from a budget");
    }
    if (config.disturbance.kind == DisturbanceKind::Zero) {
        throw ConfigError("/disturbance/kind: a sweep needs a ramp disturbance");
    }
    const AmplitudeBudget& budget = *config.disturbance.budget;
    StabilityCriterion criterion{budget.definition_id, budget.p, budget.q, budget.C1};
    if (config.criterion) {
        const auto& c = *config.criterion;
        if (c.definition_id != criterion.definition_id || c.p != criterion.p ||
            c.q != criterion.q) {
            throw ConfigError("/criterion: does not match /disturbance/budget");
        }
        criterion.C1 = c.C1;
    }

    ControllerDefinition probe = make_controller(config.controller, config.dt);
    if (probe.m1 + probe.m2 < 1) {
        throw ConfigError("/controller: a sweep needs a controller with m1 + m2 >= 1");
    }

    SweepResult r;
    r.criterion = criterion;
    r.controller_name = probe.name;
    r.dt = config.dt;
    r.m1 = probe.m1;
    r.m2 = probe.m2;
    r.mode = oracle_only ? SweepMode::Oracle : config.sweep_mode;
    r.reference_exponent =
        reference_growth_exponent(criterion.definition_id, criterion.p, criterion.q);

    std::vector<int> sizes = config.N_values;
    std::sort(sizes.begin(), sizes.end());
    const int count = static_cast<int>(sizes.size());
    r.points.resize(count);
    std::vector<std::exception_ptr> failures(count);

    const bool want_oracle = r.mode != SweepMode::Simulation;
    const bool want_sim = r.mode != SweepMode::Oracle;
    const Exec inner = jobs > 1 ? Exec::Serial : exec;

    auto eval_point = [&](int i) {
        const int N = sizes[i];
        SweepPoint& pt = r.points[i];
        pt.N = N;
        const TRule t_rule = config.disturbance.T.value_or(TRule{TRuleKind::LemmaWindow, 0.0});
        pt.T = resolve_T(t_rule, N, config.dt, probe.m1, probe.m2);
        pt.steps = std::lround(pt.T / config.dt);
        pt.alpha = admissible_alpha(budget, N, pt.T, config.dt);
        const OracleParams oracle{pt.alpha, N, config.dt, probe.m1, probe.m2};
        const IndexRange window = oracle_window(oracle, pt.T);
        if (window.empty()) {
            throw ScenarioError("empty oracle window at T = " + format_double(pt.T) +
                                " for N = " + std::to_string(N));
        }
        if (pt.steps < 1) {
            throw ScenarioError("oracle horizon covers no full step for N = " + std::to_string(N));
        }
        pt.window_count = window.count();
        if (want_oracle) pt.oracle_metric = oracle_error_metric(criterion, oracle, pt.steps);
        if (want_sim) {
            ControllerDefinition controller = make_controller(config.controller, config.dt);
            DisturbanceProfile profile;
            profile.kind = config.disturbance.kind;
            profile.alpha = pt.alpha;
            profile.T = pt.T;
            SimulationConfig sim{N, config.dt, pt.steps};
            RunResult run = simulate(sim, controller, profile, {inner, false});
            pt.sim_metric = error_metric(run.errors, criterion, window, inner);
        }
        if (pt.oracle_metric && pt.sim_metric) {
            pt.rel_gap = rel_dev(*pt.sim_metric, *pt.oracle_metric);
        }
    };

    if (jobs > 1) {
#pragma omp parallel for num_threads(jobs) schedule(dynamic)
        for (int i = 0; i < count; ++i) {
            try {
                eval_point(i);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
        for (int i = 0; i < count; ++i) {
            if (failures[i]) std::rethrow_exception(failures[i]);
        }
    } else {
        for (int i = 0; i < count; ++i) eval_point(i);
    }

    auto fit_over = [&](auto pick) -> std::optional<double> {
        std::vector<ScalingSample> samples;
        for (const auto& pt : r.points) {
            if (auto m = pick(pt)) samples.push_back({pt.N, *m});
        }
        if (samples.empty()) return std::nullopt;
        return make_scaling_report(criterion, std::move(samples)).fitted_exponent;
    };
    r.fitted_exponent_oracle = fit_over([](const SweepPoint& p) { return p.oracle_metric; });
    r.fitted_exponent_simulation = fit_over([](const SweepPoint& p) { return p.sim_metric; });

    r.exponent_ok = true;
    if (r.fitted_exponent_oracle) {
        r.exponent_ok = r.exponent_ok &&
                        std::abs(*r.fitted_exponent_oracle - r.reference_exponent) <=
                            r.exponent_tolerance;
    }
    if (r.fitted_exponent_simulation) {
        r.exponent_ok = r.exponent_ok &&
                        std::abs(*r.fitted_exponent_simulation - r.reference_exponent) <=
                            r.exponent_tolerance;
    }
    r.cross_check_ok = true;
    for (const auto& pt : r.points) {
        if (pt.rel_gap) r.cross_check_ok = r.cross_check_ok && *pt.rel_gap <= r.cross_tolerance;
    }
    r.pass = r.exponent_ok && r.cross_check_ok;
    return r;
}

void write_sweep_report(const SweepResult& r, std::ostream& out) {
    json j;
    j["schema_version"] = "1";
    j["criterion"] = {{"definition", r.criterion.definition_id},
                      {"p", r.criterion.p},
                      {"q", r.criterion.q},
                      {"C1", r.criterion.C1}};
    j["controller"] = r.controller_name;
    j["dt"] = r.dt;
    j["m1"] = r.m1;
    j["m2"] = r.m2;
    switch (r.mode) {
        case SweepMode::Oracle: j["mode"] = "oracle"; break;
        case SweepMode::Simulation: j["mode"] = "simulation"; break;
        case SweepMode::Both: j["mode"] = "both"; break;
    }
    j["samples"] = json::array();
    for (const auto& pt : r.points) {
        json s = {{"N", pt.N},
                  {"steps", pt.steps},
                  {"T", pt.T},
                  {"alpha", pt.alpha},
                  {"window_count", pt.window_count}};
        if (pt.oracle_metric) s["metric_oracle"] = *pt.oracle_metric;
        if (pt.sim_metric) s["metric_simulation"] = *pt.sim_metric;
        if (pt.rel_gap) s["rel_gap"] = *pt.rel_gap;
        j["samples"].push_back(s);
    }
    if (r.fitted_exponent_oracle) j["fitted_exponent_oracle"] = *r.fitted_exponent_oracle;
    if (r.fitted_exponent_simulation) {
        j["fitted_exponent_simulation"] = *r.fitted_exponent_simulation;
    }
    j["reference_exponent"] = r.reference_exponent;
    j["tolerances"] = {{"exponent", r.exponent_tolerance}, {"cross_check", r.cross_tolerance}};
    j["verdicts"] = {{"exponent_ok", r.exponent_ok},
                     {"cross_check_ok", r.cross_check_ok},
                     {"pass", r.pass}};
    out << j.dump(2) << "\n";
}

SweepResult run_sweep_to_files(const ExperimentConfig& config, const fs::path& out_dir, int jobs,
                               bool oracle_only, Exec exec) {
    SweepResult r = run_sweep(config, jobs, oracle_only, exec);
    auto out = open_out(out_dir / config.outputs.report_json);
    write_sweep_report(r, out);
    return r;
}

// ---- figure data -------------------------------------------------------------

void emit_fig_data(FigScenario scenario, int N, const fs::path& out_dir, Exec exec) {
    if (N < 1) throw ConfigError("figdata: N must be >= 1");
    const double dt = 0.1;
    const double alpha = 1.0;
    const DisturbanceProfile profile{DisturbanceKind::RampStep, alpha, 0.0};
    const long fig2_steps = std::max(1, N / 5);

    if (scenario == FigScenario::Fig1) {
        const long steps = 2 * fig2_steps;
        auto out = open_out(out_dir / "fig1_inputs.csv");
        out << "t,k,d1\n";
        for (long n = 0; n <= steps; ++n) {
            for (int k = 0; k <= N; ++k) {
                const DisturbancePair d = sample(profile, k, n, N, dt);
                out << format_double(n * dt) << ',' << k << ',' << format_double(d.d1) << "\n";
            }
        }
        auto meta = open_out(out_dir / "fig1_meta.json");
        meta << json{{"schema_version", "1"}, {"N", N}, {"dt", dt}, {"alpha", alpha},
                     {"steps", steps}}
                    .dump(2)
             << "\n";
        return;
    }

    ControllerDefinition controller = pd_asymmetric(1.0, 2.0, 0.5, dt);
    const OracleParams oracle{alpha, N, dt, controller.m1, controller.m2};

    if (scenario == FigScenario::Fig2) {
        SimulationConfig sim{N, dt, fig2_steps};
        RunResult run = simulate(sim, controller, profile, {exec, false});
        {
            auto out = open_out(out_dir / "fig2_errors.csv");
            out << "t,k,e,in_window\n";
            for (long n = 0; n <= fig2_steps; ++n) {
                const IndexRange window = oracle_window(oracle, n * dt);
                for (int k = 1; k <= N; ++k) {
                    out << format_double(n * dt) << ',' << k << ','
                        << format_double(run.errors.at(n, k)) << ','
                        << (window.contains(k) ? 1 : 0) << "\n";
                }
            }
        }
        {
            auto out = open_out(out_dir / "fig2_oracle.csv");
            out << "t,e,edot\n";
            for (long n = 0; n <= fig2_steps; ++n) {
                const OraclePoint p = ramp_oracle(oracle, n * dt);
                out << format_double(n * dt) << ',' << format_double(p.e) << ','
                    << format_double(p.edot) << "\n";
            }
        }
        auto meta = open_out(out_dir / "fig2_meta.json");
        meta << json{{"schema_version", "1"},
                     {"N", N},
                     {"dt", dt},
                     {"alpha", alpha},
                     {"T", fig2_steps * dt},
                     {"controller", controller.name}}
                    .dump(2)
             << "\n";
        return;
    }

    // Fig3: long horizon, errors settle for fixed N but not uniformly in N
    const long steps = 5000;
    SimulationConfig sim{N, dt, steps};
    RunResult run = simulate(sim, controller, profile, {exec, false});
    {
        auto out = open_out(out_dir / "fig3_errors.csv");
        out << "t,k,e\n";
        for (long n = 0; n <= steps; ++n) {
            for (int k = 1; k <= N; ++k) {
                out << format_double(n * dt) << ',' << k << ','
                    << format_double(run.errors.at(n, k)) << "\n";
            }
        }
    }
    auto meta = open_out(out_dir / "fig3_meta.json");
    meta << json{{"schema_version", "1"},
                 {"N", N},
                 {"dt", dt},
                 {"alpha", alpha},
                 {"T_marker", fig2_steps * dt},
                 {"steps", steps},
                 {"controller", controller.name}}
                .dump(2)
         << "\n";
}

}  // namespace chainsim
