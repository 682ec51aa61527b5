#include "chainsim/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>

#include "chainsim/errors.hpp"

namespace chainsim {

namespace {

using nlohmann::json;

// strict object reader: every key must be consumed, leftovers are errors
class StrictObject {
  public:
    StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    const json* opt(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& req(const std::string& key) {
        const json* v = opt(key);
        if (!v) throw ConfigError(path_ + ": missing required field '" + key + "'");
        return *v;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) {
                throw ConfigError(path_ + ": unknown field '" + it.key() + "'");
            }
        }
    }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

long as_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return j.get<long>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path + ": expected a string");
    return j.get<std::string>();
}

HorizonRule parse_horizon(const json& j, const std::string& path) {
    HorizonRule rule;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "lemma-window") {
            rule.kind = HorizonRuleKind::LemmaWindow;
        } else if (s == "fig2") {
            rule.kind = HorizonRuleKind::Fig2;
        } else {
            throw ConfigError(path + ": unknown horizon rule '" + s + "'");
        }
        return rule;
    }
    StrictObject o(j, path);
    const json* steps = o.opt("steps");
    const json* time = o.opt("time");
    o.finish();
    if ((steps != nullptr) == (time != nullptr)) {
        throw ConfigError(path + ": give exactly one of 'steps' or 'time'");
    }
    if (steps) {
        rule.kind = HorizonRuleKind::Steps;
        rule.steps = as_integer(*steps, path + "/steps");
        if (rule.steps < 1) throw ConfigError(path + "/steps: must be >= 1");
    } else {
        rule.kind = HorizonRuleKind::Time;
        rule.time = as_number(*time, path + "/time");
        if (!(rule.time > 0.0)) throw ConfigError(path + "/time: must be > 0");
    }
    return rule;
}

TRule parse_T(const json& j, const std::string& path) {
    TRule rule;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "lemma-window") {
            rule.kind = TRuleKind::LemmaWindow;
        } else if (s == "fig2") {
            rule.kind = TRuleKind::Fig2;
        } else {
            throw ConfigError(path + ": unknown T rule '" + s + "'");
        }
        return rule;
    }
    rule.kind = TRuleKind::Value;
    rule.value = as_number(j, path);
    if (rule.value < 0.0) throw ConfigError(path + ": T must be >= 0");
    return rule;
}

AmplitudeBudget parse_budget(const json& j, const std::string& path) {
    StrictObject o(j, path);
    AmplitudeBudget b;
    b.definition_id = static_cast<int>(as_integer(o.req("definition"), path + "/definition"));
    if (const json* p = o.opt("p")) b.p = static_cast<int>(as_integer(*p, path + "/p"));
    if (const json* q = o.opt("q")) b.q = static_cast<int>(as_integer(*q, path + "/q"));
    b.C1 = as_number(o.req("C1"), path + "/C1");
    o.finish();
    try {
        b.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return b;
}

StabilityCriterion parse_criterion(const json& j, const std::string& path) {
    StrictObject o(j, path);
    StabilityCriterion c;
    c.definition_id = static_cast<int>(as_integer(o.req("definition"), path + "/definition"));
    if (const json* p = o.opt("p")) c.p = static_cast<int>(as_integer(*p, path + "/p"));
    if (const json* q = o.opt("q")) c.q = static_cast<int>(as_integer(*q, path + "/q"));
    if (const json* c1 = o.opt("C1")) c.C1 = as_number(*c1, path + "/C1");
    o.finish();
    if (c.definition_id < 1 || c.definition_id > 4) {
        throw ConfigError(path + "/definition: must be 1..4");
    }
    if (c.p < 1 || c.q < 1) throw ConfigError(path + ": p and q must be >= 1");
    if (!(c.C1 > 0.0)) throw ConfigError(path + "/C1: must be > 0");
    return c;
}

std::map<std::string, ControllerFactory>& registry() {
    static std::map<std::string, ControllerFactory> r;
    return r;
}

std::mutex registry_mutex;

double param_number(StrictObject& o, const std::string& key, const std::string& path) {
    return as_number(o.req(key), path + "/" + key);
}

}  // namespace

int ExperimentConfig::single_N() const {
    if (has_N_list) throw ConfigError("/sim: this command needs a single N, not N_list");
    return N_values.front();
}

ExperimentConfig parse_config(const json& j) {
    StrictObject root(j, "config");
    const std::string version = as_string(root.req("schema_version"), "/schema_version");
    if (version != "1") {
        throw ConfigError("/schema_version: unsupported version '" + version + "' (expected \"1\")");
    }

    ExperimentConfig cfg;

    {
        StrictObject sim(root.req("sim"), "/sim");
        const json* n = sim.opt("N");
        const json* nlist = sim.opt("N_list");
        if ((n != nullptr) == (nlist != nullptr)) {
            throw ConfigError("/sim: give exactly one of 'N' or 'N_list'");
        }
        if (n) {
            cfg.N_values.push_back(static_cast<int>(as_integer(*n, "/sim/N")));
        } else {
            if (!nlist->is_array() || nlist->empty()) {
                throw ConfigError("/sim/N_list: expected a non-empty array");
            }
            cfg.has_N_list = true;
            for (size_t i = 0; i < nlist->size(); ++i) {
                cfg.N_values.push_back(static_cast<int>(
                    as_integer((*nlist)[i], "/sim/N_list[" + std::to_string(i) + "]")));
            }
        }
        for (int N : cfg.N_values) {
            if (N < 1) throw ConfigError("/sim: N must be >= 1, got " + std::to_string(N));
        }
        cfg.dt = as_number(sim.req("dt"), "/sim/dt");
        if (!(cfg.dt > 0.0)) throw ConfigError("/sim/dt: must be > 0");
        if (const json* h = sim.opt("horizon")) cfg.horizon = parse_horizon(*h, "/sim/horizon");
        sim.finish();
    }

    {
        StrictObject ctrl(root.req("controller"), "/controller");
        cfg.controller.name = as_string(ctrl.req("name"), "/controller/name");
        if (const json* p = ctrl.opt("params")) {
            if (!p->is_object()) throw ConfigError("/controller/params: expected an object");
            cfg.controller.params = *p;
        }
        ctrl.finish();
        make_controller(cfg.controller, cfg.dt);  // validate early
    }

    {
        StrictObject dist(root.req("disturbance"), "/disturbance");
        const std::string kind = as_string(dist.req("kind"), "/disturbance/kind");
        if (kind == "zero") {
            cfg.disturbance.kind = DisturbanceKind::Zero;
        } else if (kind == "ramp-windowed") {
            cfg.disturbance.kind = DisturbanceKind::RampWindowed;
        } else if (kind == "ramp-step") {
            cfg.disturbance.kind = DisturbanceKind::RampStep;
        } else {
            throw ConfigError("/disturbance/kind: unknown kind '" + kind + "'");
        }
        const json* alpha = dist.opt("alpha");
        const json* budget = dist.opt("budget");
        const json* T = dist.opt("T");
        if (cfg.disturbance.kind == DisturbanceKind::Zero) {
            if (alpha || budget || T) {
                throw ConfigError("/disturbance: zero disturbance takes no alpha/budget/T");
            }
        } else {
            if ((alpha != nullptr) == (budget != nullptr)) {
                throw ConfigError("/disturbance: give exactly one of 'alpha' or 'budget'");
            }
            if (alpha) {
                cfg.disturbance.alpha = as_number(*alpha, "/disturbance/alpha");
                if (*cfg.disturbance.alpha < 0.0) {
                    throw ConfigError("/disturbance/alpha: must be >= 0");
                }
            } else {
                cfg.disturbance.budget = parse_budget(*budget, "/disturbance/budget");
            }
            if (T) cfg.disturbance.T = parse_T(*T, "/disturbance/T");
            const bool needs_T = cfg.disturbance.kind == DisturbanceKind::RampWindowed ||
                                 cfg.disturbance.budget.has_value();
            if (needs_T && !cfg.disturbance.T) {
                throw ConfigError("/disturbance: 'T' is required for ramp-windowed profiles "
                                  "and for budget-resolved amplitudes");
            }
        }
        dist.finish();
    }

    if (const json* crit = root.opt("criterion")) {
        cfg.criterion = parse_criterion(*crit, "/criterion");
    }

    if (const json* mode = root.opt("sweep_mode")) {
        const std::string s = as_string(*mode, "/sweep_mode");
        if (s == "oracle") {
            cfg.sweep_mode = SweepMode::Oracle;
        } else if (s == "simulation") {
            cfg.sweep_mode = SweepMode::Simulation;
        } else if (s == "both") {
            cfg.sweep_mode = SweepMode::Both;
        } else {
            throw ConfigError("/sweep_mode: expected oracle|simulation|both");
        }
    }

    if (const json* out = root.opt("outputs")) {
        StrictObject o(*out, "/outputs");
        if (const json* v = o.opt("trajectory_csv")) {
            cfg.outputs.trajectory_csv = as_string(*v, "/outputs/trajectory_csv");
        }
        if (const json* v = o.opt("report_json")) {
            cfg.outputs.report_json = as_string(*v, "/outputs/report_json");
        }
        if (const json* v = o.opt("plot_data")) {
            cfg.outputs.plot_data = as_string(*v, "/outputs/plot_data");
        }
        o.finish();
    }

    root.finish();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(j);
}

json to_json(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = "1";
    json sim;
    if (cfg.has_N_list) {
        sim["N_list"] = cfg.N_values;
    } else {
        sim["N"] = cfg.N_values.front();
    }
    sim["dt"] = cfg.dt;
    if (cfg.horizon) {
        switch (cfg.horizon->kind) {
            case HorizonRuleKind::LemmaWindow: sim["horizon"] = "lemma-window"; break;
            case HorizonRuleKind::Fig2: sim["horizon"] = "fig2"; break;
            case HorizonRuleKind::Steps: sim["horizon"] = json{{"steps", cfg.horizon->steps}}; break;
            case HorizonRuleKind::Time: sim["horizon"] = json{{"time", cfg.horizon->time}}; break;
        }
    }
    j["sim"] = sim;

    json ctrl;
    ctrl["name"] = cfg.controller.name;
    if (!cfg.controller.params.empty()) ctrl["params"] = cfg.controller.params;
    j["controller"] = ctrl;

    json dist;
    dist["kind"] = to_string(cfg.disturbance.kind);
    if (cfg.disturbance.alpha) dist["alpha"] = *cfg.disturbance.alpha;
    if (cfg.disturbance.budget) {
        const auto& b = *cfg.disturbance.budget;
        dist["budget"] = json{{"definition", b.definition_id}, {"p", b.p}, {"q", b.q}, {"C1", b.C1}};
    }
    if (cfg.disturbance.T) {
        switch (cfg.disturbance.T->kind) {
            case TRuleKind::Value: dist["T"] = cfg.disturbance.T->value; break;
            case TRuleKind::LemmaWindow: dist["T"] = "lemma-window"; break;
            case TRuleKind::Fig2: dist["T"] = "fig2"; break;
        }
    }
    j["disturbance"] = dist;

    if (cfg.criterion) {
        const auto& c = *cfg.criterion;
        j["criterion"] = json{{"definition", c.definition_id}, {"p", c.p}, {"q", c.q}, {"C1", c.C1}};
    }
    switch (cfg.sweep_mode) {
        case SweepMode::Oracle: j["sweep_mode"] = "oracle"; break;
        case SweepMode::Simulation: j["sweep_mode"] = "simulation"; break;
        case SweepMode::Both: break;  // default
    }
    j["outputs"] = json{{"trajectory_csv", cfg.outputs.trajectory_csv},
                        {"report_json", cfg.outputs.report_json},
                        {"plot_data", cfg.outputs.plot_data}};
    return j;
}

ControllerDefinition make_controller(const ControllerSpec& spec, double dt) {
    {
        std::lock_guard<std::mutex> lock(registry_mutex);
        auto it = registry().find(spec.name);
        if (it != registry().end()) return it->second(spec.params, dt);
    }
    const std::string path = "/controller/params";
    if (spec.name == "zero") {
        StrictObject o(spec.params, path);
        o.finish();
        return zero_controller();
    }
    if (spec.name == "pd-asymmetric") {
        StrictObject o(spec.params, path);
        const double a = param_number(o, "a", path);
        const double b1 = param_number(o, "b1", path);
        const double b2 = param_number(o, "b2", path);
        o.finish();
        return pd_asymmetric(a, b1, b2, dt);
    }
    if (spec.name == "pd-symmetric") {
        StrictObject o(spec.params, path);
        const double a = param_number(o, "a", path);
        const double b = param_number(o, "b", path);
        o.finish();
        return pd_symmetric(a, b, dt);
    }
    if (spec.name == "nonlinear-comm") {
        StrictObject o(spec.params, path);
        const double kappa = param_number(o, "kappa", path);
        const double sat = param_number(o, "sat_limit", path);
        o.finish();
        return nonlinear_comm_controller(kappa, sat, dt);
    }
    throw ConfigError("/controller/name: unknown controller '" + spec.name + "'");
}

void register_controller(const std::string& name, ControllerFactory factory) {
    std::lock_guard<std::mutex> lock(registry_mutex);
    registry()[name] = std::move(factory);
}

// ---- rule resolution -------------------------------------------------------

double resolve_T(const TRule& rule, int N, double dt, int m1, int m2) {
    switch (rule.kind) {
        case TRuleKind::Value: {
            const double ratio = rule.value / dt;
            const long n = std::lround(ratio);
            if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, std::abs(ratio))) {
                throw ConfigError("/disturbance/T: " + std::to_string(rule.value) +
                                  " is not a multiple of dt");
            }
            return static_cast<double>(n) * dt;
        }
        case TRuleKind::LemmaWindow:
            if (m1 + m2 < 1) {
                throw ConfigError("/disturbance/T: rule 'lemma-window' needs a controller with "
                                  "m1 + m2 >= 1; give an explicit T");
            }
            return oracle_horizon(N, dt, m1, m2);
        case TRuleKind::Fig2:
            return static_cast<double>(N / 5) * dt;
    }
    throw ConfigError("unreachable T rule");
}

double resolve_alpha(const DisturbanceSpec& spec, int N, double dt, int m1, int m2) {
    if (spec.kind == DisturbanceKind::Zero) return 0.0;
    if (spec.alpha) return *spec.alpha;
    const double T = resolve_T(*spec.T, N, dt, m1, m2);
    return admissible_alpha(*spec.budget, N, T, dt);
}

DisturbanceProfile resolve_profile(const DisturbanceSpec& spec, int N, double dt, int m1, int m2) {
    DisturbanceProfile profile;
    profile.kind = spec.kind;
    if (spec.kind == DisturbanceKind::Zero) return profile;
    profile.alpha = resolve_alpha(spec, N, dt, m1, m2);
    if (spec.kind == DisturbanceKind::RampWindowed) {
        profile.T = resolve_T(*spec.T, N, dt, m1, m2);
    }
    return profile;
}

long resolve_horizon_steps(const HorizonRule& rule, int N, double dt, int m1, int m2) {
    switch (rule.kind) {
        case HorizonRuleKind::LemmaWindow: {
            if (m1 + m2 < 1) {
                throw ConfigError("/sim/horizon: rule 'lemma-window' needs a controller with "
                                  "m1 + m2 >= 1; give explicit steps or a time");
            }
            const double T = oracle_horizon(N, dt, m1, m2);
            return std::lround(T / dt);
        }
        case HorizonRuleKind::Fig2:
            return std::max(1, N / 5);
        case HorizonRuleKind::Steps:
            return rule.steps;
        case HorizonRuleKind::Time:
            return static_cast<long>(std::floor(rule.time / dt + 1e-9));
    }
    throw ConfigError("unreachable horizon rule");
}

}  // namespace chainsim
