#include "ionpa/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ionpa {

using nlohmann::json;

namespace {

const std::set<std::string> sweep_variables{
    "drive.f_hz",        "drive.g_hz",  "drive.detuning_hz", "drive.theta_deg", "trap.omega_ax_hz",
    "trap.omega_t_hz",   "trap.n_ions", "squeezing.n",       "gate.tau_s",      "gate.sigma_delta_rad_s",
};

void check_keys(const json& obj, const std::string& section, const std::set<std::string>& allowed)
{
    require(obj.is_object(), section + ": expected an object");
    for (const auto& [k, v] : obj.items())
        require(allowed.count(k) > 0, section + "." + k + ": unknown field");
}

double num(const json& obj, const std::string& section, const char* key, std::optional<double> def = {})
{
    auto it = obj.find(key);
    if (it == obj.end()) {
        require(def.has_value(), section + "." + key + ": required field missing");
        return *def;
    }
    require(it->is_number(), section + "." + key + ": expected a number");
    double v = it->get<double>();
    require(std::isfinite(v), section + "." + key + ": must be finite");
    return v;
}

int integer(const json& obj, const std::string& section, const char* key, std::optional<int> def = {})
{
    auto it = obj.find(key);
    if (it == obj.end()) {
        require(def.has_value(), section + "." + key + ": required field missing");
        return *def;
    }
    require(it->is_number_integer(), section + "." + key + ": expected an integer");
    return it->get<int>();
}

bool boolean(const json& obj, const std::string& section, const char* key, bool def)
{
    auto it = obj.find(key);
    if (it == obj.end())
        return def;
    require(it->is_boolean(), section + "." + key + ": expected true or false");
    return it->get<bool>();
}

std::string str(const json& obj, const std::string& section, const char* key, std::optional<std::string> def = {})
{
    auto it = obj.find(key);
    if (it == obj.end()) {
        require(def.has_value(), section + "." + key + ": required field missing");
        return *def;
    }
    require(it->is_string(), section + "." + key + ": expected a string");
    return it->get<std::string>();
}

std::vector<double> num_list(const json& obj, const std::string& section, const char* key)
{
    auto it = obj.find(key);
    if (it == obj.end())
        return {};
    require(it->is_array(), section + "." + key + ": expected an array");
    std::vector<double> out;
    for (const auto& v : *it) {
        require(v.is_number(), section + "." + key + ": expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

Dynamics dynamics_from(const std::string& s, const std::string& field)
{
    if (s == "rwa")
        return Dynamics::Rwa;
    if (s == "full")
        return Dynamics::Full;
    throw PreconditionError(field + ": expected \"rwa\" or \"full\"");
}

Task task_from(const std::string& s)
{
    if (s == "modes")
        return Task::Modes;
    if (s == "trajectory")
        return Task::Trajectory;
    if (s == "phase")
        return Task::Phase;
    if (s == "seff-sweep")
        return Task::SEffSweep;
    if (s == "squeezing-sweep")
        return Task::SqueezingSweep;
    if (s == "gate-sweep")
        return Task::GateSweep;
    if (s == "sensitivity")
        return Task::Sensitivity;
    throw PreconditionError("task: unknown task \"" + s + "\"");
}

void parse_params(ExperimentConfig& c, const json& p)
{
    const std::string sec = "params";
    switch (c.task) {
    case Task::Modes:
        check_keys(p, sec, {});
        break;
    case Task::Trajectory:
        check_keys(p, sec, {"t_end_s", "points", "dynamics", "sigma"});
        c.trajectory.t_end_s = num(p, sec, "t_end_s", 0.0);
        c.trajectory.points = integer(p, sec, "points", 201);
        c.trajectory.dynamics = dynamics_from(str(p, sec, "dynamics", "rwa"), "params.dynamics");
        for (double s : num_list(p, sec, "sigma"))
            c.trajectory.sigma.push_back(static_cast<int>(s));
        break;
    case Task::Phase:
        check_keys(p, sec, {"dynamics"});
        c.phase.dynamics = dynamics_from(str(p, sec, "dynamics", "rwa"), "params.dynamics");
        break;
    case Task::SEffSweep:
        check_keys(p, sec, {"tau_s", "phi_target", "retuned"});
        c.seff.tau_s = num_list(p, sec, "tau_s");
        c.seff.phi_target = num(p, sec, "phi_target", pi);
        c.seff.retuned = boolean(p, sec, "retuned", false);
        break;
    case Task::SqueezingSweep:
        check_keys(p, sec, {"n", "s_eff", "sigma_theta_deg", "band_s_eff"});
        c.squeezing.n = integer(p, sec, "n", 100);
        c.squeezing.s_eff = num_list(p, sec, "s_eff");
        c.squeezing.sigma_theta_deg = num(p, sec, "sigma_theta_deg", 0.0);
        if (p.contains("band_s_eff"))
            c.squeezing.band_s_eff = num(p, sec, "band_s_eff");
        break;
    case Task::GateSweep: {
        check_keys(p, sec, {"tau_s", "phi_target", "pair", "dynamics", "timing_fraction", "sigma_delta_rad_s"});
        c.gate.tau_s = num(p, sec, "tau_s", 180e-6);
        if (p.contains("phi_target"))
            c.gate.phi_target = num(p, sec, "phi_target");
        auto pr = num_list(p, sec, "pair");
        if (!pr.empty()) {
            require(pr.size() == 2, "params.pair: expected two ion indices");
            c.gate.pair = {static_cast<int>(pr[0]), static_cast<int>(pr[1])};
        }
        c.gate.dynamics = dynamics_from(str(p, sec, "dynamics", "full"), "params.dynamics");
        c.gate.timing_fraction = num(p, sec, "timing_fraction", 0.01);
        c.gate.sigma_delta_rad_s = num(p, sec, "sigma_delta_rad_s", 0.0);
        break;
    }
    case Task::Sensitivity:
        check_keys(p, sec,
                   {"target", "theta_rad", "sigma_theta_deg", "sigma_delta_over_delta", "squeeze",
                    "sigma_delta_rad_s", "tau_s", "n"});
        c.sensitivity.target = str(p, sec, "target", "squeezing");
        c.sensitivity.theta_rad = num_list(p, sec, "theta_rad");
        c.sensitivity.sigma_theta_deg = num(p, sec, "sigma_theta_deg", 0.0);
        c.sensitivity.sigma_delta_over_delta = num(p, sec, "sigma_delta_over_delta", 0.0);
        c.sensitivity.squeeze = num(p, sec, "squeeze", 0.0);
        c.sensitivity.sigma_delta_rad_s = num(p, sec, "sigma_delta_rad_s", 0.0);
        c.sensitivity.tau_s = num(p, sec, "tau_s", 180e-6);
        c.squeezing.n = integer(p, sec, "n", 100);
        break;
    }
}

ExperimentConfig from_json(const json& j)
{
    check_keys(j, "config", {"task", "trap", "drive", "rates", "sweep", "mc", "integrator", "output", "params"});
    ExperimentConfig c;
    c.task = task_from(str(j, "config", "task"));

    if (j.contains("trap")) {
        const auto& t = j["trap"];
        const std::string sec = "trap";
        check_keys(t, sec, {"n_ions", "omega_t_hz", "omega_ax_hz", "mass_amu", "charge_e", "d_T_m", "eta1"});
        c.has_trap = true;
        c.trap.n_ions = integer(t, sec, "n_ions");
        c.trap.omega_t = hz_to_rad(num(t, sec, "omega_t_hz"));
        c.trap.omega_ax = hz_to_rad(num(t, sec, "omega_ax_hz"));
        c.trap.mass = num(t, sec, "mass_amu") * amu;
        c.trap.charge = num(t, sec, "charge_e", 1.0) * e_charge;
        c.trap.d_T = num(t, sec, "d_T_m", 1e-3);
        if (t.contains("eta1"))
            c.trap.eta1 = num(t, sec, "eta1");
    }
    if (j.contains("drive")) {
        const auto& d = j["drive"];
        const std::string sec = "drive";
        check_keys(d, sec, {"f_hz", "detuning_hz", "g_hz", "theta_deg", "mode_dependent_g"});
        c.drive.f_hz = num(d, sec, "f_hz", 0.0);
        c.drive.detuning_hz = num(d, sec, "detuning_hz", 0.0);
        c.drive.g_hz = num(d, sec, "g_hz", 0.0);
        c.drive.theta_deg = num(d, sec, "theta_deg", 0.0);
        c.drive.mode_dependent_g = boolean(d, sec, "mode_dependent_g", false);
    }
    if (j.contains("rates")) {
        const auto& r = j["rates"];
        const std::string sec = "rates";
        check_keys(r, sec, {"units", "el", "ud", "du"});
        auto units = str(r, sec, "units", "hz");
        require(units == "hz" || units == "J", "rates.units: expected \"hz\" or \"J\"");
        c.rates.per_J = units == "J";
        c.rates.el = num(r, sec, "el", 0.0);
        c.rates.ud = num(r, sec, "ud", 0.0);
        c.rates.du = num(r, sec, "du", 0.0);
    }
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        const std::string sec = "sweep";
        check_keys(s, sec, {"variable", "lo", "hi", "points", "scale"});
        SweepAxis a;
        a.variable = str(s, sec, "variable");
        a.lo = num(s, sec, "lo");
        a.hi = num(s, sec, "hi");
        a.points = integer(s, sec, "points");
        auto scale = str(s, sec, "scale", "lin");
        require(scale == "lin" || scale == "log", "sweep.scale: expected \"lin\" or \"log\"");
        a.scale = scale == "log" ? AxisScale::Log : AxisScale::Lin;
        c.sweep = a;
    }
    if (j.contains("mc")) {
        const auto& m = j["mc"];
        check_keys(m, "mc", {"n_samples", "seed"});
        MonteCarlo mc;
        mc.n_samples = integer(m, "mc", "n_samples");
        if (m.contains("seed")) {
            require(m["seed"].is_number_unsigned(), "mc.seed: expected a non-negative integer");
            mc.seed = m["seed"].get<std::uint64_t>();
        }
        c.mc = mc;
    }
    if (j.contains("integrator")) {
        const auto& i = j["integrator"];
        check_keys(i, "integrator", {"rel_tol", "abs_tol", "max_step_s", "max_steps"});
        c.integrator.rel_tol = num(i, "integrator", "rel_tol", 1e-10);
        c.integrator.abs_tol = num(i, "integrator", "abs_tol", 1e-12);
        c.integrator.max_step = num(i, "integrator", "max_step_s", 0.0);
        c.integrator.max_steps = integer(i, "integrator", "max_steps", 10'000'000);
    }
    if (j.contains("output")) {
        const auto& o = j["output"];
        check_keys(o, "output", {"path", "format"});
        c.output.path = str(o, "output", "path", "out");
        c.output.format = str(o, "output", "format", "csv");
    }
    parse_params(c, j.contains("params") ? j["params"] : json::object());
    c.canonical = j.dump();
    return c;
}

} // namespace

const char* to_string(Task t)
{
    switch (t) {
    case Task::Modes:
        return "modes";
    case Task::Trajectory:
        return "trajectory";
    case Task::Phase:
        return "phase";
    case Task::SEffSweep:
        return "seff-sweep";
    case Task::SqueezingSweep:
        return "squeezing-sweep";
    case Task::GateSweep:
        return "gate-sweep";
    case Task::Sensitivity:
        return "sensitivity";
    }
    return "?";
}

std::vector<double> SweepAxis::values() const
{
    if (points == 1)
        return {lo};
    std::vector<double> v(points);
    for (int k = 0; k < points; k++) {
        double x = static_cast<double>(k) / (points - 1);
        v[k] = scale == AxisScale::Log ? lo * std::pow(hi / lo, x) : lo + (hi - lo) * x;
    }
    v.back() = hi;
    return v;
}

bool is_sweep_variable(const std::string& name) { return sweep_variables.count(name) > 0; }

DriveParams ExperimentConfig::drive_params() const
{
    DriveParams d;
    d.f = hz_to_rad(drive.f_hz);
    d.mu = trap.omega_t + hz_to_rad(drive.detuning_hz);
    d.g = hz_to_rad(drive.g_hz);
    d.theta = deg_to_rad(drive.theta_deg);
    d.use_mode_dependent_g = drive.mode_dependent_g;
    return d;
}

DecoherenceRates ExperimentConfig::decoherence(double J) const
{
    const double k = rates.per_J ? J : two_pi;
    return {rates.el * k, rates.ud * k, rates.du * k};
}

bool ExperimentConfig::uses_mc() const
{
    switch (task) {
    case Task::SqueezingSweep:
        return squeezing.sigma_theta_deg > 0;
    case Task::GateSweep:
        return gate.sigma_delta_rad_s > 0;
    case Task::Sensitivity:
        return sensitivity.sigma_theta_deg > 0 || sensitivity.sigma_delta_rad_s > 0;
    default:
        return false;
    }
}

void ExperimentConfig::set_variable(const std::string& v, double x)
{
    if (v == "drive.f_hz")
        drive.f_hz = x;
    else if (v == "drive.g_hz")
        drive.g_hz = x;
    else if (v == "drive.detuning_hz")
        drive.detuning_hz = x;
    else if (v == "drive.theta_deg")
        drive.theta_deg = x;
    else if (v == "trap.omega_ax_hz")
        trap.omega_ax = hz_to_rad(x);
    else if (v == "trap.omega_t_hz")
        trap.omega_t = hz_to_rad(x);
    else if (v == "trap.n_ions")
        trap.n_ions = static_cast<int>(std::lround(x));
    else if (v == "squeezing.n")
        squeezing.n = static_cast<int>(std::lround(x));
    else if (v == "gate.tau_s")
        gate.tau_s = x;
    else if (v == "gate.sigma_delta_rad_s")
        gate.sigma_delta_rad_s = x;
    else
        throw PreconditionError("sweep.variable: unknown field \"" + v + "\"");
}

void ExperimentConfig::validate() const
{
    const bool needs_trap = task == Task::Modes || task == Task::Trajectory || task == Task::SEffSweep ||
                            task == Task::GateSweep || (task == Task::Sensitivity && sensitivity.target == "gate");
    require(!needs_trap || has_trap, std::string("trap: section required for task ") + to_string(task));

    require(output.format == "csv" || output.format == "json", "output.format: expected \"csv\" or \"json\"");
    require(!output.path.empty(), "output.path: must not be empty");
    integrator.validate();
    require(drive.f_hz >= 0, "drive.f_hz must be >= 0");
    require(drive.g_hz >= 0, "drive.g_hz must be >= 0");

    const bool sweeps = task == Task::Phase || task == Task::SEffSweep || task == Task::SqueezingSweep ||
                        task == Task::GateSweep;
    std::vector<double> axis_values;
    if (sweep) {
        require(sweeps, std::string("sweep: task ") + to_string(task) + " does not take a sweep axis");
        require(is_sweep_variable(sweep->variable), "sweep.variable: unknown field \"" + sweep->variable + "\"");
        require(sweep->points >= 1, "sweep.points must be >= 1");
        if (sweep->scale == AxisScale::Log)
            require(sweep->lo > 0 && sweep->hi > 0, "sweep.lo and sweep.hi must be > 0 for a log axis");
        axis_values = sweep->values();
    } else {
        require(task != Task::SEffSweep && task != Task::GateSweep && task != Task::SqueezingSweep,
                std::string("sweep: required for task ") + to_string(task));
    }

    if (uses_mc()) {
        require(mc.has_value(), "mc: section required when Monte Carlo sampling is enabled");
        require(mc->seed.has_value(), "mc.seed: required when Monte Carlo sampling is enabled");
        require(mc->n_samples >= 2, "mc.n_samples must be >= 2");
    }

    // Every sweep point is checked against the module invariants before anything runs.
    auto points = axis_values.empty() ? std::vector<double>{0.0} : axis_values;
    for (double x : points) {
        ExperimentConfig c = *this;
        if (sweep)
            c.set_variable(sweep->variable, x);
        c.check_point();
    }
}

void ExperimentConfig::check_point() const
{
    if (has_trap)
        trap.validate();
    switch (task) {
    case Task::Modes:
        break;
    case Task::Trajectory: {
        require(drive.f_hz > 0, "drive.f_hz must be > 0");
        require(drive.detuning_hz > 0, "drive.detuning_hz must be > 0");
        require(trajectory.points >= 2, "params.points must be >= 2");
        require(trajectory.t_end_s >= 0, "params.t_end_s must be >= 0");
        auto modes = transverse_modes(trap);
        drive_params().validate(modes);
        if (!trajectory.sigma.empty()) {
            require(static_cast<int>(trajectory.sigma.size()) == trap.n_ions,
                    "params.sigma: needs one entry per ion");
            for (int s : trajectory.sigma)
                require(s == 1 || s == -1 || s == 0, "params.sigma: entries must be +1, -1 or 0");
        }
        break;
    }
    case Task::Phase:
        require(drive.f_hz > 0, "drive.f_hz must be > 0");
        require(drive.detuning_hz > drive.g_hz, "drive.detuning_hz must exceed drive.g_hz");
        break;
    case Task::SEffSweep:
        require(!seff.tau_s.empty(), "params.tau_s: at least one loop period required");
        for (double t : seff.tau_s)
            require(t > 0, "params.tau_s: entries must be > 0");
        require(seff.phi_target > 0, "params.phi_target must be > 0");
        break;
    case Task::SqueezingSweep:
        require(squeezing.n >= 2, "squeezing.n must be >= 2");
        for (double s : squeezing.s_eff)
            require(s > 0 && s <= 1, "params.s_eff: entries must lie in (0, 1]");
        if (squeezing.band_s_eff)
            require(*squeezing.band_s_eff > 0 && *squeezing.band_s_eff <= 1, "params.band_s_eff must lie in (0, 1]");
        require(squeezing.sigma_theta_deg >= 0, "params.sigma_theta_deg must be >= 0");
        require(rates.per_J, "rates.units must be \"J\" for squeezing sweeps");
        decoherence(1.0).validate();
        break;
    case Task::GateSweep: {
        require(gate.tau_s > 0, "params.tau_s must be > 0");
        require(!gate.phi_target || *gate.phi_target > 0, "params.phi_target must be > 0");
        require(gate.timing_fraction >= 0, "params.timing_fraction must be >= 0");
        require(gate.sigma_delta_rad_s >= 0, "params.sigma_delta_rad_s must be >= 0");
        const int n = trap.n_ions;
        const auto [i, k] = gate.pair;
        require(i != k && i >= 0 && k >= 0 && i < n && k < n, "params.pair: two distinct ions of the chain");
        break;
    }
    case Task::Sensitivity:
        require(sensitivity.target == "squeezing" || sensitivity.target == "gate",
                "params.target: expected \"squeezing\" or \"gate\"");
        require(sensitivity.sigma_theta_deg >= 0, "params.sigma_theta_deg must be >= 0");
        require(sensitivity.sigma_delta_over_delta >= 0, "params.sigma_delta_over_delta must be >= 0");
        require(sensitivity.sigma_delta_rad_s >= 0, "params.sigma_delta_rad_s must be >= 0");
        require(sensitivity.squeeze >= 0 && sensitivity.squeeze <= 1, "params.squeeze must lie in [0, 1]");
        if (sensitivity.target == "squeezing") {
            require(squeezing.n >= 2, "params.n must be >= 2");
            require(rates.per_J, "rates.units must be \"J\" for squeezing sensitivity");
            decoherence(1.0).validate();
        } else {
            require(sensitivity.tau_s > 0, "params.tau_s must be > 0");
        }
        break;
    }
}

ExperimentConfig parse_config(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw PreconditionError(std::string("config: invalid JSON: ") + e.what());
    }
    return from_json(j);
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void apply_seed_override(ExperimentConfig& cfg, std::uint64_t seed)
{
    auto j = json::parse(cfg.canonical);
    j["mc"]["seed"] = seed;
    if (!j["mc"].contains("n_samples"))
        j["mc"]["n_samples"] = 0;
    cfg = from_json(j);
}

} // namespace ionpa
