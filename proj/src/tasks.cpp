#include "ionpa/tasks.hpp"

#include "ionpa/spin_squeezing.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

namespace ionpa {

using ojson = nlohmann::ordered_json;

namespace {

std::string axis_column(const std::string& variable)
{
    if (variable == "drive.g_hz")
        return "g_hz";
    if (variable == "drive.f_hz")
        return "f_hz";
    if (variable == "drive.detuning_hz")
        return "delta_hz";
    if (variable == "squeezing.n")
        return "N";
    std::string s = variable;
    for (auto& ch : s)
        if (ch == '.')
            ch = '_';
    return s;
}

std::vector<double> axis_values(const ExperimentConfig& cfg)
{
    return cfg.sweep ? cfg.sweep->values() : std::vector<double>{0.0};
}

ExperimentConfig at(const ExperimentConfig& cfg, double x)
{
    ExperimentConfig c = cfg;
    if (cfg.sweep)
        c.set_variable(cfg.sweep->variable, x);
    return c;
}

double gate_phi_target(const ExperimentConfig& c)
{
    return c.gate.phi_target ? *c.gate.phi_target : c.trap.n_ions * pi / 4.0;
}

std::uint64_t seed_of(const ExperimentConfig& c) { return c.mc && c.mc->seed ? *c.mc->seed : 0; }
int samples_of(const ExperimentConfig& c) { return c.mc ? c.mc->n_samples : 0; }

TaskOutput modes_task(const ExperimentConfig& cfg)
{
    auto modes = transverse_modes(cfg.trap);
    TaskOutput out;
    out.table.columns = {"m", "omega_hz", "z0_m"};
    for (int i = 0; i < modes.size(); i++)
        out.table.columns.push_back("U_" + std::to_string(i + 1));
    for (int m = 0; m < modes.size(); m++) {
        std::vector<Cell> row{static_cast<long long>(m + 1), rad_to_hz(modes.omega[m]), modes.z0[m]};
        for (int i = 0; i < modes.size(); i++)
            row.emplace_back(modes.U(i, m));
        out.table.rows.push_back(row);
    }
    return out;
}

TaskOutput trajectory_task(const ExperimentConfig& cfg)
{
    auto modes = transverse_modes(cfg.trap);
    auto drive = cfg.drive_params();
    std::vector<int> sigma = cfg.trajectory.sigma;
    if (sigma.empty())
        sigma.assign(cfg.trap.n_ions, 1);
    auto branch = SpinBranch::from(modes.U, sigma);
    double t_end = cfg.trajectory.t_end_s;
    if (t_end == 0) {
        const double d = drive.mu - modes.omega.front();
        t_end = two_pi / std::sqrt((d - drive.g) * (d + drive.g));
    }
    auto times = linspace(0.0, t_end, cfg.trajectory.points);
    auto rec = integrate_full(drive, modes, branch, times, cfg.trajectory.dynamics, cfg.integrator);
    auto phi = geometric_phase(rec);

    TaskOutput out;
    out.table.columns = {"t_s"};
    for (int m = 0; m < modes.size(); m++) {
        out.table.columns.push_back("re_alpha_" + std::to_string(m + 1));
        out.table.columns.push_back("im_alpha_" + std::to_string(m + 1));
    }
    out.table.columns.push_back("phi");
    for (std::size_t k = 0; k < rec.t.size(); k++) {
        std::vector<Cell> row{rec.t[k]};
        for (const auto& tr : rec.modes) {
            row.emplace_back(tr.alpha[k].real());
            row.emplace_back(tr.alpha[k].imag());
        }
        row.emplace_back(phi[k]);
        out.table.rows.push_back(row);
    }
    out.manifest.derived = bogoliubov_set(drive, modes);
    out.manifest.meta.push_back({"dynamics", to_string(cfg.trajectory.dynamics)});
    return out;
}

TaskOutput phase_task(const ExperimentConfig& cfg, int workers)
{
    TaskOutput out;
    const std::string ax = cfg.sweep ? axis_column(cfg.sweep->variable) : "point";
    out.table.columns = {ax};
    for (const char* c : {"g_hz", "f_hz", "delta_hz"})
        if (ax != c)
            out.table.columns.push_back(c);
    for (const char* c : {"phi_numeric", "phi_table", "rel_err", "t_loop_s", "t_loop_table_s", "closure", "status"})
        out.table.columns.push_back(c);
    const auto dyn = cfg.phase.dynamics;
    out.table.rows = sweep_rows(
        axis_values(cfg), out.table.columns.size() - 1,
        [&](double x) {
            auto c = at(cfg, x);
            ModeDrive d;
            d.f = hz_to_rad(c.drive.f_hz);
            d.delta = hz_to_rad(c.drive.detuning_hz);
            d.g = hz_to_rad(c.drive.g_hz);
            d.theta = deg_to_rad(c.drive.theta_deg);
            d.mu = c.trap.omega_t + d.delta;
            require(dyn == Dynamics::Rwa || c.has_trap, "phase: full dynamics needs the trap section for mu");
            auto q = loop_quantities(d.f, d.delta, d.g);
            const double T = loop_period(d, dyn, c.integrator);
            auto tr = integrate_mode(d, {T}, dyn, c.integrator);
            const double dp = std::sqrt((d.delta - d.g) * (d.delta + d.g));
            const double phi = tr.phi.back();
            std::vector<Cell> row{x};
            const std::pair<const char*, double> drive_cols[] = {
                {"g_hz", c.drive.g_hz}, {"f_hz", c.drive.f_hz}, {"delta_hz", c.drive.detuning_hz}};
            for (const auto& [name, v] : drive_cols)
                if (ax != name)
                    row.emplace_back(v);
            for (double v : {phi, q.phi_loop, phi / q.phi_loop - 1.0, T, q.tau, std::abs(tr.alpha.back()) / (d.f / dp)})
                row.emplace_back(v);
            return row;
        },
        workers, out.failed_rows);
    out.manifest.meta.push_back({"dynamics", to_string(dyn)});
    return out;
}

TaskOutput seff_task(const ExperimentConfig& cfg, int workers)
{
    TaskOutput out;
    const std::string ax = axis_column(cfg.sweep->variable);
    out.table.columns = {"tau_s", ax, "inv_s2", "inv_seff2"};
    if (cfg.seff.retuned)
        out.table.columns.push_back("inv_seff2_retuned");
    for (const char* c : {"delta_hz", "delta_p_hz", "rwa_shift_hz", "shift_ratio", "region", "status"})
        out.table.columns.push_back(c);

    const auto xs = axis_values(cfg);
    const auto& taus = cfg.seff.tau_s;
    const std::size_t width = out.table.columns.size() - 1;
    out.table.rows = parallel_map(
        taus.size() * xs.size(),
        [&](std::size_t k) {
            const double tau = taus[k / xs.size()];
            const double x = xs[k % xs.size()];
            auto c = at(cfg, x);
            try {
                const double g = hz_to_rad(c.drive.g_hz);
                auto r = s_eff(g, tau, c.trap.omega_t, c.seff.phi_target, c.integrator, SEffProtocol::FixedDetuning);
                std::vector<Cell> row{tau, x, 1.0 / (r.s_rwa * r.s_rwa), 1.0 / (r.s_eff * r.s_eff)};
                if (c.seff.retuned) {
                    auto rr = s_eff(g, tau, c.trap.omega_t, c.seff.phi_target, c.integrator,
                                    SEffProtocol::RetunedDetuning);
                    row.emplace_back(1.0 / (rr.s_eff * rr.s_eff));
                }
                row.emplace_back(rad_to_hz(r.delta));
                row.emplace_back(rad_to_hz(r.delta_p));
                row.emplace_back(rad_to_hz(r.rwa_shift));
                row.emplace_back(r.rwa_shift / r.delta_p);
                row.emplace_back(std::string(to_string(rwa_region(g, r.delta, r.mu))));
                row.emplace_back(std::string("ok"));
                return row;
            } catch (const Error&) {
                std::vector<Cell> row(width, Cell(std::numeric_limits<double>::quiet_NaN()));
                row[0] = tau;
                row[1] = x;
                row[width - 1] = std::string("-");
                row.emplace_back(std::string("failed"));
                return row;
            }
        },
        workers);
    for (const auto& r : out.table.rows)
        out.failed_rows += std::get<std::string>(r.back()) == "failed" ? 1 : 0;
    out.manifest.meta.push_back({"protocol", cfg.seff.retuned ? "fixed-detuning,retuned-detuning" : "fixed-detuning"});
    out.manifest.meta.push_back({"omega1_hz", format_double(rad_to_hz(cfg.trap.omega_t))});
    return out;
}

TaskOutput squeezing_task(const ExperimentConfig& cfg, int workers)
{
    TaskOutput out;
    out.table.columns = {"N", "xi2_ideal", "xi2_sdf"};
    for (double s : cfg.squeezing.s_eff)
        out.table.columns.push_back("xi2_seff_" + format_double(s));
    const bool band = cfg.squeezing.sigma_theta_deg > 0;
    double band_s = 1.0;
    if (cfg.squeezing.band_s_eff)
        band_s = *cfg.squeezing.band_s_eff;
    else
        for (double s : cfg.squeezing.s_eff)
            band_s = std::min(band_s, s);
    if (band) {
        out.table.columns.push_back("band_lo");
        out.table.columns.push_back("band_hi");
    }
    out.table.columns.push_back("status");

    const double J = 1.0;
    const auto base = cfg.decoherence(J);
    auto scaled = [&](double s) { return DecoherenceRates{base.el * s, base.ud * s, base.du * s}; };
    // Inner Monte Carlo runs serially so the outer sweep owns the workers.
    out.table.rows = sweep_rows(
        axis_values(cfg), out.table.columns.size() - 1,
        [&](double x) {
            auto c = at(cfg, x);
            const int n = c.squeezing.n;
            std::vector<Cell> row{static_cast<double>(n), minimize_xi(J, {}, n).xi2, minimize_xi(J, base, n).xi2};
            for (double s : c.squeezing.s_eff)
                row.emplace_back(minimize_xi(J, scaled(s), n).xi2);
            if (band) {
                auto ref = minimize_xi(J, scaled(band_s), n);
                auto th = theta_sensitivity(J, scaled(band_s), n, deg_to_rad(c.squeezing.sigma_theta_deg),
                                            samples_of(c), seed_of(c), band_s, 1);
                row.emplace_back(ref.xi2 + th.mean - th.std);
                row.emplace_back(ref.xi2 + th.mean + th.std);
            }
            return row;
        },
        workers, out.failed_rows);
    out.manifest.meta.push_back({"rates_per_J", "el=" + format_double(cfg.rates.el) + " ud=" +
                                                     format_double(cfg.rates.ud) + " du=" +
                                                     format_double(cfg.rates.du)});
    if (band) {
        out.manifest.meta.push_back({"band_s_eff", format_double(band_s)});
        out.manifest.meta.push_back({"sigma_theta_deg", format_double(cfg.squeezing.sigma_theta_deg)});
        out.manifest.meta.push_back({"mc_samples", std::to_string(samples_of(cfg))});
    }
    return out;
}

TaskOutput gate_task(const ExperimentConfig& cfg, int workers)
{
    auto sweep = gate_sweep(cfg, workers);
    TaskOutput out;
    const std::string ax = axis_column(cfg.sweep->variable);
    out.table.columns = {ax};
    if (ax != "g_hz")
        out.table.columns.push_back("g_hz");
    for (const char* c : {"fidelity", "fidelity_with_timing_err", "f_required_hz", "t_opt_s", "delta_hz",
                          "fidelity_rwa", "status"})
        out.table.columns.push_back(c);

    ojson budget;
    budget["schema"] = 1;
    budget["branch"] = "worst case |s_m| = |U_im| + |U_jm| for the gate pair, spectators undriven";
    budget["operating_point"] = "maximum fidelity over the sweep";
    budget["points"] = ojson::array();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < sweep.points.size(); k++) {
        const auto& p = sweep.points[k];
        std::vector<Cell> row{sweep.axis[k]};
        if (ax != "g_hz")
            row.emplace_back(p ? rad_to_hz(p->g) : nan);
        if (p) {
            for (double v : {p->fidelity, p->fidelity - p->timing.worst, rad_to_hz(p->f_required), p->t_opt,
                             rad_to_hz(p->delta), p->fidelity_rwa})
                row.emplace_back(v);
            row.emplace_back(std::string("ok"));
            ojson b;
            b["g_hz"] = rad_to_hz(p->g);
            b["fidelity"] = p->fidelity;
            b["eps0"] = p->eps0;
            b["eps1"] = p->eps1;
            b["timing_shift_worst"] = p->timing.worst;
            b["timing_shift_mean"] = p->timing.mean;
            for (const auto& [key, v] : p->budget)
                b["budget"][key] = v;
            budget["points"].push_back(b);
        } else {
            for (int i = 0; i < 6; i++)
                row.emplace_back(nan);
            row.emplace_back(std::string("failed"));
            budget["points"].push_back(nullptr);
            out.failed_rows++;
        }
        out.table.rows.push_back(row);
    }

    out.manifest.meta.push_back({"dynamics", to_string(cfg.gate.dynamics)});
    out.manifest.meta.push_back({"branch", "worst-case pair weight, spectators undriven"});
    out.manifest.meta.push_back({"tau_s", format_double(cfg.gate.tau_s)});
    if (cfg.has_trap)
        out.manifest.meta.push_back({"omega_ax_hz", format_double(rad_to_hz(cfg.trap.omega_ax))});

    if (sweep.best >= 0) {
        const auto& p = *sweep.points[sweep.best];
        auto c = at(cfg, sweep.axis[sweep.best]);
        auto modes = transverse_modes(c.trap);
        DriveParams drive{p.f_required, modes.omega.front() + p.delta, p.g, deg_to_rad(c.drive.theta_deg), false};
        out.manifest.derived = bogoliubov_set(drive, modes);
        out.manifest.meta.push_back({"operating_point_g_hz", format_double(rad_to_hz(p.g))});

        ojson op;
        op["index"] = sweep.best;
        op["g_hz"] = rad_to_hz(p.g);
        op["fidelity"] = p.fidelity;
        op["f_required_hz"] = rad_to_hz(p.f_required);
        op["delta_hz"] = rad_to_hz(p.delta);
        op["t_opt_s"] = p.t_opt;
        op["timing_fraction"] = c.gate.timing_fraction;
        op["timing_shift_worst"] = p.timing.worst;
        if (c.gate.sigma_delta_rad_s > 0) {
            GateSpec spec;
            spec.modes = modes;
            spec.drive = drive;
            spec.ion_pair = c.gate.pair;
            spec.phi_target = gate_phi_target(c);
            spec.tau_nominal = c.gate.tau_s;
            auto fl = delta_fluctuation(spec, c.gate.sigma_delta_rad_s, samples_of(c), seed_of(c), workers);
            op["sigma_delta_rad_s"] = c.gate.sigma_delta_rad_s;
            op["delta_std_analytic"] = fl.analytic_std;
            op["delta_std_mc"] = fl.mc_std;
            op["delta_mean_mc"] = fl.mc_mean;
            op["unstable_samples"] = fl.unstable_samples;
            op["fidelity_with_delta_noise"] = p.fidelity - fl.analytic_std;
        }
        budget["operating"] = op;
    }
    out.extra.push_back({"_budget.json", budget.dump(2) + "\n"});
    return out;
}

TaskOutput sensitivity_task(const ExperimentConfig& cfg, int workers)
{
    TaskOutput out;
    const auto& s = cfg.sensitivity;
    if (s.target == "squeezing") {
        const double J = 1.0;
        const auto rates = cfg.decoherence(J);
        const int n = cfg.squeezing.n;
        out.table.columns = {"quantity", "theta_rad", "value", "reference"};
        for (double th : s.theta_rad)
            out.table.rows.push_back({std::string("theta_shift"), th, theta_shift(J, rates, n, th, s.squeeze),
                                      std::pow(th, 4) / 16.0});
        if (s.sigma_theta_deg > 0) {
            auto t = theta_sensitivity(J, rates, n, deg_to_rad(s.sigma_theta_deg), samples_of(cfg), seed_of(cfg),
                                       s.squeeze, workers);
            const double sig = deg_to_rad(s.sigma_theta_deg);
            out.table.rows.push_back({std::string("theta_mc_mean"), sig, t.mean, t.analytic_mean});
            out.table.rows.push_back({std::string("theta_mc_std"), sig, t.std, std::numeric_limits<double>::quiet_NaN()});
        }
        if (s.sigma_delta_over_delta > 0) {
            require(s.squeeze > 0, "params.squeeze must be > 0 for the detuning sensitivity");
            auto d = delta_sensitivity(J, rates, n, s.sigma_delta_over_delta, s.squeeze);
            out.table.rows.push_back({std::string("dj_over_j"), 0.0, d.dj_over_j, static_cast<double>(d.valid)});
            out.table.rows.push_back({std::string("delta_dxi2"), 0.0, d.dxi2, static_cast<double>(d.valid)});
        }
        return out;
    }
    auto modes = transverse_modes(cfg.trap);
    const double g = hz_to_rad(cfg.drive.g_hz);
    const double phi = cfg.gate.phi_target ? *cfg.gate.phi_target : cfg.trap.n_ions * pi / 4.0;
    auto spec = design_gate(modes, g, s.tau_s, phi, deg_to_rad(cfg.drive.theta_deg), cfg.gate.pair, Dynamics::Rwa,
                            cfg.integrator);
    auto fl = delta_fluctuation(spec, s.sigma_delta_rad_s, samples_of(cfg), seed_of(cfg), workers);
    out.table.columns = {"quantity", "value"};
    out.table.rows = {{std::string("delta_std_analytic"), fl.analytic_std},
                      {std::string("delta_std_mc"), fl.mc_std},
                      {std::string("delta_mean_mc"), fl.mc_mean},
                      {std::string("unstable_samples"), static_cast<long long>(fl.unstable_samples)}};
    out.manifest.derived = bogoliubov_set(spec.drive, modes);
    return out;
}

} // namespace

GateSweep gate_sweep(const ExperimentConfig& cfg, int workers)
{
    GateSweep s;
    s.axis = axis_values(cfg);
    s.points = parallel_map(
        s.axis.size(),
        [&](std::size_t k) -> std::optional<GateResult> {
            auto c = at(cfg, s.axis[k]);
            try {
                auto modes = transverse_modes(c.trap);
                return evaluate_gate(modes, hz_to_rad(c.drive.g_hz), c.gate.tau_s, gate_phi_target(c),
                                     deg_to_rad(c.drive.theta_deg), c.gate.pair, c.gate.timing_fraction,
                                     c.gate.dynamics, c.integrator);
            } catch (const Error&) {
                return std::nullopt;
            }
        },
        workers);
    for (std::size_t k = 0; k < s.points.size(); k++)
        if (s.points[k] && (s.best < 0 || s.points[k]->fidelity > s.points[s.best]->fidelity))
            s.best = static_cast<int>(k);
    return s;
}

TaskOutput run_task(const ExperimentConfig& cfg, int workers)
{
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    TaskOutput out;
    switch (cfg.task) {
    case Task::Modes:
        out = modes_task(cfg);
        break;
    case Task::Trajectory:
        out = trajectory_task(cfg);
        break;
    case Task::Phase:
        out = phase_task(cfg, workers);
        break;
    case Task::SEffSweep:
        out = seff_task(cfg, workers);
        break;
    case Task::SqueezingSweep:
        out = squeezing_task(cfg, workers);
        break;
    case Task::GateSweep:
        out = gate_task(cfg, workers);
        break;
    case Task::Sensitivity:
        out = sensitivity_task(cfg, workers);
        break;
    }
    out.manifest.task = to_string(cfg.task);
    out.manifest.config_sha256 = sha256_hex(cfg.canonical);
    if (cfg.mc && cfg.mc->seed)
        out.manifest.seed = cfg.mc->seed;
    if (cfg.has_trap)
        out.manifest.omega1 = cfg.trap.omega_t;
    out.manifest.workers = workers;
    out.manifest.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::string write_outputs(const TaskOutput& out, const ExperimentConfig& cfg, const std::string& dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + dir + ": " + ec.message());
    const fs::path stem = fs::path(dir) / cfg.output.path;
    if (stem.has_parent_path()) {
        fs::create_directories(stem.parent_path(), ec);
        if (ec)
            throw IoError("cannot create output directory " + stem.parent_path().string());
    }

    std::ostringstream data;
    const std::string path = stem.string() + "." + cfg.output.format;
    if (cfg.output.format == "csv")
        write_csv(data, out.table, out.manifest);
    else
        write_table_json(data, out.table, out.manifest);
    write_file(path, data.str());
    for (const auto& side : out.extra)
        write_file(stem.string() + side.suffix, side.contents);
    std::ostringstream man;
    write_manifest_json(man, out.manifest);
    write_file(stem.string() + ".manifest.json", man.str());
    return path;
}

} // namespace ionpa
