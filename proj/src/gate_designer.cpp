#include "ionpa/gate_designer.hpp"

#include "ionpa/numerics.hpp"
#include "ionpa/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace ionpa {

void GateSpec::validate() const
{
    const int n = modes.size();
    require(n >= 1, "gate: empty mode set");
    require(ion_pair.first != ion_pair.second, "gate.ion_pair must name two different ions");
    require(ion_pair.first >= 0 && ion_pair.first < n && ion_pair.second >= 0 && ion_pair.second < n,
            "gate.ion_pair out of range");
    require(phi_target > 0, "gate.phi_target must be > 0");
    drive.validate(modes);
}

std::vector<double> worst_case_weights(const GateSpec& spec)
{
    std::vector<double> s(spec.modes.size());
    for (int m = 0; m < spec.modes.size(); m++)
        s[m] = std::abs(spec.modes.U(spec.ion_pair.first, m)) + std::abs(spec.modes.U(spec.ion_pair.second, m));
    return s;
}

std::vector<ModeDrive> gate_mode_drives(const GateSpec& spec)
{
    spec.validate();
    auto fm = mode_couplings(spec.drive.f, spec.modes);
    auto gm = mode_pa_couplings(spec.drive, spec.modes);
    auto sm = worst_case_weights(spec);
    std::vector<ModeDrive> out;
    for (int m = 0; m < spec.modes.size(); m++)
        out.push_back({fm[m], spec.drive.mu - spec.modes.omega[m], gm[m], spec.drive.theta, spec.drive.mu, sm[m]});
    return out;
}

double infidelity(const GateSpec& spec, double t)
{
    double eps = 0;
    for (const auto& d : gate_mode_drives(spec))
        eps += std::norm(rwa_trajectory(d.f, d.delta, d.g, d.theta, d.s, t));
    return eps;
}

std::vector<double> infidelity_series(const GateSpec& spec, const std::vector<double>& times, Dynamics dyn,
                                      const IntegratorConfig& cfg)
{
    auto drives = gate_mode_drives(spec);
    std::vector<double> eps(times.size(), 0.0);
    for (const auto& d : drives) {
        if (dyn == Dynamics::Rwa) {
            for (std::size_t k = 0; k < times.size(); k++)
                eps[k] += std::norm(rwa_trajectory(d.f, d.delta, d.g, d.theta, d.s, times[k]));
        } else {
            auto tr = integrate_mode(d, times, Dynamics::Full, cfg);
            for (std::size_t k = 0; k < times.size(); k++)
                eps[k] += std::norm(tr.alpha[k]);
        }
    }
    return eps;
}

TimeOptimum optimize_time(const GateSpec& spec, Dynamics dyn, const IntegratorConfig& cfg)
{
    auto drives = gate_mode_drives(spec);
    const auto& com = drives.front();
    const double t1 = two_pi / std::sqrt((com.delta - com.g) * (com.delta + com.g));
    auto grid = linspace(0.8 * t1, 1.2 * t1, 2001);
    auto eps = infidelity_series(spec, grid, dyn, cfg);
    const auto k = static_cast<std::size_t>(std::min_element(eps.begin(), eps.end()) - eps.begin());
    const double a = grid[k == 0 ? 0 : k - 1];
    const double b = grid[std::min(k + 1, grid.size() - 1)];
    auto cost = [&](double t) { return infidelity_series(spec, {t}, dyn, cfg).front(); };
    auto m = golden_section(cost, a, b, 1e-9);
    if (eps[k] < m.fx)
        m = {grid[k], eps[k]};
    return {m.x, 1.0 - m.fx};
}

PowerSolution required_power(double g, double tau, double phi_target, const NormalModeSet& modes, Dynamics dyn,
                             const IntegratorConfig& cfg)
{
    require(g >= 0 && tau > 0 && phi_target > 0, "required_power: need g >= 0, tau > 0, phi_target > 0");
    const double nu = two_pi / tau;
    const double delta = std::sqrt(nu * nu + g * g);
    const double omega1 = modes.omega.front();
    PowerSolution p{std::sqrt(phi_target / loop_quantities(1.0, delta, g).phi_loop), delta, omega1 + delta, tau};
    if (dyn == Dynamics::Full) {
        p.t_loop = two_pi / floquet_frequency(delta, g, 0.0, p.mu, cfg);
        ModeDrive d{p.f, delta, g, 0.0, p.mu, 1.0};
        const double phi = integrate_mode(d, {p.t_loop}, Dynamics::Full, cfg).phi.back();
        if (!(phi > 0))
            throw SolverError("required_power: non-positive loop phase");
        p.f *= std::sqrt(phi_target / phi);
    }
    return p;
}

GateSpec design_gate(const NormalModeSet& modes, double g, double tau, double phi_target, double theta,
                     std::pair<int, int> pair, Dynamics dyn, const IntegratorConfig& cfg)
{
    auto p = required_power(g, tau, phi_target, modes, dyn, cfg);
    GateSpec spec;
    spec.modes = modes;
    spec.drive = DriveParams{p.f, p.mu, g, theta, false};
    spec.ion_pair = pair;
    spec.phi_target = phi_target;
    spec.tau_nominal = tau;
    spec.validate();
    return spec;
}

TimingShift timing_error(const GateSpec& spec, double fraction, Dynamics dyn, const IntegratorConfig& cfg)
{
    require(fraction >= 0, "timing_error: fraction must be >= 0");
    return timing_error(spec, optimize_time(spec, dyn, cfg), fraction, dyn, cfg);
}

TimingShift timing_error(const GateSpec& spec, const TimeOptimum& opt, double fraction, Dynamics dyn,
                         const IntegratorConfig& cfg)
{
    require(fraction >= 0, "timing_error: fraction must be >= 0");
    if (fraction == 0)
        return {0.0, 0.0};
    auto eps = infidelity_series(spec, {opt.t_opt * (1 - fraction), opt.t_opt * (1 + fraction)}, dyn, cfg);
    const double e0 = 1.0 - opt.fidelity;
    const double lo = eps[0] - e0;
    const double hi = eps[1] - e0;
    return {std::max(lo, hi), 0.5 * (lo + hi)};
}

double analytic_delta_std(double f, double delta, double squeeze, double sigma_delta)
{
    const double s2 = squeeze * squeeze;
    const double q = 2.0 * f / (delta * s2);
    const double a = 1.0 / (2.0 * s2 * s2);
    const double x = sigma_delta / delta;
    return std::sqrt(2.0) * (pi / 4) * (pi / 4) * (1.0 + q * q) * a * a * x * x;
}

DeltaFluctuation delta_fluctuation(const GateSpec& spec, double sigma_delta, int n_samples, std::uint64_t seed,
                                   int workers)
{
    require(sigma_delta >= 0, "delta_fluctuation: sigma_delta must be >= 0");
    require(n_samples >= 2, "delta_fluctuation: need at least 2 samples");
    auto drives = gate_mode_drives(spec);
    const auto& com = drives.front();
    auto b = bogoliubov(com.delta, com.g, 0.0, spec.drive.mu);

    DeltaFluctuation out{};
    out.analytic_std = analytic_delta_std(com.f, com.delta, b.squeeze, sigma_delta);

    const double t_opt = optimize_time(spec, Dynamics::Rwa).t_opt;
    const double eps_nominal = infidelity(spec, t_opt);
    const double n = spec.n_ions();
    auto phase = [&](double delta) { return 2.0 * com.f * com.f * t_opt / (delta - com.g); };
    const double phi0 = phase(com.delta);

    struct Sample {
        double df;
        bool unstable;
    };
    auto samples = parallel_map(
        static_cast<std::size_t>(n_samples),
        [&](std::size_t k) {
            const double dd = sigma_delta * counter_normal(seed, k);
            for (const auto& d : drives)
                if (d.delta + dd <= d.g)
                    return Sample{-(1.0 - eps_nominal), true};
            GateSpec shifted = spec;
            shifted.drive.mu += dd;
            const double eps0 = infidelity(shifted, t_opt);
            const double dphi = phase(com.delta + dd) - phi0;
            const double eps1 = (dphi / n) * (dphi / n);
            const double fid = std::clamp(1.0 - eps0 - eps1, 0.0, 1.0);
            return Sample{fid - (1.0 - eps_nominal), false};
        },
        workers);

    double mean = 0;
    for (const auto& s : samples) {
        mean += s.df;
        out.unstable_samples += s.unstable ? 1 : 0;
    }
    mean /= n_samples;
    double var = 0;
    for (const auto& s : samples)
        var += (s.df - mean) * (s.df - mean);
    out.mc_mean = mean;
    out.mc_std = std::sqrt(var / (n_samples - 1));
    return out;
}

GateResult evaluate_gate(const NormalModeSet& modes, double g, double tau, double phi_target, double theta,
                         std::pair<int, int> pair, double timing_fraction, Dynamics dyn, const IntegratorConfig& cfg)
{
    auto spec = design_gate(modes, g, tau, phi_target, theta, pair, dyn, cfg);
    auto opt = optimize_time(spec, dyn, cfg);
    GateResult r;
    r.g = g;
    r.fidelity = opt.fidelity;
    r.fidelity_rwa = dyn == Dynamics::Rwa ? opt.fidelity : optimize_time(spec, Dynamics::Rwa).fidelity;
    r.t_opt = opt.t_opt;
    r.f_required = spec.drive.f;
    r.delta = spec.drive.mu - modes.omega.front();
    r.eps0 = 1.0 - opt.fidelity;
    r.timing = timing_error(spec, opt, timing_fraction, dyn, cfg);
    r.budget["residual_displacement"] = -r.eps0;
    r.budget["phase_error"] = -r.eps1;
    r.budget["timing_error"] = -r.timing.worst;
    return r;
}

} // namespace ionpa
