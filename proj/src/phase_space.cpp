#include "ionpa/phase_space.hpp"

#include "ionpa/numerics.hpp"
#include "ionpa/parallel.hpp"

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace odeint = boost::numeric::odeint;

namespace ionpa {

const char* to_string(Dynamics d)
{
    return d == Dynamics::Rwa ? "RWA" : "FULL";
}

void IntegratorConfig::validate() const
{
    require(rel_tol > 0 && std::isfinite(rel_tol), "integrator.rel_tol must be > 0");
    require(abs_tol > 0 && std::isfinite(abs_tol), "integrator.abs_tol must be > 0");
    require(max_step >= 0 && std::isfinite(max_step), "integrator.max_step must be >= 0");
    require(max_steps > 0, "integrator.max_steps must be > 0");
}

SpinBranch SpinBranch::from(const Eigen::MatrixXd& U, const std::vector<int>& sigma)
{
    require(static_cast<Eigen::Index>(sigma.size()) == U.rows(), "SpinBranch: sigma size must match ion count");
    for (int x : sigma)
        require(x == 1 || x == -1 || x == 0, "SpinBranch: sigma entries must be +1, -1 or 0");
    SpinBranch b;
    b.sigma = sigma;
    b.s.assign(U.cols(), 0.0);
    for (Eigen::Index m = 0; m < U.cols(); m++)
        for (Eigen::Index i = 0; i < U.rows(); i++)
            b.s[m] += U(i, m) * sigma[i];
    return b;
}

cplx rwa_trajectory(double f, double delta, double g, double theta, double s, double t)
{
    require(g >= 0 && g < delta, "rwa_trajectory: need 0 <= g < delta");
    const double dp = std::sqrt((delta - g) * (delta + g));
    const double r = 0.25 * std::log((delta + g) / (delta - g));
    const cplx eth = std::polar(1.0, theta);
    const cplx fp = f * (std::cosh(r) + eth * std::sinh(r));
    const cplx beta = s * fp / dp * (1.0 - std::polar(1.0, dp * t));
    return std::cosh(r) * beta + eth * std::sinh(r) * std::conj(beta);
}

cplx paper_form(cplx alpha)
{
    return cplx(0.0, -1.0) * std::conj(alpha);
}

namespace {

using State = std::array<double, 7>;

struct Coeffs {
    cplx a, b, d;
};

struct RwaCoeffs {
    double delta;
    cplx b;
    cplx d;
    Coeffs operator()(double) const { return {cplx(0, delta), b, d}; }
};

struct FullCoeffs {
    double delta, g, theta, mu;
    cplx fs;
    Coeffs operator()(double t) const
    {
        const cplx e2 = std::polar(1.0, 2.0 * mu * t);
        const double c = std::cos(2.0 * mu * t - theta);
        const cplx a(0.0, delta - 2.0 * g * c);
        const cplx b = cplx(0.0, -2.0 * g * c) * e2;
        const cplx d = cplx(0.0, -1.0) * fs * (1.0 + e2);
        return {a, b, d};
    }
};

// alpha' = A alpha + B alpha* + d, with the homogeneous propagator (u, v) and the
// interaction-picture area carried along.
template <class C>
struct LoopSystem {
    C coeffs;
    void operator()(const State& x, State& dx, double t) const
    {
        const auto k = coeffs(t);
        const cplx al(x[0], x[1]), u(x[2], x[3]), v(x[4], x[5]);
        const cplx dal = k.a * al + k.b * std::conj(al) + k.d;
        const cplx du = k.a * u + k.b * std::conj(v);
        const cplx dv = k.a * v + k.b * std::conj(u);
        const cplx bip = std::conj(u) * al - v * std::conj(al);
        const cplx dbip = std::conj(u) * k.d - v * std::conj(k.d);
        dx[0] = dal.real();
        dx[1] = dal.imag();
        dx[2] = du.real();
        dx[3] = du.imag();
        dx[4] = dv.real();
        dx[5] = dv.imag();
        dx[6] = -2.0 * std::imag(std::conj(bip) * dbip);
    }
};

template <class Sys, class St, class Obs>
void run_times(Sys sys, St& x, const std::vector<double>& grid, double dt0, const IntegratorConfig& cfg,
               Obs obs)
{
    using Stepper = odeint::runge_kutta_fehlberg78<St>;
    try {
        if (cfg.max_step > 0) {
            auto st = odeint::make_controlled(cfg.abs_tol, cfg.rel_tol, cfg.max_step, Stepper());
            odeint::integrate_times(st, sys, x, grid.begin(), grid.end(), std::min(dt0, cfg.max_step), obs,
                                    odeint::max_step_checker(cfg.max_steps));
        } else {
            auto st = odeint::make_controlled(cfg.abs_tol, cfg.rel_tol, Stepper());
            odeint::integrate_times(st, sys, x, grid.begin(), grid.end(), dt0, obs,
                                    odeint::max_step_checker(cfg.max_steps));
        }
    } catch (const std::runtime_error& e) {
        throw SolverError(std::string("integrator failure: ") + e.what());
    }
}

template <class C>
ModeTrack integrate_loop(const C& coeffs, const std::vector<double>& times, double dt0,
                         const IntegratorConfig& cfg)
{
    cfg.validate();
    require(!times.empty(), "integrate: empty time grid");
    for (std::size_t k = 0; k < times.size(); k++) {
        require(times[k] >= 0 && std::isfinite(times[k]), "integrate: times must be finite and >= 0");
        if (k > 0)
            require(times[k] > times[k - 1], "integrate: times must be strictly increasing");
    }
    std::vector<double> grid;
    const bool prepend = times.front() > 0;
    if (prepend)
        grid.push_back(0.0);
    grid.insert(grid.end(), times.begin(), times.end());

    ModeTrack tr;
    tr.alpha.reserve(times.size());
    tr.beta_ip.reserve(times.size());
    tr.phi.reserve(times.size());
    State x{0, 0, 1, 0, 0, 0, 0};
    std::size_t seen = 0;
    auto obs = [&](const State& s, double) {
        if (prepend && seen++ == 0)
            return;
        const cplx al(s[0], s[1]), u(s[2], s[3]), v(s[4], s[5]);
        tr.alpha.push_back(al);
        tr.beta_ip.push_back(std::conj(u) * al - v * std::conj(al));
        tr.phi.push_back(s[6]);
    };
    if (grid.size() == 1) {
        obs(x, 0.0);
        return tr;
    }
    run_times(LoopSystem<C>{coeffs}, x, grid, dt0, cfg, obs);
    if (tr.alpha.size() != times.size())
        throw SolverError("integrate: observer did not reach every requested time");
    return tr;
}

} // namespace

ModeTrack integrate_mode(const ModeDrive& d, const std::vector<double>& times, Dynamics dyn,
                         const IntegratorConfig& cfg)
{
    require(d.delta > 0 && std::isfinite(d.delta), "integrate_mode: delta must be > 0");
    require(std::isfinite(d.f) && std::isfinite(d.g) && std::isfinite(d.s), "integrate_mode: non-finite drive");
    const cplx fs = d.f * d.s;
    if (dyn == Dynamics::Rwa) {
        RwaCoeffs c{d.delta, cplx(0.0, -d.g) * std::polar(1.0, d.theta), cplx(0.0, -1.0) * fs};
        return integrate_loop(c, times, 0.01 / d.delta, cfg);
    }
    require(d.mu > 0, "integrate_mode: full dynamics needs mu > 0");
    FullCoeffs c{d.delta, d.g, d.theta, d.mu, fs};
    return integrate_loop(c, times, 0.01 / d.mu, cfg);
}

ModeTrack integrate_bogoliubov_frame(const ModeDrive& d, const std::vector<double>& times,
                                     const IntegratorConfig& cfg)
{
    auto b = bogoliubov(d.delta, d.g, d.theta, d.mu > 0 ? d.mu : 1.0, d.f);
    RwaCoeffs c{b.delta_p, cplx(0.0), cplx(0.0, -1.0) * d.s * b.f_p};
    return integrate_loop(c, times, 0.01 / b.delta_p, cfg);
}

TrajectoryRecord integrate_full(const DriveParams& drive, const NormalModeSet& modes, const SpinBranch& branch,
                                const std::vector<double>& times, Dynamics dyn, const IntegratorConfig& cfg,
                                int workers)
{
    drive.validate(modes);
    require(static_cast<int>(branch.s.size()) == modes.size(), "integrate_full: branch size must match modes");
    auto fm = mode_couplings(drive.f, modes);
    auto gm = mode_pa_couplings(drive, modes);
    TrajectoryRecord rec;
    rec.t = times;
    rec.dynamics = dyn;
    rec.modes = parallel_map(
        static_cast<std::size_t>(modes.size()),
        [&](std::size_t m) {
            ModeDrive d{fm[m], drive.mu - modes.omega[m], gm[m], drive.theta, drive.mu, branch.s[m]};
            return integrate_mode(d, times, dyn, cfg);
        },
        workers);
    return rec;
}

std::vector<double> geometric_phase(const TrajectoryRecord& rec)
{
    std::vector<double> phi(rec.t.size(), 0.0);
    for (const auto& m : rec.modes)
        for (std::size_t k = 0; k < phi.size(); k++)
            phi[k] += m.phi[k];
    return phi;
}

double floquet_frequency(double delta, double g, double theta, double mu, const IntegratorConfig& cfg)
{
    require(delta > 0 && mu > 0, "floquet_frequency: delta and mu must be > 0");
    using S4 = std::array<double, 4>;
    FullCoeffs c{delta, g, theta, mu, cplx(0.0)};
    // u = 1 + w keeps the small rotation angle resolved to full relative precision
    auto sys = [c](const S4& x, S4& dx, double t) {
        const auto k = c(t);
        const cplx w(x[0], x[1]), v(x[2], x[3]);
        const cplx dw = k.a * (1.0 + w) + k.b * std::conj(v);
        const cplx dv = k.a * v + k.b * (1.0 + std::conj(w));
        dx[0] = dw.real();
        dx[1] = dw.imag();
        dx[2] = dv.real();
        dx[3] = dv.imag();
    };
    const double period = pi / mu;
    S4 x{0, 0, 0, 0};
    IntegratorConfig tight = cfg;
    tight.rel_tol = std::min(cfg.rel_tol, 1e-12);
    tight.abs_tol = 1e-22;
    tight.max_step = 0;
    std::vector<double> grid{0.0, period};
    run_times(sys, x, grid, period / 64.0, tight, [](const S4&, double) {});
    const double rew = x[0];
    if (!(rew < 0 && rew > -2))
        throw SolverError("floquet_frequency: quadratic part is parametrically unstable");
    return 2.0 * std::asin(std::sqrt(-0.5 * rew)) / period;
}

double loop_period(const ModeDrive& d, Dynamics dyn, const IntegratorConfig& cfg)
{
    require(d.g >= 0 && d.g < d.delta, "loop_period: need 0 <= g < delta");
    if (dyn == Dynamics::Rwa)
        return two_pi / std::sqrt((d.delta - d.g) * (d.delta + d.g));
    return two_pi / floquet_frequency(d.delta, d.g, d.theta, d.mu, cfg);
}

const char* to_string(SEffProtocol p)
{
    return p == SEffProtocol::FixedDetuning ? "fixed-detuning" : "retuned-detuning";
}

namespace {

struct LoopSolution {
    double delta;
    double t_min;
    double f;
};

double retuned_delta(double g, double tau, double omega1, const IntegratorConfig& cfg)
{
    const double nu_target = two_pi / tau;
    auto resid = [&](double delta) {
        try {
            return floquet_frequency(delta, g, 0.0, omega1 + delta, cfg) - nu_target;
        } catch (const SolverError&) {
            return -nu_target;
        }
    };
    const double d0 = std::sqrt(nu_target * nu_target + g * g);
    double hi = d0;
    double rhi = resid(hi);
    for (int k = 0; rhi <= 0 && k < 60; k++) {
        hi *= 1.05;
        rhi = resid(hi);
    }
    if (rhi <= 0)
        throw SolverError("s_eff: loop period tau unreachable above the RWA detuning");
    double lo = hi;
    double rlo = rhi;
    for (int k = 1; rlo > 0 && k <= 60; k++) {
        lo = d0 * std::pow(0.85, k);
        rlo = resid(lo);
    }
    if (rlo > 0)
        throw SolverError("s_eff: loop period tau unreachable for this g");
    return bracketed_root(resid, lo, hi, 1e-10, "s_eff loop period");
}

LoopSolution solve_loop(double g, double tau, double omega1, double phi_target, const IntegratorConfig& cfg,
                        SEffProtocol protocol)
{
    const double nu = two_pi / tau;
    const double d0 = std::sqrt(nu * nu + g * g);
    double delta = d0;
    double t_min = tau;
    if (protocol == SEffProtocol::RetunedDetuning)
        delta = retuned_delta(g, tau, omega1, cfg);
    else
        t_min = two_pi / floquet_frequency(delta, g, 0.0, omega1 + delta, cfg);

    // Phi is exactly quadratic in f, so one trial run fixes f
    const double f_trial = std::sqrt(phi_target / loop_quantities(1.0, d0, g).phi_loop);
    ModeDrive d{f_trial, delta, g, 0.0, omega1 + delta, 1.0};
    auto tr = integrate_mode(d, {t_min}, Dynamics::Full, cfg);
    const double phi = tr.phi.back();
    if (!(phi > 0))
        throw SolverError("s_eff: non-positive loop phase");
    return {delta, t_min, f_trial * std::sqrt(phi_target / phi)};
}

} // namespace

SEffResult s_eff(double g, double tau, double omega1, double phi_target, const IntegratorConfig& cfg,
                 SEffProtocol protocol)
{
    require(g >= 0 && tau > 0 && omega1 > 0 && phi_target > 0, "s_eff: need g >= 0, tau > 0, omega1 > 0, phi > 0");
    auto pa = solve_loop(g, tau, omega1, phi_target, cfg, protocol);
    auto ref = g > 0 ? solve_loop(0.0, tau, omega1, phi_target, cfg, protocol) : pa;
    const double nu = two_pi / tau;
    const double d0 = std::sqrt(nu * nu + g * g);
    auto b = bogoliubov(d0, g, 0.0, omega1 + d0);
    SEffResult r;
    r.s_eff = (pa.f * pa.t_min) / (ref.f * ref.t_min);
    r.t_min = pa.t_min;
    r.s_rwa = b.squeeze;
    r.delta = pa.delta;
    r.mu = omega1 + pa.delta;
    r.f_pa = pa.f;
    r.f_ref = ref.f;
    r.rwa_shift = b.rwa_shift;
    r.delta_p = b.delta_p;
    return r;
}

std::vector<double> linspace(double a, double b, int n)
{
    require(n >= 1, "linspace: need at least one point");
    std::vector<double> v(n);
    for (int k = 0; k < n; k++)
        v[k] = n == 1 ? a : a + (b - a) * k / (n - 1);
    return v;
}

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec)
{
    os << "t_s";
    for (std::size_t m = 0; m < rec.modes.size(); m++)
        os << ",re_alpha_" << m + 1 << ",im_alpha_" << m + 1;
    os << ",phi\n" << std::setprecision(17);
    auto phi = geometric_phase(rec);
    for (std::size_t k = 0; k < rec.t.size(); k++) {
        os << rec.t[k];
        for (const auto& m : rec.modes)
            os << ',' << m.alpha[k].real() << ',' << m.alpha[k].imag();
        os << ',' << phi[k] << '\n';
    }
}

} // namespace ionpa
