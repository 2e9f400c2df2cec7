#include "ionpa/spin_squeezing.hpp"

#include "ionpa/numerics.hpp"
#include "ionpa/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ionpa {

namespace {

cplx csinc(cplx w)
{
    if (std::abs(w) < 1e-4) {
        cplx w2 = w * w;
        return 1.0 - w2 / 6.0 + w2 * w2 / 120.0;
    }
    return std::sin(w) / w;
}

cplx cpow_int(cplx z, int n)
{
    if (n == 0)
        return 1.0;
    if (z == cplx(0.0))
        return 0.0;
    return std::exp(static_cast<double>(n) * std::log(z));
}

} // namespace

PhiPsi phi_psi(double J, double t, const DecoherenceRates& rates, int n)
{
    require(n >= 1, "phi_psi: N must be >= 1");
    const double gr = rates.gamma_r();
    const cplx a(2.0 * J / n, 2.0 * rates.gamma());
    const cplx w = t * std::sqrt(a * a - rates.ud * rates.du);
    const double damp = std::exp(-0.5 * gr * t);
    const cplx s = csinc(w);
    PhiPsi out;
    out.phi = damp * (std::cos(w) + t * 0.5 * gr * s);
    out.psi = damp * t * (cplx(0.0, 1.0) * a - 2.0 * rates.gamma()) * s;
    return out;
}

Correlators correlators(double J, double t, const DecoherenceRates& rates, int n)
{
    require(n >= 2, "correlators: N must be >= 2");
    const double g1 = std::exp(-rates.big_gamma() * t);
    const auto p1 = phi_psi(J, t, rates, n);
    const auto p2 = phi_psi(2.0 * J, t, rates, n);
    const auto p0 = phi_psi(0.0, t, rates, n);
    Correlators c;
    c.sp = 0.5 * g1 * cpow_int(p1.phi, n - 1);
    c.pp = 0.25 * g1 * g1 * cpow_int(p2.phi, n - 2);
    c.pm = 0.25 * g1 * g1 * cpow_int(p0.phi, n - 2);
    c.pz = 0.5 * g1 * p1.psi * cpow_int(p1.phi, n - 2);
    const double gr = rates.gamma_r();
    if (gr > 0)
        c.z = 4.0 * rates.gamma() / gr * std::expm1(-gr * t);
    else
        c.z = -4.0 * rates.gamma() * t;
    c.zz = c.z * c.z;
    return c;
}

SpinMoments spin_moments(const Correlators& c, int n)
{
    const double dn = n;
    double pair[3][3];
    pair[0][0] = 2.0 * c.pp.real() + 2.0 * c.pm.real();
    pair[1][1] = 2.0 * c.pm.real() - 2.0 * c.pp.real();
    pair[0][1] = pair[1][0] = 2.0 * c.pp.imag();
    pair[0][2] = pair[2][0] = 2.0 * c.pz.real();
    pair[1][2] = pair[2][1] = 2.0 * c.pz.imag();
    pair[2][2] = c.zz;

    SpinMoments m;
    m.mean[0] = dn * c.sp.real();
    m.mean[1] = dn * c.sp.imag();
    m.mean[2] = 0.5 * dn * c.z;
    for (int a = 0; a < 3; a++)
        for (int b = 0; b < 3; b++)
            m.cov[a][b] = 0.25 * ((a == b ? dn : 0.0) + dn * (dn - 1.0) * pair[a][b]) - m.mean[a] * m.mean[b];
    return m;
}

XiResult xi_from_moments(const SpinMoments& m, int n)
{
    const double s2 = m.mean[0] * m.mean[0] + m.mean[1] * m.mean[1] + m.mean[2] * m.mean[2];
    const double s = std::sqrt(s2);
    if (!(s > 1e-12 * n))
        throw SolverError("xi_squared: contrast collapse, mean spin vanishes");
    const double nv[3] = {m.mean[0] / s, m.mean[1] / s, m.mean[2] / s};

    // e2: z axis projected orthogonal to the mean spin; e1 = e2 x n (y for a mean along +x)
    double e2[3] = {-nv[2] * nv[0], -nv[2] * nv[1], 1.0 - nv[2] * nv[2]};
    double e2n = std::sqrt(e2[0] * e2[0] + e2[1] * e2[1] + e2[2] * e2[2]);
    if (e2n < 1e-12) {
        e2[0] = 0;
        e2[1] = 1;
        e2[2] = 0;
        e2n = 1;
    }
    for (double& v : e2)
        v /= e2n;
    const double e1[3] = {e2[1] * nv[2] - e2[2] * nv[1], e2[2] * nv[0] - e2[0] * nv[2],
                          e2[0] * nv[1] - e2[1] * nv[0]};

    auto quad = [&](const double* x, const double* y) {
        double acc = 0;
        for (int a = 0; a < 3; a++)
            for (int b = 0; b < 3; b++)
                acc += x[a] * m.cov[a][b] * y[b];
        return acc;
    };
    const double vy = quad(e1, e1);
    const double vz = quad(e2, e2);
    const double cyz = quad(e1, e2);
    const double lam = 0.5 * (vy + vz - std::sqrt((vy - vz) * (vy - vz) + 4.0 * cyz * cyz));

    XiResult r;
    r.xi2 = n * lam / s2;
    r.psi_opt = 0.5 * std::atan2(2.0 * cyz, vy - vz);
    r.contrast = s / (0.5 * n);
    return r;
}

XiResult xi_squared(double J, double t, const DecoherenceRates& rates, int n)
{
    return xi_from_moments(spin_moments(correlators(J, t, rates, n), n), n);
}

SqueezingResult minimize_xi(double J, const DecoherenceRates& rates, int n)
{
    require(J > 0, "minimize_xi: J must be > 0");
    require(n >= 2, "minimize_xi: N must be >= 2");
    const double gr = rates.gamma_r();
    double jt_hi = std::min(10.0 * std::cbrt(static_cast<double>(n)), 0.5 * pi * n);
    if (gr > 0)
        jt_hi = std::min(jt_hi, 10.0 * std::cbrt(J / (2.0 * gr)));
    const double t_hi = jt_hi / J;
    const double t_lo = 1e-3 * t_hi;

    auto cost = [&](double t) {
        try {
            double v = xi_squared(J, t, rates, n).xi2;
            return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
        } catch (const SolverError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    constexpr int grid = 200;
    std::vector<double> ts(grid), vals(grid);
    for (int k = 0; k < grid; k++) {
        ts[k] = t_lo * std::pow(t_hi / t_lo, k / double(grid - 1));
        vals[k] = cost(ts[k]);
    }
    int best = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    if (!std::isfinite(vals[best]))
        throw SolverError("minimize_xi: no finite squeezing parameter on the search grid");
    double a = ts[std::max(best - 1, 0)];
    double b = ts[std::min(best + 1, grid - 1)];
    auto m = golden_section(cost, a, b, 1e-7 * ts[best]);
    if (vals[best] < m.fx)
        m = {ts[best], vals[best]};

    auto xr = xi_squared(J, m.x, rates, n);
    return {xr.xi2, xr.psi_opt, m.x, xr.contrast};
}

std::pair<double, double> pa_scaled_rates(double ratio_el, double ratio_r, double s_eff)
{
    require(s_eff > 0 && s_eff <= 1, "pa_scaled_rates: s_eff must be in (0, 1]");
    return {s_eff * ratio_el, s_eff * ratio_r};
}

double theta_j_factor(double theta, double squeeze)
{
    double c = std::cos(theta);
    double s4 = squeeze * squeeze * squeeze * squeeze;
    return 0.5 * (1.0 + c) + s4 * 0.5 * (1.0 - c);
}

double theta_shift(double J, const DecoherenceRates& rates, int n, double theta, double squeeze)
{
    auto opt = minimize_xi(J, rates, n);
    double jt = J * theta_j_factor(theta, squeeze);
    return xi_squared(jt, opt.t_opt, rates, n).xi2 - opt.xi2;
}

ThetaShift theta_sensitivity(double J, const DecoherenceRates& rates, int n, double sigma_theta,
                             int n_samples, std::uint64_t seed, double squeeze, int workers)
{
    require(sigma_theta >= 0, "theta_sensitivity: sigma_theta must be >= 0");
    require(n_samples >= 2, "theta_sensitivity: need at least 2 samples");
    auto opt = minimize_xi(J, rates, n);
    auto shifts = parallel_map(static_cast<std::size_t>(n_samples), [&](std::size_t k) {
        double th = sigma_theta * counter_normal(seed, k);
        return xi_squared(J * theta_j_factor(th, squeeze), opt.t_opt, rates, n).xi2 - opt.xi2;
    }, workers);
    double mean = 0;
    for (double v : shifts)
        mean += v;
    mean /= n_samples;
    double var = 0;
    for (double v : shifts)
        var += (v - mean) * (v - mean);
    var /= (n_samples - 1);
    double s2 = sigma_theta * sigma_theta;
    return {mean, std::sqrt(var), 3.0 * s2 * s2 / 16.0};
}

DeltaShift delta_sensitivity(double J, const DecoherenceRates& rates, int n, double sigma_delta_over_delta,
                             double squeeze)
{
    require(squeeze > 0 && squeeze <= 1, "delta_sensitivity: squeeze must be in (0, 1]");
    require(J > 0, "delta_sensitivity: J must be > 0");
    double s4 = squeeze * squeeze * squeeze * squeeze;
    double dj = sigma_delta_over_delta / (2.0 * s4);
    bool valid = rates.gamma_r() <= 0 || n * rates.gamma_r() / J < 0.1;
    return {dj, dj * dj, valid};
}

} // namespace ionpa
