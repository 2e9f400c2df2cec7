#include "ionpa/drive_model.hpp"

#include <algorithm>
#include <cmath>

namespace ionpa {

void DriveParams::validate(const NormalModeSet& modes) const
{
    require(std::isfinite(f) && f >= 0, "drive.f must be >= 0");
    require(std::isfinite(theta), "drive.theta must be finite");
    require(std::isfinite(g) && g >= 0, "drive.g must be >= 0");
    require(mu > modes.omega.front(), "drive.mu must exceed the c.o.m. frequency (blue detuning)");
    auto gm = mode_pa_couplings(*this, modes);
    for (int m = 0; m < modes.size(); m++) {
        double delta = mu - modes.omega[m];
        require(gm[m] < delta, "drive.g must stay below delta_m for mode " + std::to_string(m + 1));
    }
}

BogoliubovEntry bogoliubov(double delta, double g, double theta, double mu, double f)
{
    require(delta > 0 && std::isfinite(delta), "bogoliubov: delta must be > 0");
    require(std::abs(g) < delta, "bogoliubov: |g| >= delta is outside the stable squeezing regime");
    require(mu > 0, "bogoliubov: mu must be > 0");
    BogoliubovEntry b;
    b.delta = delta;
    b.delta_p = std::sqrt((delta - g) * (delta + g));
    b.r = 0.25 * std::log((delta + g) / (delta - g));
    double cosh2r = delta / b.delta_p;
    double sinh2r = g / b.delta_p;
    b.squeeze = 1.0 / std::sqrt(cosh2r + std::cos(theta) * sinh2r);
    b.f_p = f * (std::cosh(b.r) + std::polar(1.0, theta) * std::sinh(b.r));
    double e2r = std::sqrt((delta + g) / (delta - g));
    b.rwa_shift = g * g * e2r / (4.0 * mu);
    return b;
}

std::vector<double> mode_couplings(double f_com, const NormalModeSet& modes)
{
    std::vector<double> fm(modes.size());
    for (int m = 0; m < modes.size(); m++)
        fm[m] = f_com * std::sqrt(modes.omega[0] / modes.omega[m]);
    return fm;
}

std::vector<double> mode_pa_couplings(const DriveParams& drive, const NormalModeSet& modes)
{
    std::vector<double> gm(modes.size(), drive.g);
    if (drive.use_mode_dependent_g)
        for (int m = 0; m < modes.size(); m++)
            gm[m] = drive.g * modes.omega[0] / modes.omega[m];
    return gm;
}

BogoliubovSet bogoliubov_set(const DriveParams& drive, const NormalModeSet& modes)
{
    auto fm = mode_couplings(drive.f, modes);
    auto gm = mode_pa_couplings(drive, modes);
    BogoliubovSet set;
    for (int m = 0; m < modes.size(); m++)
        set.push_back(bogoliubov(drive.mu - modes.omega[m], gm[m], drive.theta, drive.mu, fm[m]));
    return set;
}

double coupling_from_force(double force, double z0)
{
    return force * z0 / (2.0 * hbar);
}

double pa_coupling_from_voltage(double voltage, double charge, double mass, double omega_m, double d_T)
{
    require(mass > 0 && omega_m > 0 && d_T > 0, "pa_coupling_from_voltage: invalid trap parameters");
    return charge * voltage / (mass * omega_m * d_T * d_T);
}

void DecoherenceRates::validate() const
{
    require(el >= 0 && std::isfinite(el), "rates.gamma_el must be >= 0");
    require(ud >= 0 && std::isfinite(ud), "rates.gamma_ud must be >= 0");
    require(du >= 0 && std::isfinite(du), "rates.gamma_du must be >= 0");
}

LoopQuantities loop_quantities(double f, double delta, double g)
{
    require(f > 0, "loop_quantities: f must be > 0");
    require(g >= 0 && g < delta, "loop_quantities: need 0 <= g < delta");
    LoopQuantities q;
    double dm = delta - g;
    double dp = delta + g;
    q.tau = two_pi / std::sqrt(dm * dp);
    q.J = f * f / dm;
    q.phi_loop = 4.0 * pi * f * f / (std::pow(dm, 1.5) * std::sqrt(dp));
    return q;
}

double j_of_theta(double f, double delta, double g, double theta)
{
    require(g >= 0 && g < delta, "j_of_theta: need 0 <= g < delta");
    double c = std::cos(theta);
    return f * f / (delta - g) * 0.5 * (1.0 + c) + f * f / (delta + g) * 0.5 * (1.0 - c);
}

SpectatorBound spectator_bound(double f_m, double delta_m, double g, std::optional<double> mode_gap)
{
    require(delta_m > g, "spectator_bound: delta_m must exceed g");
    SpectatorBound b{2.0 * f_m / (delta_m - g), std::nullopt};
    if (mode_gap) {
        require(*mode_gap > 0, "spectator_bound: mode gap must be > 0");
        b.gap_bound = 2.0 * f_m / *mode_gap;
    }
    return b;
}

double pa_feasibility(double voltage, double v_threshold, double omega1)
{
    require(v_threshold > 0 && voltage >= 0, "pa_feasibility: voltages must be positive");
    return voltage / v_threshold * omega1 / 4.0;
}

RwaRegion rwa_region(double g, double delta, double mu)
{
    auto b = bogoliubov(delta, g, 0.0, mu);
    if (b.rwa_shift < b.delta_p / 20.0)
        return RwaRegion::Valid;
    if (b.rwa_shift < b.delta_p / 2.0)
        return RwaRegion::Marginal;
    return RwaRegion::Broken;
}

const char* to_string(RwaRegion r)
{
    switch (r) {
    case RwaRegion::Valid:
        return "VALID";
    case RwaRegion::Marginal:
        return "MARGINAL";
    case RwaRegion::Broken:
        return "BROKEN";
    }
    return "?";
}

} // namespace ionpa
