#pragma once

#include "ionpa/common.hpp"
#include "ionpa/ion_crystal.hpp"

#include <optional>
#include <vector>

namespace ionpa {

struct DriveParams {
    double f = 0;     // c.o.m. SDF coupling, rad/s
    double mu = 0;    // SDF frequency, rad/s
    double g = 0;     // PA coupling, rad/s
    double theta = 0; // rad
    bool use_mode_dependent_g = false;

    void validate(const NormalModeSet& modes) const;
};

struct BogoliubovEntry {
    double delta = 0;
    double r = 0;
    double squeeze = 1; // quadrature squeezing at the configured theta
    double delta_p = 0;
    cplx f_p{};
    double rwa_shift = 0;
};

BogoliubovEntry bogoliubov(double delta, double g, double theta, double mu, double f = 1.0);

using BogoliubovSet = std::vector<BogoliubovEntry>;

// Per-mode couplings: f_m = f * z0m / z01, g_m = g * omega_1 / omega_m when mode dependent.
std::vector<double> mode_couplings(double f_com, const NormalModeSet& modes);
std::vector<double> mode_pa_couplings(const DriveParams& drive, const NormalModeSet& modes);

BogoliubovSet bogoliubov_set(const DriveParams& drive, const NormalModeSet& modes);

double coupling_from_force(double force, double z0);
double pa_coupling_from_voltage(double voltage, double charge, double mass, double omega_m, double d_T);

struct DecoherenceRates {
    double el = 0;
    double ud = 0;
    double du = 0;

    double gamma_r() const { return ud + du; }
    double gamma() const { return (ud - du) / 4.0; }
    double big_gamma() const { return (gamma_r() + el) / 2.0; }
    void validate() const;
};

struct LoopQuantities {
    double phi_loop;
    double tau;
    double J;
};

LoopQuantities loop_quantities(double f, double delta, double g);

double j_of_theta(double f, double delta, double g, double theta);

struct SpectatorBound {
    double bound;
    std::optional<double> gap_bound;
};

SpectatorBound spectator_bound(double f_m, double delta_m, double g, std::optional<double> mode_gap = {});

double pa_feasibility(double voltage, double v_threshold, double omega1);

enum class RwaRegion { Valid, Marginal, Broken };

RwaRegion rwa_region(double g, double delta, double mu);
const char* to_string(RwaRegion r);

} // namespace ionpa
