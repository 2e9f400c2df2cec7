#pragma once

#include "ionpa/common.hpp"
#include "ionpa/drive_model.hpp"

#include <cstdint>
#include <utility>

namespace ionpa {

struct PhiPsi {
    cplx phi;
    cplx psi;
};

// Exact single-pair functions of the dissipative Ising solution; N enters via J/N.
PhiPsi phi_psi(double J, double t, const DecoherenceRates& rates, int n);

struct Correlators {
    cplx sp;   // <sigma+_i>
    cplx pp;   // <sigma+_i sigma+_j>
    cplx pm;   // <sigma+_i sigma-_j>
    cplx pz;   // <sigma+_i sigma^z_j>
    double z;  // <sigma^z_i>
    double zz; // <sigma^z_i sigma^z_j>
};

Correlators correlators(double J, double t, const DecoherenceRates& rates, int n);

struct SpinMoments {
    double mean[3];  // <S_x>, <S_y>, <S_z>
    double cov[3][3]; // symmetrized covariance of the collective spin
};

SpinMoments spin_moments(const Correlators& c, int n);

struct XiResult {
    double xi2;
    double psi_opt;
    double contrast;
};

XiResult xi_from_moments(const SpinMoments& m, int n);
XiResult xi_squared(double J, double t, const DecoherenceRates& rates, int n);

struct SqueezingResult {
    double xi2;
    double psi_opt;
    double t_opt;
    double contrast;
};

SqueezingResult minimize_xi(double J, const DecoherenceRates& rates, int n);

std::pair<double, double> pa_scaled_rates(double ratio_el, double ratio_r, double s_eff);

// J(theta)/J(0) at squeeze S in the limit delta - g << delta + g.
double theta_j_factor(double theta, double squeeze);

struct ThetaShift {
    double mean;
    double std;
    double analytic_mean; // E[theta^4]/16
};

double theta_shift(double J, const DecoherenceRates& rates, int n, double theta, double squeeze = 0.0);

ThetaShift theta_sensitivity(double J, const DecoherenceRates& rates, int n, double sigma_theta,
                             int n_samples, std::uint64_t seed, double squeeze = 0.0, int workers = 0);

struct DeltaShift {
    double dj_over_j;
    double dxi2;
    bool valid;
};

DeltaShift delta_sensitivity(double J, const DecoherenceRates& rates, int n, double sigma_delta_over_delta,
                             double squeeze);

} // namespace ionpa
