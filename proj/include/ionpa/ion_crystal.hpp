#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <vector>

namespace ionpa {

struct TrapConfig {
    int n_ions = 1;
    double omega_t = 0;  // rad/s, c.o.m. transverse frequency
    double omega_ax = 0; // rad/s
    double mass = 0;     // kg
    double charge = 0;   // C
    double d_T = 0;      // m
    std::optional<double> eta1;

    void validate() const;
};

struct NormalModeSet {
    std::vector<double> omega; // descending, omega[0] is the c.o.m. mode
    Eigen::MatrixXd U;         // U(i, m): ion i, mode m
    std::vector<double> z0;    // sqrt(hbar / 2 M omega_m)

    int size() const { return static_cast<int>(omega.size()); }
};

// Dimensionless axial equilibrium positions, ascending and symmetric about 0.
std::vector<double> equilibrium_positions(int n, int max_iter = 200);

Eigen::MatrixXd transverse_hessian(const std::vector<double>& u, double omega_t, double omega_ax);

NormalModeSet transverse_modes(const TrapConfig& cfg);

struct LambDickeCheck {
    double ratio;
    double n_com;
};

LambDickeCheck lamb_dicke_check(double eta1, int n, double phi, double sz2, double squeeze);

void write_mode_table(std::ostream& os, const NormalModeSet& modes);

} // namespace ionpa
