#include "ionpa/ion_crystal.hpp"

#include "ionpa/common.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

namespace ionpa {

void TrapConfig::validate() const
{
    require(n_ions >= 1, "trap.n_ions must be >= 1");
    require(omega_t > 0 && std::isfinite(omega_t), "trap.omega_t must be > 0");
    require(omega_ax > 0 && std::isfinite(omega_ax), "trap.omega_ax must be > 0");
    require(omega_ax < omega_t, "trap.omega_ax must be below trap.omega_t for a linear chain");
    require(mass > 0, "trap.mass must be > 0");
    require(charge > 0, "trap.charge must be > 0");
    require(d_T > 0, "trap.d_T must be > 0");
    if (eta1)
        require(*eta1 > 0, "trap.eta1 must be > 0");
}

namespace {

Eigen::VectorXd chain_force(const Eigen::VectorXd& u)
{
    const auto n = u.size();
    Eigen::VectorXd r = u;
    for (Eigen::Index i = 0; i < n; i++) {
        for (Eigen::Index j = 0; j < n; j++) {
            if (j == i)
                continue;
            double d = u[i] - u[j];
            r[i] -= std::copysign(1.0 / (d * d), d);
        }
    }
    return r;
}

Eigen::MatrixXd chain_jacobian(const Eigen::VectorXd& u)
{
    const auto n = u.size();
    Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; i++) {
        for (Eigen::Index j = 0; j < n; j++) {
            if (j == i)
                continue;
            double c = 2.0 / std::pow(std::abs(u[i] - u[j]), 3);
            jac(i, i) += c;
            jac(i, j) = -c;
        }
    }
    return jac;
}

bool ordered(const Eigen::VectorXd& u)
{
    for (Eigen::Index i = 1; i < u.size(); i++)
        if (!(u[i] > u[i - 1]))
            return false;
    return true;
}

} // namespace

std::vector<double> equilibrium_positions(int n, int max_iter)
{
    require(n >= 1, "equilibrium_positions: N must be >= 1");
    if (n == 1)
        return {0.0};

    Eigen::VectorXd u(n);
    const double spacing = 2.0 * std::pow(static_cast<double>(n), -0.56);
    for (int i = 0; i < n; i++)
        u[i] = spacing * (i - 0.5 * (n - 1));

    Eigen::VectorXd res = chain_force(u);
    double norm = res.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < max_iter && norm > 1e-14; it++) {
        Eigen::VectorXd step = chain_jacobian(u).ldlt().solve(res);
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 60; k++) {
            Eigen::VectorXd trial = u - lambda * step;
            if (ordered(trial)) {
                Eigen::VectorXd tres = chain_force(trial);
                double tnorm = tres.lpNorm<Eigen::Infinity>();
                if (tnorm < norm || k == 59) {
                    u = trial;
                    res = tres;
                    norm = tnorm;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if (!accepted)
            break;
    }

    std::vector<double> out(n);
    for (int i = 0; i < n; i++)
        out[i] = 0.5 * (u[i] - u[n - 1 - i]);
    if (n % 2 == 1)
        out[n / 2] = 0.0;

    Eigen::VectorXd sym = Eigen::Map<Eigen::VectorXd>(out.data(), n);
    double final_norm = chain_force(sym).lpNorm<Eigen::Infinity>();
    if (!(final_norm < 1e-12))
        throw SolverError("equilibrium_positions: Newton iteration did not converge for N=" +
                          std::to_string(n) + " (residual " + std::to_string(final_norm) + ")");
    return out;
}

Eigen::MatrixXd transverse_hessian(const std::vector<double>& u, double omega_t, double omega_ax)
{
    const int n = static_cast<int>(u.size());
    const double wt2 = omega_t * omega_t;
    const double wa2 = omega_ax * omega_ax;
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; i++) {
        k(i, i) = wt2;
        for (int j = 0; j < n; j++) {
            if (j == i)
                continue;
            double c = wa2 / std::pow(std::abs(u[i] - u[j]), 3);
            k(i, i) -= c;
            k(i, j) = c;
        }
    }
    return k;
}

NormalModeSet transverse_modes(const TrapConfig& cfg)
{
    cfg.validate();
    const int n = cfg.n_ions;
    auto u = equilibrium_positions(n);
    Eigen::MatrixXd k = transverse_hessian(u, cfg.omega_t, cfg.omega_ax);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    if (es.info() != Eigen::Success)
        throw SolverError("transverse_modes: eigensolver failed");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto& ev = es.eigenvalues();
    std::sort(order.begin(), order.end(), [&](int a, int b) { return ev[a] > ev[b]; });

    NormalModeSet modes;
    modes.omega.resize(n);
    modes.z0.resize(n);
    modes.U.resize(n, n);
    for (int m = 0; m < n; m++) {
        double lam = ev[order[m]];
        if (!(lam > 0))
            throw SolverError("transverse_modes: chain unstable, eigenvalue " + std::to_string(lam) +
                              " <= 0 (omega_ax too large)");
        modes.omega[m] = std::sqrt(lam);
        Eigen::VectorXd col = es.eigenvectors().col(order[m]);
        double sum = col.sum();
        double flip = 1.0;
        if (std::abs(sum) > 1e-10) {
            flip = sum < 0 ? -1.0 : 1.0;
        } else {
            for (int i = 0; i < n; i++) {
                if (std::abs(col[i]) > 1e-10) {
                    flip = col[i] < 0 ? -1.0 : 1.0;
                    break;
                }
            }
        }
        modes.U.col(m) = flip * col;
    }

    const double wt2 = cfg.omega_t * cfg.omega_t;
    if (std::abs(modes.omega[0] * modes.omega[0] - wt2) > 1e-12 * wt2)
        throw SolverError("transverse_modes: c.o.m. eigenvalue deviates from omega_t^2");
    modes.omega[0] = cfg.omega_t;
    modes.U.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n)));
    for (int pass = 0; pass < 2; pass++)
        for (int m = 1; m < n; m++) {
            for (int k = 0; k < m; k++)
                modes.U.col(m) -= modes.U.col(k).dot(modes.U.col(m)) * modes.U.col(k);
            modes.U.col(m).normalize();
        }

    for (int m = 0; m < n; m++)
        modes.z0[m] = std::sqrt(hbar / (2.0 * cfg.mass * modes.omega[m]));
    return modes;
}

LambDickeCheck lamb_dicke_check(double eta1, int n, double phi, double sz2, double squeeze)
{
    require(eta1 >= 0 && n > 0 && phi > 0 && sz2 > 0 && squeeze > 0,
            "lamb_dicke_check: inputs must be positive");
    LambDickeCheck out{};
    double denom = (eta1 / n) * std::sqrt(6.0 * phi * sz2 / pi);
    out.ratio = denom > 0 ? squeeze / denom : std::numeric_limits<double>::infinity();
    out.n_com = 3.0 * phi * sz2 / (pi * n * squeeze * squeeze);
    return out;
}

void write_mode_table(std::ostream& os, const NormalModeSet& modes)
{
    const int n = modes.size();
    os << "m,omega_hz,z0_m";
    for (int i = 0; i < n; i++)
        os << ",U_" << i + 1;
    os << '\n' << std::setprecision(17);
    for (int m = 0; m < n; m++) {
        os << m + 1 << ',' << rad_to_hz(modes.omega[m]) << ',' << modes.z0[m];
        for (int i = 0; i < n; i++)
            os << ',' << modes.U(i, m);
        os << '\n';
    }
}

} // namespace ionpa
