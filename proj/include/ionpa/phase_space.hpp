#pragma once

#include "ionpa/common.hpp"
#include "ionpa/drive_model.hpp"
#include "ionpa/ion_crystal.hpp"

#include <iosfwd>
#include <vector>

namespace ionpa {

enum class Dynamics { Rwa, Full };
const char* to_string(Dynamics d);

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0; // s, 0 = unbounded
    int max_steps = 10'000'000; // per output interval

    void validate() const;
};

struct SpinBranch {
    std::vector<int> sigma; // +1, -1, or 0 for an undriven ion
    std::vector<double> s;  // s_m = sum_i U(i, m) sigma_i

    static SpinBranch from(const Eigen::MatrixXd& U, const std::vector<int>& sigma);
};

// Single-mode drive in the mu-rotating frame.
struct ModeDrive {
    double f = 0;
    double delta = 0;
    double g = 0;
    double theta = 0;
    double mu = 0; // only used by the full dynamics
    double s = 1;
};

// Closed-form RWA displacement in the rotating frame convention
// d(alpha)/dt = i delta alpha - i g e^{i theta} alpha* - i f s.
cplx rwa_trajectory(double f, double delta, double g, double theta, double s, double t);

// Same trajectory expressed in the printed convention of the paper, -i conj(alpha).
cplx paper_form(cplx alpha);

struct ModeTrack {
    std::vector<cplx> alpha;
    std::vector<cplx> beta_ip;
    std::vector<double> phi;
};

struct TrajectoryRecord {
    std::vector<double> t;
    std::vector<ModeTrack> modes;
    Dynamics dynamics = Dynamics::Rwa;
};

ModeTrack integrate_mode(const ModeDrive& d, const std::vector<double>& times, Dynamics dyn,
                         const IntegratorConfig& cfg);

// Same loop integrated in the Bogoliubov frame, where the quadratic part is diagonal.
ModeTrack integrate_bogoliubov_frame(const ModeDrive& d, const std::vector<double>& times,
                                     const IntegratorConfig& cfg);

TrajectoryRecord integrate_full(const DriveParams& drive, const NormalModeSet& modes, const SpinBranch& branch,
                                const std::vector<double>& times, Dynamics dyn, const IntegratorConfig& cfg,
                                int workers = 1);

// Total accumulated geometric phase, summed over modes, on the record's time grid.
std::vector<double> geometric_phase(const TrajectoryRecord& rec);

// Floquet frequency of the quadratic part of the full dynamics (period pi/mu).
double floquet_frequency(double delta, double g, double theta, double mu, const IntegratorConfig& cfg);

double loop_period(const ModeDrive& d, Dynamics dyn, const IntegratorConfig& cfg);

// FixedDetuning keeps the RWA design detuning for tau and measures the shifted
// full-dynamics loop; RetunedDetuning moves delta until the full loop period equals tau.
enum class SEffProtocol { FixedDetuning, RetunedDetuning };
const char* to_string(SEffProtocol p);

struct SEffResult {
    double s_eff;
    double t_min;
    double s_rwa;
    double delta;
    double mu;
    double f_pa;
    double f_ref;
    double rwa_shift;
    double delta_p;
};

SEffResult s_eff(double g, double tau, double omega1, double phi_target, const IntegratorConfig& cfg,
                 SEffProtocol protocol = SEffProtocol::FixedDetuning);

std::vector<double> linspace(double a, double b, int n);

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec);

} // namespace ionpa
