#pragma once

#include "ionpa/drive_model.hpp"
#include "ionpa/ion_crystal.hpp"
#include "ionpa/phase_space.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ionpa {

struct GateSpec {
    NormalModeSet modes;
    DriveParams drive;
    std::pair<int, int> ion_pair{0, 1};
    double phi_target = 0;
    double tau_nominal = 0;

    void validate() const;
    int n_ions() const { return modes.size(); }
};

// Worst-case branch weight per mode for the gate pair, spectators undriven.
std::vector<double> worst_case_weights(const GateSpec& spec);

// Per-mode drives with f_m * |s_m| folded into the amplitude.
std::vector<ModeDrive> gate_mode_drives(const GateSpec& spec);

double infidelity(const GateSpec& spec, double t);

std::vector<double> infidelity_series(const GateSpec& spec, const std::vector<double>& times, Dynamics dyn,
                                      const IntegratorConfig& cfg);

struct TimeOptimum {
    double t_opt;
    double fidelity;
};

TimeOptimum optimize_time(const GateSpec& spec, Dynamics dyn = Dynamics::Rwa, const IntegratorConfig& cfg = {});

struct PowerSolution {
    double f;
    double delta;
    double mu;
    double t_loop;
};

PowerSolution required_power(double g, double tau, double phi_target, const NormalModeSet& modes,
                             Dynamics dyn = Dynamics::Rwa, const IntegratorConfig& cfg = {});

// Gate at fixed tau for PA strength g: detuning from tau, f from the phase target.
GateSpec design_gate(const NormalModeSet& modes, double g, double tau, double phi_target, double theta,
                     std::pair<int, int> pair, Dynamics dyn, const IntegratorConfig& cfg);

struct TimingShift {
    double worst;
    double mean;
};

TimingShift timing_error(const GateSpec& spec, double fraction, Dynamics dyn = Dynamics::Rwa,
                         const IntegratorConfig& cfg = {});

// Same, reusing an already optimized gate time.
TimingShift timing_error(const GateSpec& spec, const TimeOptimum& opt, double fraction, Dynamics dyn,
                         const IntegratorConfig& cfg);

double analytic_delta_std(double f, double delta, double squeeze, double sigma_delta);

struct DeltaFluctuation {
    double analytic_std;
    double mc_std;
    double mc_mean;
    int unstable_samples;
};

DeltaFluctuation delta_fluctuation(const GateSpec& spec, double sigma_delta, int n_samples, std::uint64_t seed,
                                   int workers = 0);

struct GateResult {
    double g = 0;
    double fidelity = 0;
    double fidelity_rwa = 0;
    double t_opt = 0;
    double f_required = 0;
    double delta = 0;
    double eps0 = 0;
    double eps1 = 0; // zero at the design point, phase matched by construction
    TimingShift timing{};
    std::map<std::string, double> budget;
};

// Design at fixed tau, optimize the gate time and evaluate the timing error.
GateResult evaluate_gate(const NormalModeSet& modes, double g, double tau, double phi_target, double theta,
                         std::pair<int, int> pair, double timing_fraction, Dynamics dyn, const IntegratorConfig& cfg);

} // namespace ionpa
