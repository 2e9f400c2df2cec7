#pragma once

#include "ionpa/drive_model.hpp"
#include "ionpa/ion_crystal.hpp"
#include "ionpa/phase_space.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ionpa {

enum class Task { Modes, Trajectory, Phase, SEffSweep, SqueezingSweep, GateSweep, Sensitivity };
const char* to_string(Task t);

enum class AxisScale { Lin, Log };

struct SweepAxis {
    std::string variable;
    double lo = 0;
    double hi = 0;
    int points = 1;
    AxisScale scale = AxisScale::Lin;

    std::vector<double> values() const;
};

struct MonteCarlo {
    int n_samples = 0;
    std::optional<std::uint64_t> seed;
};

struct OutputSpec {
    std::string path = "out";
    std::string format = "csv";
};

// Drive section as written in the config: Hz and degrees.
struct DriveSection {
    double f_hz = 0;
    double detuning_hz = 0; // mu - omega_1
    double g_hz = 0;
    double theta_deg = 0;
    bool mode_dependent_g = false;
};

struct RatesSection {
    double el = 0;
    double ud = 0;
    double du = 0;
    bool per_J = false; // rates given in units of J instead of Hz
};

struct TrajectoryParams {
    double t_end_s = 0; // 0 = one c.o.m. loop
    int points = 201;
    Dynamics dynamics = Dynamics::Rwa;
    std::vector<int> sigma; // empty = all +1
};

struct PhaseParams {
    Dynamics dynamics = Dynamics::Rwa;
};

struct SEffParams {
    std::vector<double> tau_s;
    double phi_target = pi;
    bool retuned = false;
};

struct SqueezingParams {
    int n = 100;
    std::vector<double> s_eff;
    double sigma_theta_deg = 0;
    std::optional<double> band_s_eff;
};

struct GateParams {
    double tau_s = 180e-6;
    std::optional<double> phi_target; // default N pi / 4
    std::pair<int, int> pair{0, 1};
    Dynamics dynamics = Dynamics::Full;
    double timing_fraction = 0.01;
    double sigma_delta_rad_s = 0;
};

struct SensitivityParams {
    std::string target = "squeezing";
    std::vector<double> theta_rad;
    double sigma_theta_deg = 0;
    double sigma_delta_over_delta = 0;
    double squeeze = 0;
    double sigma_delta_rad_s = 0;
    double tau_s = 180e-6;
};

struct ExperimentConfig {
    TrapConfig trap;
    bool has_trap = false;
    DriveSection drive;
    RatesSection rates;
    Task task = Task::Modes;
    std::optional<SweepAxis> sweep;
    std::optional<MonteCarlo> mc;
    IntegratorConfig integrator;
    OutputSpec output;

    TrajectoryParams trajectory;
    PhaseParams phase;
    SEffParams seff;
    SqueezingParams squeezing;
    GateParams gate;
    SensitivityParams sensitivity;

    std::string canonical; // compact JSON of the effective config, hashed for the manifest

    DriveParams drive_params() const; // needs the trap for mu
    DecoherenceRates decoherence(double J) const;
    bool uses_mc() const;
    void validate() const;
    void check_point() const;

    // Apply a sweep value to the field the axis names.
    void set_variable(const std::string& variable, double value);
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Rebuild the canonical text after command-line overrides.
void apply_seed_override(ExperimentConfig& cfg, std::uint64_t seed);

bool is_sweep_variable(const std::string& name);

} // namespace ionpa
