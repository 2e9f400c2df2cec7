#include "ionpa/gate_designer.hpp"
#include "ionpa/numerics.hpp"
#include "ionpa/parallel.hpp"
#include "ionpa/spin_squeezing.hpp"

#include <benchmark/benchmark.h>

using namespace ionpa;

namespace {

const NormalModeSet& chain()
{
    static const NormalModeSet modes = [] {
        TrapConfig tc{5, hz_to_rad(3.045e6), hz_to_rad(0.62e6), 171 * amu, e_charge, 1e-3, {}};
        return transverse_modes(tc);
    }();
    return modes;
}

double gate_point(std::size_t k)
{
    const double g = hz_to_rad(100.0 * k);
    return evaluate_gate(chain(), g, 180e-6, 5 * pi / 4, 0.0, {0, 1}, 0.01, Dynamics::Rwa, {}).fidelity;
}

double xi_point(std::size_t k)
{
    DecoherenceRates r{0.12, 0.02, 0.02};
    const double th = deg_to_rad(18.0) * counter_normal(7, k);
    return xi_squared(theta_j_factor(th, 0.5), 0.3, r, 1000).xi2;
}

void BM_GateSweepSerial(benchmark::State& st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(serial_map(static_cast<std::size_t>(st.range(0)), gate_point));
}

void BM_GateSweepParallel(benchmark::State& st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(parallel_map(static_cast<std::size_t>(st.range(0)), gate_point));
}

void BM_ThetaMonteCarloSerial(benchmark::State& st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(serial_map(static_cast<std::size_t>(st.range(0)), xi_point));
}

void BM_ThetaMonteCarloParallel(benchmark::State& st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(parallel_map(static_cast<std::size_t>(st.range(0)), xi_point));
}

} // namespace

BENCHMARK(BM_GateSweepSerial)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GateSweepParallel)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ThetaMonteCarloSerial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ThetaMonteCarloParallel)->Arg(20000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
