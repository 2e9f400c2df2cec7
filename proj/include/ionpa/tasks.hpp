#pragma once

#include "ionpa/config.hpp"
#include "ionpa/gate_designer.hpp"
#include "ionpa/output.hpp"
#include "ionpa/parallel.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ionpa {

struct SideFile {
    std::string suffix; // appended to the output stem
    std::string contents;
};

struct TaskOutput {
    Table table;
    std::vector<SideFile> extra;
    RunManifest manifest;
    int failed_rows = 0;
};

// Evaluates fn at every axis value in input order; a point that throws becomes a
// row of NaNs with status "failed" instead of aborting the sweep.
template <class F>
std::vector<std::vector<Cell>> sweep_rows(const std::vector<double>& xs, std::size_t width, F&& fn, int workers,
                                          int& failed)
{
    auto rows = parallel_map(
        xs.size(),
        [&](std::size_t k) {
            try {
                auto row = fn(xs[k]);
                row.emplace_back(std::string("ok"));
                return row;
            } catch (const Error&) {
                std::vector<Cell> row(width, Cell(std::numeric_limits<double>::quiet_NaN()));
                row.front() = xs[k];
                row.emplace_back(std::string("failed"));
                return row;
            }
        },
        workers);
    failed = 0;
    for (const auto& r : rows)
        failed += std::get<std::string>(r.back()) == "failed" ? 1 : 0;
    return rows;
}

struct GateSweep {
    std::vector<std::optional<GateResult>> points;
    std::vector<double> axis;
    int best = -1; // operating point: maximum fidelity among converged points
};

GateSweep gate_sweep(const ExperimentConfig& cfg, int workers);

TaskOutput run_task(const ExperimentConfig& cfg, int workers);

// Writes the table, side files and manifest under dir; returns the data file path.
std::string write_outputs(const TaskOutput& out, const ExperimentConfig& cfg, const std::string& dir);

} // namespace ionpa
