#pragma once

#include "ionpa/drive_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ionpa {

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct RunManifest {
    std::string config_sha256;
    std::string version = IONPA_VERSION;
    std::string task;
    std::optional<std::uint64_t> seed;
    BogoliubovSet derived;
    double omega1 = 0;
    std::vector<std::pair<std::string, std::string>> meta;
    double wall_clock_s = 0;
    int workers = 0;
};

std::string sha256_hex(const std::string& data);

std::string format_double(double x);

// Data files carry everything except wall clock and worker count, so identical
// inputs give identical bytes; those two go to the sidecar manifest.
void write_csv(std::ostream& os, const Table& t, const RunManifest& m);
void write_table_json(std::ostream& os, const Table& t, const RunManifest& m);
void write_manifest_json(std::ostream& os, const RunManifest& m);

void write_file(const std::string& path, const std::string& contents);

} // namespace ionpa
