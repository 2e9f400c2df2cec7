#include "ionpa/output.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace ionpa {

using ojson = nlohmann::ordered_json;

std::string sha256_hex(const std::string& data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; i++) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

namespace {

std::string cell_text(const Cell& c)
{
    if (auto d = std::get_if<double>(&c))
        return format_double(*d);
    if (auto i = std::get_if<long long>(&c))
        return std::to_string(*i);
    return std::get<std::string>(c);
}

ojson cell_json(const Cell& c)
{
    if (auto d = std::get_if<double>(&c))
        return std::isfinite(*d) ? ojson(*d) : ojson(nullptr);
    if (auto i = std::get_if<long long>(&c))
        return *i;
    return std::get<std::string>(c);
}

ojson derived_json(const RunManifest& m)
{
    ojson arr = ojson::array();
    for (std::size_t k = 0; k < m.derived.size(); k++) {
        const auto& b = m.derived[k];
        arr.push_back({{"mode", k + 1},
                       {"delta_hz", rad_to_hz(b.delta)},
                       {"r", b.r},
                       {"squeeze", b.squeeze},
                       {"delta_p_hz", rad_to_hz(b.delta_p)},
                       {"f_p_hz", {rad_to_hz(b.f_p.real()), rad_to_hz(b.f_p.imag())}},
                       {"rwa_shift_hz", rad_to_hz(b.rwa_shift)}});
    }
    return arr;
}

ojson manifest_core(const RunManifest& m)
{
    ojson j;
    j["schema"] = 1;
    j["tool"] = "ionpa";
    j["version"] = m.version;
    j["task"] = m.task;
    j["config_sha256"] = m.config_sha256;
    j["seed"] = m.seed ? ojson(*m.seed) : ojson(nullptr);
    for (const auto& [k, v] : m.meta)
        j["meta"][k] = v;
    if (!m.derived.empty())
        j["derived"] = derived_json(m);
    return j;
}

} // namespace

void write_csv(std::ostream& os, const Table& t, const RunManifest& m)
{
    os << "# tool: ionpa " << m.version << "\n";
    os << "# task: " << m.task << "\n";
    os << "# config_sha256: " << m.config_sha256 << "\n";
    os << "# seed: " << (m.seed ? std::to_string(*m.seed) : "none") << "\n";
    for (const auto& [k, v] : m.meta)
        os << "# " << k << ": " << v << "\n";
    for (std::size_t k = 0; k < m.derived.size(); k++) {
        const auto& b = m.derived[k];
        os << "# bogoliubov mode=" << k + 1 << " delta_hz=" << format_double(rad_to_hz(b.delta))
           << " r=" << format_double(b.r) << " squeeze=" << format_double(b.squeeze)
           << " delta_p_hz=" << format_double(rad_to_hz(b.delta_p))
           << " rwa_shift_hz=" << format_double(rad_to_hz(b.rwa_shift)) << "\n";
    }
    for (std::size_t c = 0; c < t.columns.size(); c++)
        os << (c ? "," : "") << t.columns[c];
    os << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); c++)
            os << (c ? "," : "") << cell_text(row[c]);
        os << "\n";
    }
}

void write_table_json(std::ostream& os, const Table& t, const RunManifest& m)
{
    ojson j = manifest_core(m);
    j["columns"] = t.columns;
    ojson rows = ojson::array();
    for (const auto& row : t.rows) {
        ojson r;
        for (std::size_t c = 0; c < row.size(); c++)
            r[t.columns[c]] = cell_json(row[c]);
        rows.push_back(r);
    }
    j["rows"] = rows;
    os << j.dump(2) << "\n";
}

void write_manifest_json(std::ostream& os, const RunManifest& m)
{
    ojson j = manifest_core(m);
    j["wall_clock_s"] = m.wall_clock_s;
    j["workers"] = m.workers;
    os << j.dump(2) << "\n";
}

void write_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out << contents;
    out.flush();
    if (!out)
        throw IoError("write failed for " + path);
}

} // namespace ionpa
