#include "ionpa/config.hpp"
#include "ionpa/tasks.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace ionpa;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name)
{
    fs::path p = fs::temp_directory_path() / ("ionpa_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_config(const fs::path& dir, const json& j)
{
    auto p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

int cli(const std::string& args, const fs::path& dir)
{
    std::string cmd = std::string(IONPA_CLI) + " " + args + " >" + (dir / "stdout.txt").string() + " 2>" +
                      (dir / "stderr.txt").string();
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json trap5()
{
    return {{"n_ions", 5}, {"omega_t_hz", 3.045e6}, {"omega_ax_hz", 0.62e6}, {"mass_amu", 171}};
}

json gate_config(int points)
{
    return {{"task", "gate-sweep"},
            {"trap", trap5()},
            {"drive", {{"g_hz", 0}}},
            {"sweep", {{"variable", "drive.g_hz"}, {"lo", 0}, {"hi", 30000}, {"points", points}}},
            {"params", {{"tau_s", 180e-6}, {"dynamics", "rwa"}}},
            {"output", {{"path", "gate"}, {"format", "csv"}}}};
}

std::vector<std::string> data_lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);)
        if (!l.empty() && l[0] != '#')
            out.push_back(l);
    return out;
}

} // namespace

TEST(Cli, ModesSingleIon)
{
    auto dir = scratch("modes");
    json j = {{"task", "modes"},
              {"trap", {{"n_ions", 1}, {"omega_t_hz", 3.045e6}, {"omega_ax_hz", 0.5e6}, {"mass_amu", 9}}},
              {"output", {{"path", "m"}}}};
    ASSERT_EQ(cli("run --config " + write_config(dir, j).string() + " --out " + dir.string(), dir), 0);
    auto lines = data_lines(slurp(dir / "m.csv"));
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[0].rfind("m,omega_hz,z0_m,U_1", 0), 0u);
    EXPECT_EQ(lines[1].rfind("1,3045000,", 0), 0u);
    EXPECT_TRUE(fs::exists(dir / "m.manifest.json"));
}

TEST(Cli, CsvManifestHeader)
{
    auto dir = scratch("header");
    ASSERT_EQ(cli("run --config " + write_config(dir, gate_config(3)).string() + " --out " + dir.string(), dir), 0);
    auto text = slurp(dir / "gate.csv");
    EXPECT_EQ(text.rfind("# tool: ionpa ", 0), 0u);
    EXPECT_NE(text.find("# task: gate-sweep\n"), std::string::npos);
    EXPECT_NE(text.find("# config_sha256: "), std::string::npos);
    EXPECT_NE(text.find("# bogoliubov mode=1"), std::string::npos);
    auto man = json::parse(slurp(dir / "gate.manifest.json"));
    EXPECT_EQ(man["schema"], 1);
    EXPECT_EQ(man["config_sha256"].get<std::string>().size(), 64u);
    auto budget = json::parse(slurp(dir / "gate_budget.json"));
    EXPECT_EQ(budget["schema"], 1);
}

TEST(Cli, JsonSchema)
{
    auto dir = scratch("json");
    auto j = gate_config(3);
    j["output"]["format"] = "json";
    ASSERT_EQ(cli("run --config " + write_config(dir, j).string() + " --out " + dir.string(), dir), 0);
    auto out = json::parse(slurp(dir / "gate.json"));
    EXPECT_EQ(out["schema"], 1);
    EXPECT_EQ(out["rows"].size(), 3u);
    EXPECT_EQ(out["columns"][0], "g_hz");
}

TEST(Cli, ValidationErrorsExitTwo)
{
    auto dir = scratch("invalid");
    auto bad_field = gate_config(3);
    bad_field["drive"]["g_khz"] = 1;
    EXPECT_EQ(cli("run --config " + write_config(dir, bad_field).string(), dir), 2);
    auto err = json::parse(slurp(dir / "stderr.txt"));
    EXPECT_EQ(err["error"], "validation");
    EXPECT_NE(err["message"].get<std::string>().find("drive.g_khz"), std::string::npos);

    auto bad_value = gate_config(3);
    bad_value["trap"]["n_ions"] = 0;
    EXPECT_EQ(cli("run --config " + write_config(dir, bad_value).string(), dir), 2);

    auto bad_point = gate_config(3);
    bad_point["sweep"] = {{"variable", "trap.n_ions"}, {"lo", 1}, {"hi", 5}, {"points", 5}};
    EXPECT_EQ(cli("validate --config " + write_config(dir, bad_point).string(), dir), 2);

    auto no_seed = gate_config(3);
    no_seed["params"]["sigma_delta_rad_s"] = 100;
    no_seed["mc"] = {{"n_samples", 10}};
    EXPECT_EQ(cli("run --config " + write_config(dir, no_seed).string(), dir), 2);

    EXPECT_EQ(cli("run --config " + write_config(dir, gate_config(3)).string() + " --workers -1", dir), 2);
    EXPECT_EQ(cli("run", dir), 2);
}

TEST(Cli, MissingFileExitsFour)
{
    auto dir = scratch("missing");
    EXPECT_EQ(cli("run --config " + (dir / "nope.json").string(), dir), 4);
    EXPECT_EQ(json::parse(slurp(dir / "stderr.txt"))["error"], "io");
}

TEST(Cli, UnwritableOutputExitsFour)
{
    auto dir = scratch("unwritable");
    std::ofstream(dir / "blocker") << "x";
    EXPECT_EQ(cli("run --config " + write_config(dir, gate_config(2)).string() + " --out " +
                      (dir / "blocker").string(),
                  dir),
              4);
}

TEST(Cli, FailedRowsExitThree)
{
    auto dir = scratch("failed");
    json j = {{"task", "phase"},
              {"trap", {{"n_ions", 1}, {"omega_t_hz", 3.045e6}, {"omega_ax_hz", 0.5e6}, {"mass_amu", 9}}},
              {"drive", {{"f_hz", 100}, {"detuning_hz", 1e5}}},
              {"sweep", {{"variable", "drive.detuning_hz"}, {"lo", 1e5}, {"hi", 100}, {"points", 3}, {"scale", "log"}}},
              {"params", {{"dynamics", "full"}}},
              {"integrator", {{"max_steps", 2000}}},
              {"output", {{"path", "s"}}}};
    EXPECT_EQ(cli("run --config " + write_config(dir, j).string() + " --out " + dir.string(), dir), 3);
    auto lines = data_lines(slurp(dir / "s.csv"));
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_NE(lines[1].find(",ok"), std::string::npos);
    EXPECT_NE(lines[3].find(",failed"), std::string::npos);
    EXPECT_EQ(json::parse(slurp(dir / "stderr.txt"))["error"], "numerical");
}

TEST(Cli, ValidateSubcommand)
{
    auto dir = scratch("validate");
    EXPECT_EQ(cli("validate --config " + write_config(dir, gate_config(5)).string(), dir), 0);
    EXPECT_EQ(slurp(dir / "stdout.txt"), "ok: gate-sweep\n");
}

TEST(Cli, PresetsValidate)
{
    auto dir = scratch("presets");
    for (const char* p : {"fig2.json", "fig3.json", "fig4.json", "table1.json"})
        EXPECT_EQ(cli("validate --config " + (fs::path(IONPA_CONFIG_DIR) / p).string(), dir), 0) << p;
}

TEST(Cli, ByteIdenticalAcrossWorkers)
{
    auto dir = scratch("workers");
    auto cfg = write_config(dir, gate_config(401));
    ASSERT_EQ(cli("run --config " + cfg.string() + " --workers 1 --out " + (dir / "w1").string(), dir), 0);
    ASSERT_EQ(cli("run --config " + cfg.string() + " --workers 8 --out " + (dir / "w8").string(), dir), 0);
    EXPECT_EQ(slurp(dir / "w1" / "gate.csv"), slurp(dir / "w8" / "gate.csv"));
    EXPECT_EQ(slurp(dir / "w1" / "gate_budget.json"), slurp(dir / "w8" / "gate_budget.json"));
}

TEST(Cli, SeedOverride)
{
    auto dir = scratch("seed");
    json j = {{"task", "sensitivity"},
              {"rates", {{"units", "J"}, {"el", 0.12}, {"ud", 0.02}, {"du", 0.02}}},
              {"mc", {{"n_samples", 200}, {"seed", 1}}},
              {"params", {{"target", "squeezing"}, {"theta_rad", {0.1}}, {"sigma_theta_deg", 10}, {"squeeze", 0.5}}},
              {"output", {{"path", "sens"}}}};
    auto cfg = write_config(dir, j);
    ASSERT_EQ(cli("run --config " + cfg.string() + " --out " + (dir / "a").string(), dir), 0);
    ASSERT_EQ(cli("run --config " + cfg.string() + " --seed 2 --out " + (dir / "b").string(), dir), 0);
    j["mc"]["seed"] = 2;
    cfg = write_config(dir, j);
    ASSERT_EQ(cli("run --config " + cfg.string() + " --out " + (dir / "c").string(), dir), 0);
    auto a = slurp(dir / "a" / "sens.csv"), b = slurp(dir / "b" / "sens.csv"), c = slurp(dir / "c" / "sens.csv");
    EXPECT_NE(data_lines(a), data_lines(b));
    EXPECT_EQ(b, c);
    EXPECT_NE(b.find("# seed: 2\n"), std::string::npos);
}

TEST(Runner, SinglePointSweepEqualsDirectEvaluation)
{
    auto j = gate_config(1);
    j["sweep"]["lo"] = 12000;
    j["sweep"]["hi"] = 12000;
    auto cfg = parse_config(j.dump());
    auto out = run_task(cfg, 1);
    ASSERT_EQ(out.table.rows.size(), 1u);
    auto direct = evaluate_gate(transverse_modes(cfg.trap), hz_to_rad(12000), 180e-6, 5 * pi / 4, 0.0, {0, 1}, 0.01,
                                Dynamics::Rwa, cfg.integrator);
    EXPECT_EQ(std::get<double>(out.table.rows[0][1]), direct.fidelity);
}

TEST(Runner, ReversedAxisReversesRows)
{
    auto j = gate_config(7);
    auto fwd = run_task(parse_config(j.dump()), 1);
    j["sweep"]["lo"] = 30000;
    j["sweep"]["hi"] = 0;
    auto rev = run_task(parse_config(j.dump()), 1);
    ASSERT_EQ(fwd.table.rows.size(), rev.table.rows.size());
    const std::size_t n = fwd.table.rows.size();
    for (std::size_t k = 0; k < n; k++)
        EXPECT_EQ(fwd.table.rows[k], rev.table.rows[n - 1 - k]);
}

TEST(Runner, ConfigHashIsCanonical)
{
    auto a = parse_config(gate_config(3).dump());
    auto j = json::parse(gate_config(3).dump(4));
    auto b = parse_config(j.dump());
    EXPECT_EQ(sha256_hex(a.canonical), sha256_hex(b.canonical));
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
