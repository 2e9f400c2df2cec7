#include "ionpa/config.hpp"
#include "ionpa/tasks.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

int exit_code(ionpa::ErrorKind k)
{
    switch (k) {
    case ionpa::ErrorKind::Validation:
        return 2;
    case ionpa::ErrorKind::Numerical:
        return 3;
    case ionpa::ErrorKind::Io:
        return 4;
    }
    return 1;
}

const char* kind_name(ionpa::ErrorKind k)
{
    switch (k) {
    case ionpa::ErrorKind::Validation:
        return "validation";
    case ionpa::ErrorKind::Numerical:
        return "numerical";
    case ionpa::ErrorKind::Io:
        return "io";
    }
    return "unknown";
}

int report(const ionpa::Error& e)
{
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["error"] = kind_name(e.kind());
    j["message"] = e.what();
    std::cerr << j.dump() << "\n";
    return exit_code(e.kind());
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spin-dependent force and parametric amplification toolkit"};
    app.set_version_flag("--version", std::string("ionpa ") + IONPA_VERSION);
    app.require_subcommand(1);

    std::string config_path;
    int workers = 0;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";

    auto* run = app.add_subcommand("run", "Run the task described by a config file");
    run->add_option("--config", config_path, "Config file (JSON)")->required();
    run->add_option("--workers", workers, "Worker threads, 0 = all available")->check(CLI::NonNegativeNumber);
    run->add_option("--seed", seed, "Override mc.seed");
    run->add_option("--out", out_dir, "Output directory");

    auto* validate = app.add_subcommand("validate", "Check a config file without running it");
    validate->add_option("--config", config_path, "Config file (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        auto cfg = ionpa::load_config(config_path);
        if (seed)
            ionpa::apply_seed_override(cfg, *seed);
        cfg.validate();
        if (*validate) {
            std::cout << "ok: " << ionpa::to_string(cfg.task) << "\n";
            return 0;
        }
        auto out = ionpa::run_task(cfg, workers);
        auto path = ionpa::write_outputs(out, cfg, out_dir);
        std::cout << path << "\n";
        if (out.failed_rows > 0) {
            nlohmann::ordered_json j;
            j["schema"] = 1;
            j["error"] = "numerical";
            j["message"] = std::to_string(out.failed_rows) + " sweep point(s) failed";
            j["failed_rows"] = out.failed_rows;
            std::cerr << j.dump() << "\n";
            return 3;
        }
        return 0;
    } catch (const ionpa::Error& e) {
        return report(e);
    } catch (const std::exception& e) {
        nlohmann::ordered_json j{{"schema", 1}, {"error", "internal"}, {"message", e.what()}};
        std::cerr << j.dump() << "\n";
        return 1;
    }
}
