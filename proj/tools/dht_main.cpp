#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dht/cli_commands.hpp"

namespace {

// "a..b" inclusive, or a single seed "a".
bool parse_seed_range(const std::string& text, std::uint64_t& begin, std::uint64_t& end) {
    const auto sep = text.find("..");
    try {
        if (sep == std::string::npos) {
            begin = end = std::stoull(text);
            return true;
        }
        begin = std::stoull(text.substr(0, sep));
        end = std::stoull(text.substr(sep + 2));
        return end >= begin;
    } catch (...) {
        return false;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed hypothesis testing simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string json_out;
    std::string out_dir = dht::default_out_dir();
    std::int64_t stride = 0;
    std::int64_t seed_override = -1;
    std::string seed_range;
    std::vector<std::int64_t> grid;

    auto* check = app.add_subcommand("check", "Certify the structural conditions for a config");
    check->add_option("config", config_path, "Config file")->required();
    check->add_option("--json", json_out, "Also write the report as JSON");

    auto* run_cmd = app.add_subcommand("run", "Simulate one seeded trajectory");
    run_cmd->add_option("config", config_path, "Config file")->required();
    run_cmd->add_option("--out", out_dir, "Output directory (default: DHT_OUT_DIR or .)");
    run_cmd->add_option("--stride", stride, "Recording stride override");
    run_cmd->add_option("--seed", seed_override, "Seed override");

    auto* sweep_cmd = app.add_subcommand("sweep", "Run a seed range and aggregate summaries");
    sweep_cmd->add_option("config", config_path, "Config file")->required();
    sweep_cmd->add_option("--seeds", seed_range, "Seed range a..b (inclusive)")->required();
    sweep_cmd->add_option("--out", out_dir, "Output directory (default: DHT_OUT_DIR or .)");
    sweep_cmd->add_option("--grid", grid, "Snapshot times for the exceedance curve");

    auto* rates = app.add_subcommand("rates", "Print theoretical rate bounds for a config");
    rates->add_option("config", config_path, "Config file")->required();
    rates->add_option("--json", json_out, "Also write the table as JSON");

    CLI11_PARSE(app, argc, argv);

    if (check->parsed()) {
        return dht::cmd_check(config_path,
                              json_out.empty() ? std::nullopt : std::optional<std::string>(json_out),
                              std::cout, std::cerr);
    }
    if (run_cmd->parsed()) {
        dht::RunCommandOptions options;
        options.out_dir = out_dir;
        if (stride > 0) options.stride = stride;
        if (seed_override >= 0) options.seed = static_cast<std::uint64_t>(seed_override);
        return dht::cmd_run(config_path, options, std::cout, std::cerr);
    }
    if (sweep_cmd->parsed()) {
        dht::SweepCommandOptions options;
        options.out_dir = out_dir;
        if (!parse_seed_range(seed_range, options.seed_begin, options.seed_end)) {
            std::cerr << "error: --seeds expects 'a..b' with b >= a\n";
            return dht::kExitError;
        }
        options.grid = grid;
        return dht::cmd_sweep(config_path, options, std::cout, std::cerr);
    }
    if (rates->parsed()) {
        return dht::cmd_rates(config_path,
                              json_out.empty() ? std::nullopt : std::optional<std::string>(json_out),
                              std::cout, std::cerr);
    }
    return dht::kExitError;
}
