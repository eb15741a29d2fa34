#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dht/config.hpp"
#include "dht/engine.hpp"
#include "dht/graphs.hpp"

namespace dht {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Exit codes shared by all subcommands: 0 success/pass, 1 error, and, for
// `check` only, 2 when certification fails.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCertificationFailed = 2;

// DHT_OUT_DIR if set, else ".".
std::string default_out_dir();

struct RunCommandOptions {
    std::string out_dir;
    std::optional<std::int64_t> stride;
    std::optional<std::uint64_t> seed;
};

struct SweepCommandOptions {
    std::string out_dir;
    std::uint64_t seed_begin = 0;
    std::uint64_t seed_end = 0;  // inclusive
    std::vector<std::int64_t> grid;  // empty: decade grid up to the horizon
};

int cmd_check(const std::string& config_path, const std::optional<std::string>& json_out,
              std::ostream& out, std::ostream& err);
int cmd_run(const std::string& config_path, const RunCommandOptions& options, std::ostream& out,
            std::ostream& err);
int cmd_sweep(const std::string& config_path, const SweepCommandOptions& options, std::ostream& out,
              std::ostream& err);
int cmd_rates(const std::string& config_path, const std::optional<std::string>& json_out,
              std::ostream& out, std::ostream& err);

// Emitters, exposed for tests. The CSV schema is
// t,agent,hypothesis,mu,pi,q with full double precision; q is empty for the
// true hypothesis and at t = 0, mu/pi are empty when that series was not
// recorded.
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record,
                          const ObservationModel& model);
std::string render_certification_text(const CertificationReport& report,
                                      const ObservationModel& model);
std::string render_certification_json(const CertificationReport& report,
                                      const ObservationModel& model);
std::string render_run_summary_json(const LoadedConfig& config, const TrajectoryRecord& record);

// {1, 2, 5} x powers of ten up to the horizon, plus the horizon itself.
std::vector<std::int64_t> decade_grid(std::int64_t horizon);

}  // namespace dht
