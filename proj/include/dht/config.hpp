#pragma once

#include <optional>
#include <string>

#include "dht/engine.hpp"
#include "dht/graphs.hpp"

namespace dht {

// A parsed config file plus everything derived from it: the runnable
// simulation config, certification parameters, metric knobs, and the
// canonical re-serialization used for digests.
struct LoadedConfig {
    SimulationConfig sim;
    int window = 1;  // T for joint-connectivity certification
    int probe_agent = 0;
    std::optional<double> probe_epsilon;  // empty: half the best-source KL
    double rate_band = 0.02;

    std::string canonical_text;  // canonical JSON; stable across reorderings
    std::string digest_hex;      // FNV-1a 64 of canonical_text

    // Which structural condition applies to the configured rule.
    CertifySpec certify_spec() const;
};

LoadedConfig parse_config_text(const std::string& text, const std::string& origin);
LoadedConfig load_config_file(const std::string& path);

}  // namespace dht
