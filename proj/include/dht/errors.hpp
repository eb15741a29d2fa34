#pragma once

#include <stdexcept>
#include <string>

namespace dht {

// Invalid likelihood tables, malformed belief vectors, broken model invariants.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Config file problems; message carries the offending field path.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed inter-agent messages (wrong width, non-normalized).
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace dht
