#pragma once

#include <cstdint>
#include <initializer_list>

namespace dht {

// Counter-based pseudo-random stream. Each draw is a pure function of
// (key, counter), so substreams derived from distinct label paths are
// independent and never interact: drawing from one stream cannot perturb
// another. That is what keeps honest agents' signal sequences identical
// whether or not an adversary (with its own substream) is present.
class RngStream {
public:
    explicit RngStream(std::uint64_t key = 0) : key_(key) {}

    // Derives a stream key from a seed and a label path, e.g.
    // {purpose, agent_index}. Distinct paths give unrelated streams.
    static RngStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
        std::uint64_t key = mix(seed, 0x6a09e667f3bcc909ULL);
        for (std::uint64_t label : path) key = mix(key, label);
        return RngStream(key);
    }

    std::uint64_t next_u64() { return mix(key_, counter_++); }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    // splitmix64 evaluated at position c of the sequence keyed by k.
    static std::uint64_t mix(std::uint64_t k, std::uint64_t c) {
        std::uint64_t z = k + (c + 1) * 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Stream purposes; kept distinct so substream key paths never collide.
enum : std::uint64_t {
    kRngPurposeSignals = 1,
    kRngPurposeAdversary = 2,
};

// FNV-1a, used for content digests (signal histories, canonical configs).
inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace dht
