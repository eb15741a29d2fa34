#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "dht/graphs.hpp"
#include "dht/rng.hpp"

namespace dht {

enum class AttackKind {
    FixedBelief,    // honest until start_time, then one fixed vector to everyone
    RandomBelief,   // fresh uniform simplex point per out-neighbor per step
    PerEdge,        // honest until start_time, then a per-recipient vector
    SilentConform,  // follows the honest rule; baseline for A/B comparisons
};

struct AttackStrategy {
    AttackKind kind = AttackKind::SilentConform;
    std::vector<double> belief;                      // FixedBelief (probability domain)
    std::int64_t start_time = 0;                     // FixedBelief / PerEdge
    std::map<int, std::vector<double>> per_edge;     // PerEdge: recipient -> vector
    std::uint64_t seed = 0;                          // RandomBelief
};

struct AdversarySpec {
    std::map<int, AttackStrategy> byzantine;  // agent index -> strategy

    bool empty() const { return byzantine.empty(); }
    bool contains(int agent) const { return byzantine.count(agent) != 0; }
    std::vector<int> agents() const;
    // Checks strategy vectors against the hypothesis count; forged beliefs
    // must be strictly positive distributions so their logs stay finite.
    void validate(int agent_count, int hypothesis_count) const;
};

// True iff every regular agent has at most f Byzantine in-neighbors.
bool f_local(const AdversarySpec& spec, const DirectedGraph& g, int f);

// What `sender` transmits at time t, per out-neighbor, in log domain.
// `honest_log_belief` is what the honest rule would have broadcast; it is
// forwarded verbatim before start_time and under SilentConform.
std::map<int, std::vector<double>> forge_messages(const AdversarySpec& spec, int sender,
                                                  std::int64_t t,
                                                  std::span<const double> honest_log_belief,
                                                  std::span<const int> out_neighbors,
                                                  RngStream& stream);

const char* attack_kind_name(AttackKind kind);

}  // namespace dht
