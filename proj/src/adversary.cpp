#include "dht/adversary.hpp"

#include <cmath>
#include <stdexcept>

#include "dht/errors.hpp"
#include "dht/numeric.hpp"

namespace dht {

namespace {

void validate_belief_vector(const std::vector<double>& belief, int hypothesis_count,
                            const std::string& where) {
    if (static_cast<int>(belief.size()) != hypothesis_count)
        throw ConfigError(where + ": need one entry per hypothesis");
    double sum = 0.0;
    for (double v : belief) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(where + ": entries must be strictly positive");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
        throw ConfigError(where + ": must sum to 1");
}

std::vector<double> to_log(const std::vector<double>& belief) {
    std::vector<double> out(belief.size());
    for (std::size_t p = 0; p < belief.size(); ++p) out[p] = std::log(belief[p]);
    log_normalize(out);
    return out;
}

// Uniform point on the simplex: normalized standard exponentials.
std::vector<double> random_simplex_log(int m, RngStream& stream) {
    std::vector<double> log_weights(m);
    for (int p = 0; p < m; ++p) {
        double u = stream.next_double();
        if (u <= 0.0) u = 0x1.0p-53;
        log_weights[p] = std::log(-std::log1p(-u));
    }
    log_normalize(log_weights);
    return log_weights;
}

}  // namespace

std::vector<int> AdversarySpec::agents() const {
    std::vector<int> out;
    out.reserve(byzantine.size());
    for (const auto& [agent, strategy] : byzantine) out.push_back(agent);
    return out;
}

void AdversarySpec::validate(int agent_count, int hypothesis_count) const {
    for (const auto& [agent, strategy] : byzantine) {
        const std::string where = "adversary.byzantine[" + std::to_string(agent) + "]";
        if (agent < 0 || agent >= agent_count)
            throw ConfigError(where + ": agent index out of range");
        switch (strategy.kind) {
            case AttackKind::FixedBelief:
                validate_belief_vector(strategy.belief, hypothesis_count, where + ".belief");
                break;
            case AttackKind::PerEdge:
                if (strategy.per_edge.empty())
                    throw ConfigError(where + ".edges: per-edge strategy needs at least one entry");
                for (const auto& [recipient, belief] : strategy.per_edge) {
                    if (recipient < 0 || recipient >= agent_count)
                        throw ConfigError(where + ".edges: recipient index out of range");
                    validate_belief_vector(belief, hypothesis_count,
                                           where + ".edges[" + std::to_string(recipient) + "]");
                }
                break;
            case AttackKind::RandomBelief:
            case AttackKind::SilentConform:
                break;
        }
    }
}

bool f_local(const AdversarySpec& spec, const DirectedGraph& g, int f) {
    if (f < 0) throw std::invalid_argument("f_local: f must be non-negative");
    for (int i = 0; i < g.size(); ++i) {
        if (spec.contains(i)) continue;
        int byzantine_in = 0;
        for (int j : g.in_neighbors(i))
            if (spec.contains(j)) ++byzantine_in;
        if (byzantine_in > f) return false;
    }
    return true;
}

std::map<int, std::vector<double>> forge_messages(const AdversarySpec& spec, int sender,
                                                  std::int64_t t,
                                                  std::span<const double> honest_log_belief,
                                                  std::span<const int> out_neighbors,
                                                  RngStream& stream) {
    auto it = spec.byzantine.find(sender);
    if (it == spec.byzantine.end())
        throw std::invalid_argument("forge_messages: sender is not Byzantine");
    const AttackStrategy& strategy = it->second;
    const std::vector<double> honest(honest_log_belief.begin(), honest_log_belief.end());

    std::map<int, std::vector<double>> messages;
    switch (strategy.kind) {
        case AttackKind::SilentConform:
            for (int recipient : out_neighbors) messages[recipient] = honest;
            break;
        case AttackKind::FixedBelief: {
            if (t < strategy.start_time) {
                for (int recipient : out_neighbors) messages[recipient] = honest;
            } else {
                const auto forged = to_log(strategy.belief);
                for (int recipient : out_neighbors) messages[recipient] = forged;
            }
            break;
        }
        case AttackKind::PerEdge: {
            if (t < strategy.start_time) {
                for (int recipient : out_neighbors) messages[recipient] = honest;
            } else {
                for (int recipient : out_neighbors) {
                    auto edge = strategy.per_edge.find(recipient);
                    if (edge == strategy.per_edge.end())
                        throw ProtocolError("forge_messages: per-edge strategy missing recipient " +
                                            std::to_string(recipient));
                    messages[recipient] = to_log(edge->second);
                }
            }
            break;
        }
        case AttackKind::RandomBelief: {
            const int m = static_cast<int>(honest_log_belief.size());
            for (int recipient : out_neighbors) messages[recipient] = random_simplex_log(m, stream);
            break;
        }
    }
    return messages;
}

const char* attack_kind_name(AttackKind kind) {
    switch (kind) {
        case AttackKind::FixedBelief: return "fixed_belief";
        case AttackKind::RandomBelief: return "random_belief";
        case AttackKind::PerEdge: return "per_edge";
        case AttackKind::SilentConform: return "silent_conform";
    }
    return "unknown";
}

}  // namespace dht
