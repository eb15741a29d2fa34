#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "dht/engine.hpp"
#include "dht/graphs.hpp"
#include "dht/model.hpp"

namespace support {

// Independent KL oracle used to derive expected values; deliberately not the
// library implementation.
inline double oracle_kl(const std::vector<double>& p, const std::vector<double>& q) {
    double acc = 0.0;
    for (std::size_t w = 0; w < p.size(); ++w) acc += p[w] * std::log(p[w] / q[w]);
    return acc;
}

// Binary-hypothesis benchmark: one informative agent (index 0), everyone
// else uniform, signals generated under the second hypothesis.
inline dht::ObservationModel informative_star_model(int n) {
    dht::ObservationModel model;
    model.hypotheses.names = {"theta1", "theta2"};
    model.hypotheses.true_index = 1;
    dht::AgentLikelihood informative;
    informative.signal_names = {"w1", "w2"};
    informative.table = {{0.7, 0.3}, {0.5, 0.5}};
    model.agents.push_back(informative);
    dht::AgentLikelihood uniform;
    uniform.signal_names = {"w1", "w2"};
    uniform.table = {{0.5, 0.5}, {0.5, 0.5}};
    for (int i = 1; i < n; ++i) model.agents.push_back(uniform);
    model.validate_and_normalize();
    return model;
}

// Hub-and-spoke graph, hub at index 0, all edges bidirectional.
inline dht::DirectedGraph star_graph(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 1; i < n; ++i) edges.emplace_back(0, i);
    return dht::DirectedGraph::undirected(n, edges);
}

// Ternary-hypothesis benchmark with three agent groups of complementary
// signal structures over two signals.
inline dht::ObservationModel three_group_model(int true_index) {
    dht::ObservationModel model;
    model.hypotheses.names = {"theta1", "theta2", "theta3"};
    model.hypotheses.true_index = true_index;
    auto agent_with = [](double w1_theta1, double w1_theta2, double w1_theta3) {
        dht::AgentLikelihood agent;
        agent.signal_names = {"w1", "w2"};
        agent.table = {{w1_theta1, 1.0 - w1_theta1},
                       {w1_theta2, 1.0 - w1_theta2},
                       {w1_theta3, 1.0 - w1_theta3}};
        return agent;
    };
    for (int i = 0; i < 3; ++i) model.agents.push_back(agent_with(3.0 / 4.0, 1.0 / 3.0, 1.0 / 3.0));
    for (int i = 0; i < 3; ++i) model.agents.push_back(agent_with(2.0 / 5.0, 2.0 / 5.0, 1.0 / 7.0));
    for (int i = 0; i < 3; ++i) model.agents.push_back(agent_with(1.0 / 2.0, 1.0 / 2.0, 5.0 / 6.0));
    model.validate_and_normalize();
    return model;
}

// Three-layer graph {0,1,2} <-> {3,4,5} <-> {6,7,8}, complete between
// adjacent layers, all edges bidirectional.
inline dht::DirectedGraph three_layer_graph() {
    std::vector<std::pair<int, int>> edges;
    for (int top = 0; top < 3; ++top)
        for (int mid = 3; mid < 6; ++mid) edges.emplace_back(top, mid);
    for (int mid = 3; mid < 6; ++mid)
        for (int bottom = 6; bottom < 9; ++bottom) edges.emplace_back(mid, bottom);
    return dht::DirectedGraph::undirected(9, edges);
}

// Exhaustive robustness oracle: every non-empty subset of V \ S must contain
// a node with >= r in-neighbors outside the subset. Only usable for small n.
inline bool oracle_strongly_r_robust(const dht::DirectedGraph& g, const std::vector<int>& seed_set,
                                     int r) {
    const int n = g.size();
    std::vector<char> in_seed(n, 0);
    for (int v : seed_set) in_seed[v] = 1;
    std::vector<int> complement;
    for (int v = 0; v < n; ++v)
        if (!in_seed[v]) complement.push_back(v);
    const int k = static_cast<int>(complement.size());
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        std::vector<char> in_subset(n, 0);
        for (int b = 0; b < k; ++b)
            if (mask & (1u << b)) in_subset[complement[b]] = 1;
        bool subset_reachable = false;
        for (int b = 0; b < k && !subset_reachable; ++b) {
            if (!(mask & (1u << b))) continue;
            const int v = complement[b];
            int outside = 0;
            for (int u : g.in_neighbors(v))
                if (!in_subset[u]) ++outside;
            if (outside >= r) subset_reachable = true;
        }
        if (!subset_reachable) return false;
    }
    return true;
}

inline dht::DirectedGraph random_digraph(std::mt19937& rng, int n, double edge_probability) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && coin(rng) < edge_probability) edges.emplace_back(i, j);
    return dht::DirectedGraph(n, std::move(edges));
}

// Random strictly-positive probability row.
inline std::vector<double> random_row(std::mt19937& rng, int width) {
    std::uniform_real_distribution<double> positive(0.05, 1.0);
    std::vector<double> row(width);
    double sum = 0.0;
    for (double& v : row) {
        v = positive(rng);
        sum += v;
    }
    for (double& v : row) v /= sum;
    return row;
}

inline dht::SimulationConfig basic_config(dht::ObservationModel model, dht::DirectedGraph graph,
                                          dht::RuleKind rule, std::int64_t horizon,
                                          std::uint64_t seed) {
    dht::SimulationConfig config;
    config.model = std::move(model);
    config.schedule = dht::GraphSchedule::static_graph(std::move(graph));
    config.rule.kind = rule;
    config.horizon = horizon;
    config.seed = seed;
    return config;
}

}  // namespace support
