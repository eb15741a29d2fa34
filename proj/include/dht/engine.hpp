#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dht/adversary.hpp"
#include "dht/graphs.hpp"
#include "dht/model.hpp"
#include "dht/rules.hpp"

namespace dht {

enum class RuleKind { MinRule, Lfrhe, Linear, LogLinear };

struct RuleSpec {
    RuleKind kind = RuleKind::MinRule;
    int max_faulty = 0;  // f, Lfrhe only
};

struct RecordOptions {
    std::int64_t stride = 1;
    bool actual = true;
    bool local = true;
    bool signals = true;
};

struct SimulationConfig {
    ObservationModel model;
    GraphSchedule schedule = GraphSchedule::static_graph(DirectedGraph(1, {}));
    RuleSpec rule;
    AdversarySpec adversary;
    std::int64_t horizon = 1;
    std::uint64_t seed = 0;
    // One prior table (n x m, probability domain) used for both local and
    // actual beliefs; empty means uniform.
    std::optional<std::vector<std::vector<double>>> priors;
    RecordOptions record;

    void validate() const;
};

// Content hash over everything that determines a run's output.
std::uint64_t structural_digest(const SimulationConfig& config);

struct TrajectoryRecord {
    int agent_count = 0;
    int hypothesis_count = 0;
    int true_index = 0;
    std::int64_t horizon = 0;
    std::int64_t stride = 1;
    std::uint64_t seed = 0;
    std::string config_digest;

    std::vector<std::int64_t> times;        // recorded steps, always includes 0 and horizon
    std::vector<BeliefMatrix> log_actual;   // per recorded step (empty if not recorded)
    std::vector<BeliefMatrix> log_local;
    std::vector<std::vector<int>> signals;  // signal observed at that step; -1 at t = 0
    std::vector<std::uint8_t> adversarial;  // per-agent flag
    std::uint64_t signal_digest = 0;        // over the full (unstrided) signal history
    double min_log_true_belief_regular = 0.0;

    int index_of_time(std::int64_t t) const;  // -1 if not recorded
};

// Executes the synchronous round loop: draw signals, Bayesian local updates,
// one belief exchange, rule-specific actual updates, adversarial forging for
// the next round. Deterministic given the config (including its seed).
TrajectoryRecord run(const SimulationConfig& config);

struct RunSummary {
    std::uint64_t seed = 0;
    BeliefMatrix final_log_actual;
    std::vector<std::int64_t> grid_times;
    std::vector<BeliefMatrix> grid_log_actual;
    std::uint64_t signal_digest = 0;
    double min_log_true_belief_regular = 0.0;
    std::vector<std::uint8_t> adversarial;
};

// Independent runs, one per seed, executed in parallel; results are ordered
// by seed position regardless of completion order. `grid_times` selects the
// intermediate snapshots kept in each summary (the final step is always kept).
std::vector<RunSummary> sweep(const SimulationConfig& config, std::span<const std::uint64_t> seeds,
                              std::span<const std::int64_t> grid_times);

const char* rule_kind_name(RuleKind kind);

}  // namespace dht
