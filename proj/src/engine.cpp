#include "dht/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "dht/errors.hpp"
#include "dht/numeric.hpp"

namespace dht {

namespace {

struct Digest {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    void bytes(const void* data, std::size_t len) { h = fnv1a64(data, len, h); }
    void u64(std::uint64_t v) { bytes(&v, sizeof v); }
    void i64(std::int64_t v) { bytes(&v, sizeof v); }
    void f64(double v) { bytes(&v, sizeof v); }
    void str(const std::string& s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
};

void digest_graph(Digest& d, const DirectedGraph& g) {
    d.u64(static_cast<std::uint64_t>(g.size()));
    for (auto [from, to] : g.edges()) {
        d.u64(static_cast<std::uint64_t>(from));
        d.u64(static_cast<std::uint64_t>(to));
    }
}

}  // namespace

std::uint64_t structural_digest(const SimulationConfig& config) {
    Digest d;
    for (const auto& name : config.model.hypotheses.names) d.str(name);
    d.u64(static_cast<std::uint64_t>(config.model.hypotheses.true_index));
    for (const auto& agent : config.model.agents) {
        for (const auto& name : agent.signal_names) d.str(name);
        for (const auto& row : agent.table)
            for (double v : row) d.f64(v);
    }
    d.u64(static_cast<std::uint64_t>(config.schedule.kind()));
    d.i64(config.schedule.sequence_length());
    for (std::int64_t k = 0; k < config.schedule.sequence_length(); ++k)
        digest_graph(d, config.schedule.graph_at(config.schedule.is_static() ? 0 : k));
    d.u64(static_cast<std::uint64_t>(config.rule.kind));
    d.u64(static_cast<std::uint64_t>(config.rule.max_faulty));
    for (const auto& [agent, strategy] : config.adversary.byzantine) {
        d.u64(static_cast<std::uint64_t>(agent));
        d.u64(static_cast<std::uint64_t>(strategy.kind));
        d.i64(strategy.start_time);
        d.u64(strategy.seed);
        for (double v : strategy.belief) d.f64(v);
        for (const auto& [recipient, belief] : strategy.per_edge) {
            d.u64(static_cast<std::uint64_t>(recipient));
            for (double v : belief) d.f64(v);
        }
    }
    d.i64(config.horizon);
    d.u64(config.seed);
    d.u64(config.priors.has_value());
    if (config.priors) {
        for (const auto& row : *config.priors)
            for (double v : row) d.f64(v);
    }
    d.i64(config.record.stride);
    d.u64((config.record.actual ? 1u : 0u) | (config.record.local ? 2u : 0u) |
          (config.record.signals ? 4u : 0u));
    return d.h;
}

void SimulationConfig::validate() const {
    const int n = model.agent_count();
    const int m = model.hypothesis_count();
    model.hypotheses.validate();
    if (n < 1) throw ConfigError("agents: need at least 1 agent");
    for (int i = 0; i < n; ++i) {
        for (int p = 0; p < m; ++p) {
            const auto row = model.agents[i].row(p);
            double sum = 0.0;
            for (double v : row) {
                if (!(v > 0.0)) throw ConfigError("agents[" + std::to_string(i) + "].rows[" +
                                                  std::to_string(p) + "]: entries must be positive");
                sum += v;
            }
            if (std::abs(sum - 1.0) > kRowSumTol)
                throw ConfigError("agents[" + std::to_string(i) + "].rows[" + std::to_string(p) +
                                  "]: row does not sum to 1");
        }
    }
    if (schedule.agent_count() != n)
        throw ConfigError("graph.n: agent count differs from likelihood table count");
    if (horizon < 1) throw ConfigError("run.horizon: must be >= 1");
    if (record.stride < 1) throw ConfigError("run.stride: must be >= 1");

    switch (rule.kind) {
        case RuleKind::MinRule: break;
        case RuleKind::Lfrhe:
            if (rule.max_faulty < 0) throw ConfigError("rule.f: must be non-negative");
            if (!schedule.is_static())
                throw ConfigError("rule.name: lfrhe requires a static graph");
            break;
        case RuleKind::Linear:
        case RuleKind::LogLinear:
            if (!schedule.is_static())
                throw ConfigError("rule.name: consensus baselines require a static graph");
            if (!schedule.graph_at(0).is_symmetric())
                throw ConfigError("rule.name: consensus baselines require a symmetric graph");
            break;
    }

    if (priors) {
        if (static_cast<int>(priors->size()) != n)
            throw ConfigError("run.priors: need one row per agent");
        for (int i = 0; i < n; ++i) {
            const auto& row = (*priors)[i];
            if (static_cast<int>(row.size()) != m)
                throw ConfigError("run.priors[" + std::to_string(i) +
                                  "]: need one entry per hypothesis");
            double sum = 0.0;
            for (double v : row) {
                if (!(v > 0.0) || !std::isfinite(v))
                    throw ConfigError("run.priors[" + std::to_string(i) +
                                      "]: entries must be strictly positive");
                sum += v;
            }
            if (std::abs(sum - 1.0) > kRowSumTol)
                throw ConfigError("run.priors[" + std::to_string(i) + "]: row does not sum to 1");
        }
    }

    adversary.validate(n, m);
    // Per-edge strategies must name every recipient the sender could ever have.
    for (const auto& [agent, strategy] : adversary.byzantine) {
        if (strategy.kind != AttackKind::PerEdge) continue;
        const auto all_time = union_graph(schedule, 0, std::max<std::int64_t>(schedule.sequence_length(), 1));
        for (int recipient : all_time.out_neighbors(agent)) {
            if (!strategy.per_edge.count(recipient))
                throw ConfigError("adversary.byzantine[" + std::to_string(agent) +
                                  "].edges: missing out-neighbor " + std::to_string(recipient));
        }
    }
}

namespace {

BeliefMatrix initial_beliefs(const SimulationConfig& config) {
    const int n = config.model.agent_count();
    const int m = config.model.hypothesis_count();
    BeliefMatrix beliefs(n, m);
    if (config.priors) {
        for (int i = 0; i < n; ++i) {
            auto row = beliefs.row(i);
            for (int p = 0; p < m; ++p) row[p] = std::log((*config.priors)[i][p]);
            log_normalize(row);
        }
    } else {
        const double log_uniform = -std::log(static_cast<double>(m));
        for (int i = 0; i < n; ++i)
            for (int p = 0; p < m; ++p) beliefs.at(i, p) = log_uniform;
    }
    return beliefs;
}

void check_finite(const BeliefMatrix& beliefs, const std::vector<std::uint8_t>& adversarial,
                  std::int64_t t, const char* which) {
    for (int i = 0; i < beliefs.rows(); ++i) {
        if (adversarial[i]) continue;
        for (int p = 0; p < beliefs.cols(); ++p) {
            if (!std::isfinite(beliefs.at(i, p)))
                throw std::logic_error(std::string("non-finite ") + which + " belief at t=" +
                                       std::to_string(t) + ", agent=" + std::to_string(i) +
                                       ", hypothesis=" + std::to_string(p));
        }
    }
}

}  // namespace

int TrajectoryRecord::index_of_time(std::int64_t t) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end() || *it != t) return -1;
    return static_cast<int>(it - times.begin());
}

TrajectoryRecord run(const SimulationConfig& config) {
    config.validate();
    const int n = config.model.agent_count();
    const int m = config.model.hypothesis_count();
    const int true_index = config.model.hypotheses.true_index;

    TrajectoryRecord record;
    record.agent_count = n;
    record.hypothesis_count = m;
    record.true_index = true_index;
    record.horizon = config.horizon;
    record.stride = config.record.stride;
    record.seed = config.seed;
    {
        char digest_hex[17];
        std::snprintf(digest_hex, sizeof digest_hex, "%016llx",
                      static_cast<unsigned long long>(structural_digest(config)));
        record.config_digest = digest_hex;
    }
    record.adversarial.assign(n, 0);
    for (int b : config.adversary.agents()) record.adversarial[b] = 1;

    BeliefState state{initial_beliefs(config), {}};
    state.log_actual = state.log_local;

    ConsensusWeights weights;
    const bool pooling = config.rule.kind == RuleKind::Linear || config.rule.kind == RuleKind::LogLinear;
    if (pooling) weights = lazy_metropolis_weights(config.schedule.graph_at(0));

    std::vector<RngStream> signal_streams;
    signal_streams.reserve(n);
    for (int i = 0; i < n; ++i)
        signal_streams.push_back(RngStream::derive(config.seed, {kRngPurposeSignals, static_cast<std::uint64_t>(i)}));
    std::map<int, RngStream> adversary_streams;
    for (const auto& [agent, strategy] : config.adversary.byzantine)
        adversary_streams.emplace(agent, RngStream::derive(strategy.seed, {kRngPurposeAdversary, static_cast<std::uint64_t>(agent)}));

    // What each Byzantine agent transmits for the current step, per recipient.
    std::map<int, std::map<int, std::vector<double>>> forged;
    auto forge_for_time = [&](std::int64_t t) {
        const DirectedGraph& g = config.schedule.graph_at(t);
        for (const auto& [agent, strategy] : config.adversary.byzantine) {
            const auto& outs = g.out_neighbors(agent);
            forged[agent] = forge_messages(config.adversary, agent, t, state.log_actual.row(agent), outs,
                                           adversary_streams.at(agent));
        }
    };
    forge_for_time(0);

    double min_log_true = std::numeric_limits<double>::infinity();
    auto track_min = [&]() {
        for (int i = 0; i < n; ++i) {
            if (record.adversarial[i]) continue;
            min_log_true = std::min({min_log_true, state.log_actual.at(i, true_index), state.log_local.at(i, true_index)});
        }
    };
    track_min();

    auto record_step = [&](std::int64_t t, const std::vector<int>* step_signals) {
        record.times.push_back(t);
        if (config.record.actual) {
            BeliefMatrix snapshot = state.log_actual;
            // An adversary's visible belief is what it put on the wire, taken
            // from its lowest-index outgoing edge.
            for (const auto& [agent, messages] : forged) {
                if (messages.empty()) continue;
                auto row = snapshot.row(agent);
                const auto& sent = messages.begin()->second;
                std::copy(sent.begin(), sent.end(), row.begin());
            }
            record.log_actual.push_back(std::move(snapshot));
        }
        if (config.record.local) record.log_local.push_back(state.log_local);
        if (config.record.signals)
            record.signals.push_back(step_signals ? *step_signals : std::vector<int>(n, -1));
    };
    record_step(0, nullptr);

    std::vector<int> signals(n);
    BeliefMatrix new_local(n, m), new_actual(n, m);
    BeliefMatrix pool_view(n, m);
    std::vector<InboxMessage> inbox;

    for (std::int64_t t = 0; t < config.horizon; ++t) {
        const DirectedGraph& g = config.schedule.graph_at(t);

        for (int i = 0; i < n; ++i) {
            signals[i] = sample_from_row(config.model.agents[i].row(true_index),
                                         signal_streams[i].next_double());
            record.signal_digest = fnv1a64(&signals[i], sizeof signals[i], record.signal_digest);
        }

        for (int i = 0; i < n; ++i) {
            const auto updated = bayes_local_update(state.log_local.row(i), config.model.agents[i], signals[i]);
            std::copy(updated.begin(), updated.end(), new_local.row(i).begin());
        }

        for (int i = 0; i < n; ++i) {
            const auto& neighbors = g.in_neighbors(i);
            std::vector<double> updated;
            if (pooling) {
                pool_view = state.log_actual;
                for (int j : neighbors) {
                    if (!record.adversarial[j]) continue;
                    const auto& sent = forged.at(j).at(i);
                    std::copy(sent.begin(), sent.end(), pool_view.row(j).begin());
                }
                updated = config.rule.kind == RuleKind::Linear
                              ? linear_pool_update(pool_view, weights, i, config.model.agents[i], signals[i])
                              : loglinear_pool_update(pool_view, weights, i, config.model.agents[i], signals[i]);
            } else {
                inbox.clear();
                for (int j : neighbors) {
                    if (record.adversarial[j]) {
                        inbox.push_back({j, forged.at(j).at(i)});
                    } else {
                        const auto row = state.log_actual.row(j);
                        inbox.push_back({j, std::vector<double>(row.begin(), row.end())});
                    }
                }
                updated = config.rule.kind == RuleKind::MinRule
                              ? min_rule_update(state.log_actual.row(i), inbox, new_local.row(i))
                              : lfrhe_update(inbox, new_local.row(i), config.rule.max_faulty);
            }
            std::copy(updated.begin(), updated.end(), new_actual.row(i).begin());
        }

        state.log_local = new_local;
        state.log_actual = new_actual;
        check_finite(state.log_actual, record.adversarial, t + 1, "actual");
        check_finite(state.log_local, record.adversarial, t + 1, "local");
        track_min();

        forge_for_time(t + 1);
        if ((t + 1) % config.record.stride == 0 || t + 1 == config.horizon)
            record_step(t + 1, &signals);
    }

    record.min_log_true_belief_regular = min_log_true;
    return record;
}

std::vector<RunSummary> sweep(const SimulationConfig& config, std::span<const std::uint64_t> seeds,
                              std::span<const std::int64_t> grid_times) {
    if (seeds.empty()) throw std::invalid_argument("sweep: need at least one seed");

    std::vector<std::int64_t> grid(grid_times.begin(), grid_times.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (std::int64_t t : grid) {
        if (t < 1 || t > config.horizon)
            throw std::invalid_argument("sweep: grid time outside [1, horizon]");
    }

    std::vector<RunSummary> summaries(seeds.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= seeds.size()) return;
            try {
                SimulationConfig local = config;
                local.seed = seeds[k];
                local.record = RecordOptions{1, true, false, false};
                const TrajectoryRecord record = run(local);
                RunSummary summary;
                summary.seed = seeds[k];
                summary.final_log_actual = record.log_actual.back();
                summary.grid_times = grid;
                for (std::int64_t t : grid)
                    summary.grid_log_actual.push_back(record.log_actual[record.index_of_time(t)]);
                summary.signal_digest = record.signal_digest;
                summary.min_log_true_belief_regular = record.min_log_true_belief_regular;
                summary.adversarial = record.adversarial;
                summaries[k] = std::move(summary);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    const std::size_t thread_count =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), seeds.size());
    std::vector<std::thread> threads;
    for (std::size_t k = 0; k < thread_count; ++k) threads.emplace_back(worker);
    for (auto& thread : threads) thread.join();
    if (failure) std::rethrow_exception(failure);
    return summaries;
}

const char* rule_kind_name(RuleKind kind) {
    switch (kind) {
        case RuleKind::MinRule: return "min_rule";
        case RuleKind::Lfrhe: return "lfrhe";
        case RuleKind::Linear: return "linear";
        case RuleKind::LogLinear: return "loglinear";
    }
    return "unknown";
}

}  // namespace dht
