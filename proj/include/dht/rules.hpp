#pragma once

#include <span>
#include <vector>

#include "dht/graphs.hpp"
#include "dht/model.hpp"

namespace dht {

// Row-major matrix of log-probabilities, one row per agent.
class BeliefMatrix {
public:
    BeliefMatrix() = default;
    BeliefMatrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::span<double> row(int i) { return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)}; }
    std::span<const double> row(int i) const { return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)}; }
    double at(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double& at(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const BeliefMatrix&) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Per-agent local (private Bayesian) and actual (broadcast) beliefs, both in
// log domain. Log storage keeps 1e5-step runs exact where plain doubles
// would underflow near t ~ 700 / rate.
struct BeliefState {
    BeliefMatrix log_local;
    BeliefMatrix log_actual;
};

// A neighbor's broadcast belief as received on one edge.
struct InboxMessage {
    int sender = -1;
    std::vector<double> log_belief;
};

// Row-stochastic consensus matrix; a[i][j] > 0 only for j in the inclusive
// neighborhood of i.
struct ConsensusWeights {
    std::vector<std::vector<double>> a;
    int size() const { return static_cast<int>(a.size()); }
};

// Bayesian posterior of `log_prior` given one observed signal:
// out(p) = log l(signal|p) + log_prior(p), log-normalized.
std::vector<double> bayes_local_update(std::span<const double> log_prior,
                                       const AgentLikelihood& agent, int signal);

// Min rule: per hypothesis, the minimum of the agent's own broadcast belief,
// every inbox belief, and the fresh local belief; then log-normalized.
std::vector<double> min_rule_update(std::span<const double> own_log_actual,
                                    std::span<const InboxMessage> inbox,
                                    std::span<const double> new_log_local);

// Trimming variant: with fewer than 2f+1 inbox messages the local belief is
// adopted unchanged. Otherwise, per hypothesis, the f highest and f lowest
// inbox values are discarded and the minimum of the survivors and the local
// belief is taken, then log-normalized. The agent's own broadcast belief
// does not participate.
std::vector<double> lfrhe_update(std::span<const InboxMessage> inbox,
                                 std::span<const double> new_log_local, int max_faulty);

// a[i][j] = 1 / (2 max(d_i, d_j)) for neighbors, diagonal takes the rest.
// Requires a symmetric graph; the result is doubly stochastic, so every
// agent's eigenvector centrality is 1/n.
ConsensusWeights lazy_metropolis_weights(const DirectedGraph& g);

// Arithmetic pooling: own Bayesian posterior (from the agent's broadcast
// belief) convexly combined with neighbors' broadcast beliefs. Computed via
// log-sum-exp so the output stays representable at any horizon.
std::vector<double> linear_pool_update(const BeliefMatrix& all_log_actual,
                                       const ConsensusWeights& weights, int agent,
                                       const AgentLikelihood& lik, int signal);

// Geometric pooling: weighted geometric mean of the inclusive neighborhood's
// broadcast beliefs, reweighted by the agent's own likelihood.
std::vector<double> loglinear_pool_update(const BeliefMatrix& all_log_actual,
                                          const ConsensusWeights& weights, int agent,
                                          const AgentLikelihood& lik, int signal);

}  // namespace dht
