#include "dht/rules.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dht/errors.hpp"
#include "dht/numeric.hpp"

namespace dht {

std::vector<double> bayes_local_update(std::span<const double> log_prior,
                                       const AgentLikelihood& agent, int signal) {
    const int m = static_cast<int>(log_prior.size());
    std::vector<double> out(m);
    for (int p = 0; p < m; ++p) out[p] = std::log(agent.table[p][signal]) + log_prior[p];
    log_normalize(out);
    return out;
}

std::vector<double> min_rule_update(std::span<const double> own_log_actual,
                                    std::span<const InboxMessage> inbox,
                                    std::span<const double> new_log_local) {
    const std::size_t m = own_log_actual.size();
    if (new_log_local.size() != m) throw ProtocolError("min_rule_update: local belief width mismatch");
    std::vector<double> out(own_log_actual.begin(), own_log_actual.end());
    for (const auto& msg : inbox) {
        if (msg.log_belief.size() != m)
            throw ProtocolError("min_rule_update: inbox message width mismatch");
        for (std::size_t p = 0; p < m; ++p) out[p] = std::min(out[p], msg.log_belief[p]);
    }
    for (std::size_t p = 0; p < m; ++p) out[p] = std::min(out[p], new_log_local[p]);
    log_normalize(out);
    return out;
}

std::vector<double> lfrhe_update(std::span<const InboxMessage> inbox,
                                 std::span<const double> new_log_local, int max_faulty) {
    if (max_faulty < 0) throw std::invalid_argument("lfrhe_update: f must be non-negative");
    const std::size_t m = new_log_local.size();
    for (const auto& msg : inbox) {
        if (msg.log_belief.size() != m)
            throw ProtocolError("lfrhe_update: inbox message width mismatch");
    }
    // Too few neighbors to out-vote f liars on both ends: fall back to the
    // purely local belief.
    if (inbox.size() < static_cast<std::size_t>(2 * max_faulty + 1))
        return std::vector<double>(new_log_local.begin(), new_log_local.end());

    std::vector<double> out(m);
    std::vector<double> values(inbox.size());
    for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t k = 0; k < inbox.size(); ++k) values[k] = inbox[k].log_belief[p];
        std::sort(values.begin(), values.end(), std::greater<>());
        // Survivors after dropping the f highest and f lowest on this hypothesis.
        double retained_min = values[max_faulty];
        for (std::size_t k = max_faulty; k < values.size() - max_faulty; ++k)
            retained_min = std::min(retained_min, values[k]);
        out[p] = std::min(retained_min, new_log_local[p]);
    }
    log_normalize(out);
    return out;
}

ConsensusWeights lazy_metropolis_weights(const DirectedGraph& g) {
    if (!g.is_symmetric())
        throw std::invalid_argument("lazy_metropolis_weights: graph must be symmetric");
    const int n = g.size();
    ConsensusWeights w;
    w.a.assign(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        double off_diagonal = 0.0;
        for (int j : g.in_neighbors(i)) {
            w.a[i][j] = 1.0 / (2.0 * std::max(g.degree(i), g.degree(j)));
            off_diagonal += w.a[i][j];
        }
        w.a[i][i] = 1.0 - off_diagonal;
    }
    return w;
}

std::vector<double> linear_pool_update(const BeliefMatrix& all_log_actual,
                                       const ConsensusWeights& weights, int agent,
                                       const AgentLikelihood& lik, int signal) {
    const int m = all_log_actual.cols();
    const auto own_posterior = bayes_local_update(all_log_actual.row(agent), lik, signal);
    // out(p) = log( a_ii exp(posterior) + sum_j a_ij exp(mu_j) ), term by term
    // through log-sum-exp.
    std::vector<double> out(m);
    std::vector<double> terms;
    for (int p = 0; p < m; ++p) {
        terms.clear();
        for (int j = 0; j < weights.size(); ++j) {
            if (weights.a[agent][j] <= 0.0) continue;
            const double value = j == agent ? own_posterior[p] : all_log_actual.at(j, p);
            terms.push_back(std::log(weights.a[agent][j]) + value);
        }
        out[p] = log_sum_exp(terms);
    }
    log_normalize(out);
    return out;
}

std::vector<double> loglinear_pool_update(const BeliefMatrix& all_log_actual,
                                          const ConsensusWeights& weights, int agent,
                                          const AgentLikelihood& lik, int signal) {
    const int m = all_log_actual.cols();
    std::vector<double> out(m);
    for (int p = 0; p < m; ++p) {
        double pooled = 0.0;
        for (int j = 0; j < weights.size(); ++j) {
            if (weights.a[agent][j] <= 0.0) continue;
            pooled += weights.a[agent][j] * all_log_actual.at(j, p);
        }
        out[p] = std::log(lik.table[p][signal]) + pooled;
    }
    log_normalize(out);
    return out;
}

}  // namespace dht
