#include "dht/model.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "dht/errors.hpp"

namespace dht {

void HypothesisSet::validate() const {
    if (names.size() < 2) throw ModelError("hypotheses.names: need at least 2 hypotheses");
    std::set<std::string> seen(names.begin(), names.end());
    if (seen.size() != names.size()) throw ModelError("hypotheses.names: labels must be unique");
    if (true_index < 0 || true_index >= size())
        throw ModelError("hypotheses.true: index out of range");
}

void AgentLikelihood::validate_and_normalize(int hypothesis_count, const std::string& where) {
    if (signal_names.empty()) throw ModelError(where + ".signals: need at least 1 signal");
    std::set<std::string> seen(signal_names.begin(), signal_names.end());
    if (seen.size() != signal_names.size())
        throw ModelError(where + ".signals: labels must be unique");
    if (static_cast<int>(table.size()) != hypothesis_count)
        throw ModelError(where + ".rows: need one row per hypothesis");
    for (std::size_t p = 0; p < table.size(); ++p) {
        auto& r = table[p];
        const std::string row_where = where + ".rows[" + std::to_string(p) + "]";
        if (r.size() != signal_names.size())
            throw ModelError(row_where + ": need one entry per signal");
        double sum = 0.0;
        for (double v : r) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ModelError(row_where + ": entries must be strictly positive");
            sum += v;
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
            throw ModelError(row_where + ": sums to " + std::to_string(sum) + ", expected 1");
        for (double& v : r) v /= sum;
    }
}

void ObservationModel::validate_and_normalize() {
    hypotheses.validate();
    if (agents.empty()) throw ModelError("agents: need at least 1 agent");
    for (std::size_t i = 0; i < agents.size(); ++i)
        agents[i].validate_and_normalize(hypothesis_count(), "agents[" + std::to_string(i) + "]");
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw ModelError("kl_divergence: dimension mismatch");
    if (p.empty()) throw ModelError("kl_divergence: empty distributions");
    double sum_p = 0.0, sum_q = 0.0;
    for (std::size_t w = 0; w < p.size(); ++w) {
        if (!(p[w] > 0.0) || !(q[w] > 0.0))
            throw ModelError("kl_divergence: entries must be strictly positive");
        sum_p += p[w];
        sum_q += q[w];
    }
    if (std::abs(sum_p - 1.0) > kRowSumTol || std::abs(sum_q - 1.0) > kRowSumTol)
        throw ModelError("kl_divergence: inputs must sum to 1");
    double d = 0.0;
    for (std::size_t w = 0; w < p.size(); ++w) d += p[w] * std::log(p[w] / q[w]);
    // Rounding can leave a tiny negative residue on identical-up-to-fp rows.
    return d < 0.0 && d > -kZeroKlTol ? 0.0 : d;
}

std::vector<int> source_set(const ObservationModel& model, int theta_p, int theta_q) {
    if (theta_p == theta_q) throw std::invalid_argument("source_set: hypotheses must differ");
    const int m = model.hypothesis_count();
    if (theta_p < 0 || theta_p >= m || theta_q < 0 || theta_q >= m)
        throw std::invalid_argument("source_set: hypothesis index out of range");
    std::vector<int> sources;
    for (int i = 0; i < model.agent_count(); ++i) {
        if (kl_divergence(model.agents[i].row(theta_p), model.agents[i].row(theta_q)) > kZeroKlTol)
            sources.push_back(i);
    }
    return sources;
}

bool globally_identifiable(const ObservationModel& model, const std::vector<int>& subset) {
    if (subset.empty()) throw std::invalid_argument("globally_identifiable: empty agent subset");
    for (int i : subset) {
        if (i < 0 || i >= model.agent_count())
            throw std::invalid_argument("globally_identifiable: agent index out of range");
    }
    const int m = model.hypothesis_count();
    for (int p = 0; p < m; ++p) {
        for (int q = p + 1; q < m; ++q) {
            bool found = false;
            for (int i : subset) {
                if (kl_divergence(model.agents[i].row(p), model.agents[i].row(q)) > kZeroKlTol) {
                    found = true;
                    break;
                }
            }
            if (!found) return false;
        }
    }
    return true;
}

double log_ratio_bound(const ObservationModel& model) {
    const int m = model.hypothesis_count();
    double bound = 0.0;
    for (const auto& agent : model.agents) {
        for (int p = 0; p < m; ++p) {
            for (int q = 0; q < m; ++q) {
                if (p == q) continue;
                for (int w = 0; w < agent.signal_count(); ++w) {
                    const double ratio = std::abs(std::log(agent.table[p][w] / agent.table[q][w]));
                    bound = std::max(bound, ratio);
                }
            }
        }
    }
    return bound;
}

int sample_from_row(std::span<const double> row, double u) {
    double cumulative = 0.0;
    for (std::size_t w = 0; w + 1 < row.size(); ++w) {
        cumulative += row[w];
        if (u < cumulative) return static_cast<int>(w);
    }
    return static_cast<int>(row.size()) - 1;
}

std::vector<int> sample_signals(const ObservationModel& model, RngStream& stream) {
    std::vector<int> signals(model.agent_count());
    for (int i = 0; i < model.agent_count(); ++i)
        signals[i] = sample_from_row(model.agents[i].row(model.hypotheses.true_index), stream.next_double());
    return signals;
}

}  // namespace dht
