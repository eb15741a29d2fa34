#pragma once

#include <span>
#include <string>
#include <vector>

#include "dht/rng.hpp"

namespace dht {

// KL divergences below this are treated as "cannot distinguish the pair".
inline constexpr double kZeroKlTol = 1e-12;

// Row sums may be renormalized if within this of one; otherwise rejected.
inline constexpr double kRowSumTol = 1e-9;

struct HypothesisSet {
    std::vector<std::string> names;  // m >= 2, unique labels
    int true_index = 0;              // index of the hypothesis driving the signal generator

    int size() const { return static_cast<int>(names.size()); }
    void validate() const;
};

// One agent's finite-signal likelihood table. Row p is the signal
// distribution under hypothesis p; every entry must be strictly positive.
struct AgentLikelihood {
    std::vector<std::string> signal_names;
    std::vector<std::vector<double>> table;  // rows = hypotheses, cols = signals

    int signal_count() const { return static_cast<int>(signal_names.size()); }
    std::span<const double> row(int hypothesis) const { return table[hypothesis]; }

    // Checks shape and positivity; renormalizes rows whose sum is within
    // kRowSumTol of one, rejects anything further off.
    void validate_and_normalize(int hypothesis_count, const std::string& where);
};

struct ObservationModel {
    HypothesisSet hypotheses;
    std::vector<AgentLikelihood> agents;

    int agent_count() const { return static_cast<int>(agents.size()); }
    int hypothesis_count() const { return hypotheses.size(); }
    void validate_and_normalize();
};

// Kullback-Leibler divergence sum_w p(w) log(p(w)/q(w)), in nats.
// Both rows must be strictly positive distributions of equal length.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Agents whose likelihood rows differ (KL above kZeroKlTol) between the two
// hypotheses. Symmetric in (p, q).
std::vector<int> source_set(const ObservationModel& model, int theta_p, int theta_q);

// True iff every hypothesis pair has a distinguishing agent inside `subset`.
bool globally_identifiable(const ObservationModel& model, const std::vector<int>& subset);

// Tightest constant bounding |log(l_i(w|p)/l_i(w|q))| over all agents,
// signals, and hypothesis pairs.
double log_ratio_bound(const ObservationModel& model);

// Draws an index from a probability row given a uniform [0,1) variate.
int sample_from_row(std::span<const double> row, double u);

// One signal per agent, each drawn from the true hypothesis' row. Consumes
// one variate per agent from `stream`, in agent order.
std::vector<int> sample_signals(const ObservationModel& model, RngStream& stream);

}  // namespace dht
