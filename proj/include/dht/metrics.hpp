#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dht/engine.hpp"
#include "dht/graphs.hpp"
#include "dht/model.hpp"

namespace dht {

// Instantaneous rejection rate -log mu_{i,t}(theta) / t at one recorded step.
double rejection_rate_at(const TrajectoryRecord& record, int agent, int theta, std::int64_t t);

// The same as a series over all recorded steps with t >= 1 (paired with
// rejection_rate_times for the time axis).
std::vector<double> rejection_rate(const TrajectoryRecord& record, int agent, int theta);
std::vector<std::int64_t> rejection_rate_times(const TrajectoryRecord& record);

// Summed total-variation distance to the truth-concentrated distribution:
// sum over agents of sum over false hypotheses of mu_{i,t}(theta).
// With regular_only, adversarial agents are excluded.
double tv_error(const TrajectoryRecord& record, std::int64_t t, bool regular_only);

// Tail estimate of liminf -log e_t / t: the minimum of that quantity over
// the trailing `tail_fraction` of recorded steps. Computed in log domain, so
// fully collapsed errors do not underflow. An estimator, not the limit.
double social_learning_rate(const TrajectoryRecord& record, double tail_fraction, bool regular_only);

enum class BoundKind {
    BestSourceKl,        // max KL over the full source set, per false hypothesis
    PathRestrictedKl,    // per agent: max KL over sources with a path to it (static graph)
    RegularMinSourceKl,  // min KL over non-adversarial sources, per false hypothesis
};

struct BoundsReport {
    BoundKind kind = BoundKind::BestSourceKl;
    int true_index = 0;
    // Indexed by hypothesis; the true hypothesis' slot is NaN.
    std::vector<double> per_theta;
    // PathRestrictedKl only: [agent][hypothesis].
    std::vector<std::vector<double>> per_agent_theta;
    // Network-level rate bound: min over false hypotheses (and agents, for
    // the path-restricted variant).
    double network = 0.0;
    std::vector<std::string> warnings;  // empty source sets reported as 0-bounds
};

// Rate lower bounds implied by the model (and, for the path-restricted
// variant, the static graph; for the regular-min variant, the regular set).
BoundsReport theoretical_bounds(const ObservationModel& model, BoundKind kind,
                                const DirectedGraph* graph = nullptr,
                                std::span<const int> regular = {});

// (1/n) sum_i K_i(theta*, theta) per false hypothesis: the rejection rate the
// averaging baselines approach under uniform eigenvector centrality. Requires
// doubly stochastic weights. True hypothesis' slot is NaN.
std::vector<double> baseline_reference_rates(const ObservationModel& model,
                                             const ConsensusWeights& weights);

// Bound comparison for one finished run.
struct RateEntry {
    int agent = 0;
    int theta = 0;
    double final_q = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct RateReport {
    BoundKind provenance = BoundKind::BestSourceKl;
    double band = 0.0;
    std::vector<RateEntry> entries;  // regular agents x false hypotheses
    bool all_pass = true;
};

RateReport build_rate_report(const TrajectoryRecord& record, const BoundsReport& bounds,
                             double band);

inline constexpr std::int64_t kInfiniteDelay = std::numeric_limits<std::int64_t>::max() / 4;

// Information-delay recursion for one reference agent: the reference holds 0
// forever, everyone else starts unbounded and takes 1 + the minimum over its
// inclusive neighborhood each step.
struct DelayTrace {
    int theta = 0;
    int reference = 0;
    std::vector<std::vector<std::int64_t>> delays;  // [t][agent], kInfiniteDelay = unreached
    std::int64_t bound = 0;                          // 2 (n-1) T
    std::int64_t first_checked = 0;                  // (n-1) T
    bool bound_holds = true;
};

// The source with the best discriminatory power for the pair
// (true hypothesis, theta); lowest index on ties. -1 if no source exists.
int reference_source(const ObservationModel& model, int theta);

std::vector<std::vector<std::int64_t>> delay_trace(const GraphSchedule& schedule, int reference,
                                                   std::int64_t horizon);

// One trace per false hypothesis, checked against the 2(n-1)T bound at every
// t in [(n-1)T, horizon]. Requires the window length T of the schedule's
// joint connectivity assumption.
std::vector<DelayTrace> delay_diagnostic(const ObservationModel& model,
                                         const GraphSchedule& schedule, int window,
                                         std::int64_t horizon);

struct ConcentrationCurve {
    int agent = 0;
    int theta = 0;
    double epsilon = 0.0;
    double best_kl = 0.0;         // max KL over the source set for this pair
    double reference_rate = 0.0;  // epsilon^2 / (8 L^2), displayed, not asserted
    std::vector<std::int64_t> times;
    std::vector<double> exceedance;  // fraction of seeds with q <= best_kl - epsilon
};

// Fraction of sweep runs whose rejection rate still trails the best-source
// bound by epsilon, per grid time. Refuses fewer than 50 seeds.
ConcentrationCurve concentration_probe(std::span<const RunSummary> summaries,
                                       const ObservationModel& model, int agent, int theta,
                                       double epsilon);

const char* bound_kind_name(BoundKind kind);

}  // namespace dht
