#include "dht/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dht/numeric.hpp"

namespace dht {

namespace {

void check_false_hypothesis(const TrajectoryRecord& record, int agent, int theta) {
    if (agent < 0 || agent >= record.agent_count)
        throw std::invalid_argument("rejection_rate: agent index out of range");
    if (theta < 0 || theta >= record.hypothesis_count)
        throw std::invalid_argument("rejection_rate: hypothesis index out of range");
    if (theta == record.true_index)
        throw std::invalid_argument("rejection_rate: undefined for the true hypothesis");
}

}  // namespace

double rejection_rate_at(const TrajectoryRecord& record, int agent, int theta, std::int64_t t) {
    check_false_hypothesis(record, agent, theta);
    if (t < 1) throw std::invalid_argument("rejection_rate: t must be >= 1");
    const int k = record.index_of_time(t);
    if (k < 0) throw std::invalid_argument("rejection_rate: time not recorded");
    return -record.log_actual[k].at(agent, theta) / static_cast<double>(t);
}

std::vector<double> rejection_rate(const TrajectoryRecord& record, int agent, int theta) {
    check_false_hypothesis(record, agent, theta);
    std::vector<double> series;
    for (std::size_t k = 0; k < record.times.size(); ++k) {
        const std::int64_t t = record.times[k];
        if (t < 1) continue;
        series.push_back(-record.log_actual[k].at(agent, theta) / static_cast<double>(t));
    }
    return series;
}

std::vector<std::int64_t> rejection_rate_times(const TrajectoryRecord& record) {
    std::vector<std::int64_t> times;
    for (std::int64_t t : record.times)
        if (t >= 1) times.push_back(t);
    return times;
}

namespace {

// log sum over (selected agents) x (false hypotheses) of mu, from log beliefs.
double log_tv_error(const BeliefMatrix& log_actual, int true_index,
                    const std::vector<std::uint8_t>& adversarial, bool regular_only) {
    std::vector<double> terms;
    for (int i = 0; i < log_actual.rows(); ++i) {
        if (regular_only && adversarial[i]) continue;
        for (int p = 0; p < log_actual.cols(); ++p) {
            if (p == true_index) continue;
            terms.push_back(log_actual.at(i, p));
        }
    }
    if (terms.empty()) return -std::numeric_limits<double>::infinity();
    return log_sum_exp(terms);
}

}  // namespace

double tv_error(const TrajectoryRecord& record, std::int64_t t, bool regular_only) {
    const int k = record.index_of_time(t);
    if (k < 0) throw std::invalid_argument("tv_error: time not recorded");
    return std::exp(log_tv_error(record.log_actual[k], record.true_index, record.adversarial,
                                 regular_only));
}

double social_learning_rate(const TrajectoryRecord& record, double tail_fraction, bool regular_only) {
    if (!(tail_fraction > 0.0) || tail_fraction > 1.0)
        throw std::invalid_argument("social_learning_rate: tail fraction must be in (0, 1]");
    const std::int64_t tail_start =
        record.horizon - static_cast<std::int64_t>(tail_fraction * static_cast<double>(record.horizon));
    double estimate = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t k = 0; k < record.times.size(); ++k) {
        const std::int64_t t = record.times[k];
        if (t < 1 || t < tail_start) continue;
        const double log_e =
            log_tv_error(record.log_actual[k], record.true_index, record.adversarial, regular_only);
        any = true;
        estimate = std::min(estimate, -log_e / static_cast<double>(t));
    }
    if (!any) throw std::invalid_argument("social_learning_rate: empty tail window");
    return estimate;
}

BoundsReport theoretical_bounds(const ObservationModel& model, BoundKind kind,
                                const DirectedGraph* graph, std::span<const int> regular) {
    const int n = model.agent_count();
    const int m = model.hypothesis_count();
    const int star = model.hypotheses.true_index;
    if (kind == BoundKind::PathRestrictedKl && graph == nullptr)
        throw std::invalid_argument("theoretical_bounds: path-restricted bound needs a graph");

    std::vector<char> is_regular(n, 1);
    if (kind == BoundKind::RegularMinSourceKl && !regular.empty()) {
        std::fill(is_regular.begin(), is_regular.end(), 0);
        for (int i : regular) is_regular[i] = 1;
    }

    BoundsReport report;
    report.kind = kind;
    report.true_index = star;
    report.per_theta.assign(m, std::numeric_limits<double>::quiet_NaN());
    if (kind == BoundKind::PathRestrictedKl)
        report.per_agent_theta.assign(n, std::vector<double>(m, std::numeric_limits<double>::quiet_NaN()));

    report.network = std::numeric_limits<double>::infinity();
    for (int theta = 0; theta < m; ++theta) {
        if (theta == star) continue;
        const auto sources = source_set(model, star, theta);
        switch (kind) {
            case BoundKind::BestSourceKl: {
                double best = 0.0;
                for (int v : sources)
                    best = std::max(best, kl_divergence(model.agents[v].row(star), model.agents[v].row(theta)));
                if (sources.empty())
                    report.warnings.push_back("no source agent for hypothesis " +
                                              model.hypotheses.names[theta] + "; bound is 0");
                report.per_theta[theta] = best;
                report.network = std::min(report.network, best);
                break;
            }
            case BoundKind::RegularMinSourceKl: {
                double worst = std::numeric_limits<double>::infinity();
                bool found = false;
                for (int v : sources) {
                    if (!is_regular[v]) continue;
                    found = true;
                    worst = std::min(worst, kl_divergence(model.agents[v].row(star), model.agents[v].row(theta)));
                }
                if (!found) {
                    worst = 0.0;
                    report.warnings.push_back("no regular source agent for hypothesis " +
                                              model.hypotheses.names[theta] + "; bound is 0");
                }
                report.per_theta[theta] = worst;
                report.network = std::min(report.network, worst);
                break;
            }
            case BoundKind::PathRestrictedKl: {
                if (sources.empty()) {
                    report.warnings.push_back("no source agent for hypothesis " +
                                              model.hypotheses.names[theta] + "; bounds are 0");
                    for (int i = 0; i < n; ++i) report.per_agent_theta[i][theta] = 0.0;
                    report.per_theta[theta] = 0.0;
                    report.network = 0.0;
                    break;
                }
                double worst_agent = std::numeric_limits<double>::infinity();
                for (int i = 0; i < n; ++i) {
                    double best = 0.0;
                    for (int v : sources) {
                        // v contributes to i iff i is reachable from v; on the
                        // small graphs here, recompute per source.
                        const auto from_v = reachable_from(*graph, {v});
                        if (!std::binary_search(from_v.begin(), from_v.end(), i)) continue;
                        best = std::max(best, kl_divergence(model.agents[v].row(star), model.agents[v].row(theta)));
                    }
                    report.per_agent_theta[i][theta] = best;
                    worst_agent = std::min(worst_agent, best);
                }
                report.per_theta[theta] = worst_agent;
                report.network = std::min(report.network, worst_agent);
                break;
            }
        }
    }
    if (!std::isfinite(report.network)) report.network = 0.0;
    return report;
}

std::vector<double> baseline_reference_rates(const ObservationModel& model,
                                             const ConsensusWeights& weights) {
    const int n = model.agent_count();
    if (weights.size() != n)
        throw std::invalid_argument("baseline_reference_rates: weight size mismatch");
    for (int j = 0; j < n; ++j) {
        double column = 0.0;
        for (int i = 0; i < n; ++i) column += weights.a[i][j];
        if (std::abs(column - 1.0) > 1e-9)
            throw std::invalid_argument("baseline_reference_rates: weights must be doubly stochastic");
    }
    const int m = model.hypothesis_count();
    const int star = model.hypotheses.true_index;
    std::vector<double> rates(m, std::numeric_limits<double>::quiet_NaN());
    for (int theta = 0; theta < m; ++theta) {
        if (theta == star) continue;
        double total = 0.0;
        for (int i = 0; i < n; ++i)
            total += kl_divergence(model.agents[i].row(star), model.agents[i].row(theta));
        rates[theta] = total / static_cast<double>(n);
    }
    return rates;
}

RateReport build_rate_report(const TrajectoryRecord& record, const BoundsReport& bounds,
                             double band) {
    RateReport report;
    report.provenance = bounds.kind;
    report.band = band;
    for (int i = 0; i < record.agent_count; ++i) {
        if (record.adversarial[i]) continue;
        for (int theta = 0; theta < record.hypothesis_count; ++theta) {
            if (theta == record.true_index) continue;
            RateEntry entry;
            entry.agent = i;
            entry.theta = theta;
            entry.final_q = rejection_rate_at(record, i, theta, record.horizon);
            entry.bound = bounds.kind == BoundKind::PathRestrictedKl
                              ? bounds.per_agent_theta[i][theta]
                              : bounds.per_theta[theta];
            entry.pass = entry.final_q >= entry.bound - band;
            report.all_pass = report.all_pass && entry.pass;
            report.entries.push_back(entry);
        }
    }
    return report;
}

int reference_source(const ObservationModel& model, int theta) {
    const int star = model.hypotheses.true_index;
    if (theta == star) throw std::invalid_argument("reference_source: true hypothesis");
    const auto sources = source_set(model, star, theta);
    int best = -1;
    double best_kl = -1.0;
    for (int v : sources) {
        const double kl = kl_divergence(model.agents[v].row(star), model.agents[v].row(theta));
        if (kl > best_kl + kZeroKlTol) {
            best = v;
            best_kl = kl;
        }
    }
    return best;
}

std::vector<std::vector<std::int64_t>> delay_trace(const GraphSchedule& schedule, int reference,
                                                   std::int64_t horizon) {
    const int n = schedule.agent_count();
    if (reference < 0 || reference >= n)
        throw std::invalid_argument("delay_trace: reference out of range");
    if (horizon < 0) throw std::invalid_argument("delay_trace: negative horizon");
    std::vector<std::vector<std::int64_t>> trace;
    std::vector<std::int64_t> current(n, kInfiniteDelay);
    current[reference] = 0;
    trace.push_back(current);
    for (std::int64_t t = 0; t < horizon; ++t) {
        const DirectedGraph& g = schedule.graph_at(t);
        std::vector<std::int64_t> next(n);
        for (int i = 0; i < n; ++i) {
            if (i == reference) {
                next[i] = 0;
                continue;
            }
            std::int64_t least = current[i];
            for (int j : g.in_neighbors(i)) least = std::min(least, current[j]);
            next[i] = least >= kInfiniteDelay ? kInfiniteDelay : least + 1;
        }
        current = std::move(next);
        trace.push_back(current);
    }
    return trace;
}

std::vector<DelayTrace> delay_diagnostic(const ObservationModel& model,
                                         const GraphSchedule& schedule, int window,
                                         std::int64_t horizon) {
    if (window < 1) throw std::invalid_argument("delay_diagnostic: window must be >= 1");
    const int n = schedule.agent_count();
    std::vector<DelayTrace> traces;
    for (int theta = 0; theta < model.hypothesis_count(); ++theta) {
        if (theta == model.hypotheses.true_index) continue;
        DelayTrace trace;
        trace.theta = theta;
        trace.reference = reference_source(model, theta);
        if (trace.reference < 0)
            throw std::invalid_argument("delay_diagnostic: no source agent for hypothesis " +
                                        model.hypotheses.names[theta]);
        trace.delays = delay_trace(schedule, trace.reference, horizon);
        trace.bound = 2 * static_cast<std::int64_t>(n - 1) * window;
        trace.first_checked = static_cast<std::int64_t>(n - 1) * window;
        trace.bound_holds = true;
        for (std::int64_t t = trace.first_checked; t <= horizon; ++t) {
            for (int i = 0; i < n; ++i) {
                if (trace.delays[t][i] > trace.bound) {
                    trace.bound_holds = false;
                    break;
                }
            }
            if (!trace.bound_holds) break;
        }
        traces.push_back(std::move(trace));
    }
    return traces;
}

ConcentrationCurve concentration_probe(std::span<const RunSummary> summaries,
                                       const ObservationModel& model, int agent, int theta,
                                       double epsilon) {
    if (summaries.size() < 50)
        throw std::invalid_argument("concentration_probe: need at least 50 seeds, got " +
                                    std::to_string(summaries.size()));
    if (!(epsilon > 0.0)) throw std::invalid_argument("concentration_probe: epsilon must be positive");
    const int star = model.hypotheses.true_index;
    if (theta == star)
        throw std::invalid_argument("concentration_probe: undefined for the true hypothesis");

    ConcentrationCurve curve;
    curve.agent = agent;
    curve.theta = theta;
    curve.epsilon = epsilon;
    curve.best_kl = 0.0;
    for (int v : source_set(model, star, theta))
        curve.best_kl = std::max(curve.best_kl,
                                 kl_divergence(model.agents[v].row(star), model.agents[v].row(theta)));
    const double log_ratio = log_ratio_bound(model);
    curve.reference_rate = epsilon * epsilon / (8.0 * log_ratio * log_ratio);

    curve.times = summaries.front().grid_times;
    curve.exceedance.assign(curve.times.size(), 0.0);
    for (const auto& summary : summaries) {
        if (summary.grid_times != curve.times)
            throw std::invalid_argument("concentration_probe: summaries use different grids");
        for (std::size_t k = 0; k < curve.times.size(); ++k) {
            const double q = -summary.grid_log_actual[k].at(agent, theta) /
                             static_cast<double>(curve.times[k]);
            if (q <= curve.best_kl - epsilon) curve.exceedance[k] += 1.0;
        }
    }
    for (double& fraction : curve.exceedance) fraction /= static_cast<double>(summaries.size());
    return curve;
}

const char* bound_kind_name(BoundKind kind) {
    switch (kind) {
        case BoundKind::BestSourceKl: return "best_source_kl";
        case BoundKind::PathRestrictedKl: return "path_restricted_kl";
        case BoundKind::RegularMinSourceKl: return "regular_min_source_kl";
    }
    return "unknown";
}

}  // namespace dht
