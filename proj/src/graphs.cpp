#include "dht/graphs.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dht/errors.hpp"

namespace dht {

DirectedGraph::DirectedGraph(int n, std::vector<std::pair<int, int>> edge_list) : n_(n) {
    if (n < 1) throw std::invalid_argument("graph: need at least 1 node");
    std::set<std::pair<int, int>> unique_edges;
    for (auto [from, to] : edge_list) {
        if (from < 0 || from >= n || to < 0 || to >= n)
            throw std::invalid_argument("graph: edge endpoint out of range");
        if (from == to) continue;  // self-loops are implicit, never stored
        unique_edges.emplace(from, to);
    }
    edges_.assign(unique_edges.begin(), unique_edges.end());
    in_adj_.resize(n);
    out_adj_.resize(n);
    for (auto [from, to] : edges_) {
        out_adj_[from].push_back(to);
        in_adj_[to].push_back(from);
    }
    for (auto& adj : in_adj_) std::sort(adj.begin(), adj.end());
}

DirectedGraph DirectedGraph::undirected(int n, const std::vector<std::pair<int, int>>& edge_list) {
    std::vector<std::pair<int, int>> symmetric;
    symmetric.reserve(edge_list.size() * 2);
    for (auto [a, b] : edge_list) {
        symmetric.emplace_back(a, b);
        symmetric.emplace_back(b, a);
    }
    return DirectedGraph(n, std::move(symmetric));
}

const std::vector<int>& DirectedGraph::in_neighbors(int i) const {
    if (i < 0 || i >= n_) throw std::invalid_argument("graph: node index out of range");
    return in_adj_[i];
}

const std::vector<int>& DirectedGraph::out_neighbors(int i) const {
    if (i < 0 || i >= n_) throw std::invalid_argument("graph: node index out of range");
    return out_adj_[i];
}

bool DirectedGraph::has_edge(int from, int to) const {
    return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(from, to));
}

bool DirectedGraph::is_symmetric() const {
    return std::all_of(edges_.begin(), edges_.end(),
                       [this](const auto& e) { return has_edge(e.second, e.first); });
}

GraphSchedule::GraphSchedule(Kind kind, std::vector<DirectedGraph> sequence)
    : kind_(kind), sequence_(std::move(sequence)) {
    if (sequence_.empty()) throw std::invalid_argument("schedule: empty graph sequence");
    for (const auto& g : sequence_) {
        if (g.size() != sequence_.front().size())
            throw std::invalid_argument("schedule: all graphs must share the agent count");
    }
}

GraphSchedule GraphSchedule::static_graph(DirectedGraph g) {
    return GraphSchedule(Kind::Static, {std::move(g)});
}

GraphSchedule GraphSchedule::periodic(std::vector<DirectedGraph> sequence) {
    return GraphSchedule(Kind::Periodic, std::move(sequence));
}

GraphSchedule GraphSchedule::explicit_list(std::vector<DirectedGraph> sequence) {
    return GraphSchedule(Kind::Explicit, std::move(sequence));
}

const DirectedGraph& GraphSchedule::graph_at(std::int64_t t) const {
    if (t < 0) throw std::invalid_argument("schedule: negative time");
    switch (kind_) {
        case Kind::Static: return sequence_.front();
        case Kind::Periodic: return sequence_[static_cast<std::size_t>(t % sequence_length())];
        case Kind::Explicit:
            return sequence_[static_cast<std::size_t>(std::min(t, sequence_length() - 1))];
    }
    throw std::logic_error("schedule: unknown kind");
}

std::vector<int> in_neighbors(const GraphSchedule& schedule, int i, std::int64_t t) {
    return schedule.graph_at(t).in_neighbors(i);
}

DirectedGraph union_graph(const GraphSchedule& schedule, std::int64_t t_begin, std::int64_t t_end) {
    if (t_begin < 0 || t_end <= t_begin) throw std::invalid_argument("union_graph: bad interval");
    std::vector<std::pair<int, int>> all_edges;
    for (std::int64_t t = t_begin; t < t_end; ++t) {
        const auto& edges = schedule.graph_at(t).edges();
        all_edges.insert(all_edges.end(), edges.begin(), edges.end());
    }
    return DirectedGraph(schedule.agent_count(), std::move(all_edges));
}

namespace {

// Tarjan, as in the usual planning-code formulation.
void scc_dfs(const DirectedGraph& g, int vertex, std::vector<int>& dfs_numbers,
             std::vector<int>& dfs_minima, std::vector<int>& stack_indices, std::vector<int>& stack,
             int& current_dfs_number, std::vector<std::vector<int>>& sccs) {
    const int vertex_dfs_number = current_dfs_number++;
    dfs_numbers[vertex] = dfs_minima[vertex] = vertex_dfs_number;
    stack_indices[vertex] = static_cast<int>(stack.size());
    stack.push_back(vertex);

    for (int succ : g.out_neighbors(vertex)) {
        const int succ_dfs_number = dfs_numbers[succ];
        if (succ_dfs_number == -1) {
            scc_dfs(g, succ, dfs_numbers, dfs_minima, stack_indices, stack, current_dfs_number, sccs);
            dfs_minima[vertex] = std::min(dfs_minima[vertex], dfs_minima[succ]);
        } else if (succ_dfs_number < vertex_dfs_number && stack_indices[succ] != -1) {
            dfs_minima[vertex] = std::min(dfs_minima[vertex], succ_dfs_number);
        }
    }

    if (dfs_minima[vertex] == vertex_dfs_number) {
        const int stack_index = stack_indices[vertex];
        std::vector<int> scc;
        for (std::size_t i = stack_index; i < stack.size(); ++i) {
            scc.push_back(stack[i]);
            stack_indices[stack[i]] = -1;
        }
        stack.erase(stack.begin() + stack_index, stack.end());
        std::sort(scc.begin(), scc.end());
        sccs.push_back(std::move(scc));
    }
}

}  // namespace

std::vector<std::vector<int>> strongly_connected_components(const DirectedGraph& g) {
    const int n = g.size();
    std::vector<int> dfs_numbers(n, -1), dfs_minima(n, -1), stack_indices(n, -1), stack;
    stack.reserve(n);
    int current_dfs_number = 0;
    std::vector<std::vector<int>> sccs;
    for (int i = 0; i < n; ++i) {
        if (dfs_numbers[i] == -1)
            scc_dfs(g, i, dfs_numbers, dfs_minima, stack_indices, stack, current_dfs_number, sccs);
    }
    std::sort(sccs.begin(), sccs.end());
    return sccs;
}

bool strongly_connected(const DirectedGraph& g) {
    return strongly_connected_components(g).size() == 1;
}

bool jointly_strongly_connected(const GraphSchedule& schedule, int window, std::int64_t horizon) {
    if (window < 1) throw std::invalid_argument("jointly_strongly_connected: window must be >= 1");
    if (horizon < window)
        throw std::invalid_argument("jointly_strongly_connected: horizon shorter than window");
    for (std::int64_t r = 0; (r + 1) * window <= horizon; ++r) {
        if (!strongly_connected(union_graph(schedule, r * window, (r + 1) * window))) return false;
    }
    return true;
}

std::vector<int> reachable_from(const DirectedGraph& g, const std::vector<int>& sources) {
    if (sources.empty()) throw std::invalid_argument("reachable_from: empty source set");
    std::vector<char> seen(g.size(), 0);
    std::vector<int> frontier;
    for (int s : sources) {
        if (s < 0 || s >= g.size()) throw std::invalid_argument("reachable_from: source out of range");
        if (!seen[s]) {
            seen[s] = 1;
            frontier.push_back(s);
        }
    }
    while (!frontier.empty()) {
        const int v = frontier.back();
        frontier.pop_back();
        for (int w : g.out_neighbors(v)) {
            if (!seen[w]) {
                seen[w] = 1;
                frontier.push_back(w);
            }
        }
    }
    std::vector<int> result;
    for (int v = 0; v < g.size(); ++v)
        if (seen[v]) result.push_back(v);
    return result;
}

std::vector<std::vector<int>> source_components(const DirectedGraph& g) {
    const auto sccs = strongly_connected_components(g);
    std::vector<int> component_of(g.size(), -1);
    for (std::size_t c = 0; c < sccs.size(); ++c)
        for (int v : sccs[c]) component_of[v] = static_cast<int>(c);
    std::vector<char> has_incoming(sccs.size(), 0);
    for (auto [from, to] : g.edges()) {
        if (component_of[from] != component_of[to]) has_incoming[component_of[to]] = 1;
    }
    std::vector<std::vector<int>> result;
    for (std::size_t c = 0; c < sccs.size(); ++c)
        if (!has_incoming[c]) result.push_back(sccs[c]);
    return result;
}

bool r_reachable(const DirectedGraph& g, const std::vector<int>& node_set, int r) {
    if (node_set.empty()) throw std::invalid_argument("r_reachable: empty node set");
    if (r < 1) throw std::invalid_argument("r_reachable: r must be >= 1");
    std::vector<char> in_set(g.size(), 0);
    for (int v : node_set) {
        if (v < 0 || v >= g.size()) throw std::invalid_argument("r_reachable: node out of range");
        in_set[v] = 1;
    }
    for (int v : node_set) {
        int outside = 0;
        for (int u : g.in_neighbors(v))
            if (!in_set[u]) ++outside;
        if (outside >= r) return true;
    }
    return false;
}

RobustnessResult strongly_r_robust_wrt(const DirectedGraph& g, const std::vector<int>& seed_set, int r) {
    if (seed_set.empty()) throw std::invalid_argument("strongly_r_robust_wrt: empty seed set");
    if (r < 1) throw std::invalid_argument("strongly_r_robust_wrt: r must be >= 1");
    std::vector<char> active(g.size(), 0);
    for (int v : seed_set) {
        if (v < 0 || v >= g.size())
            throw std::invalid_argument("strongly_r_robust_wrt: node out of range");
        active[v] = 1;
    }
    // Batch rounds in ascending node order. The process is monotone, so the
    // fixed point does not depend on this order.
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<int> newly_active;
        for (int v = 0; v < g.size(); ++v) {
            if (active[v]) continue;
            int active_in = 0;
            for (int u : g.in_neighbors(v))
                if (active[u]) ++active_in;
            if (active_in >= r) newly_active.push_back(v);
        }
        for (int v : newly_active) {
            active[v] = 1;
            changed = true;
        }
    }
    RobustnessResult result;
    for (int v = 0; v < g.size(); ++v)
        if (!active[v]) result.witness.push_back(v);
    result.robust = result.witness.empty();
    return result;
}

const char* certify_mode_name(CertifyMode mode) {
    switch (mode) {
        case CertifyMode::MinRuleTimeVarying: return "min_rule_timevarying";
        case CertifyMode::MinRuleStatic: return "min_rule_static";
        case CertifyMode::Lfrhe: return "lfrhe";
    }
    return "unknown";
}

namespace {

std::string join_indices(const std::vector<int>& v) {
    std::ostringstream out;
    out << "{";
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
    out << "}";
    return out.str();
}

}  // namespace

CertificationReport certify(const ObservationModel& model, const GraphSchedule& schedule,
                            const CertifySpec& spec) {
    if (model.agent_count() != schedule.agent_count())
        throw std::invalid_argument("certify: model and schedule agent counts differ");
    if (spec.mode != CertifyMode::MinRuleTimeVarying && !schedule.is_static())
        throw std::invalid_argument("certify: selected mode requires a static schedule");
    if (spec.mode == CertifyMode::Lfrhe && spec.max_faulty < 0)
        throw std::invalid_argument("certify: f must be non-negative");
    if (spec.mode == CertifyMode::MinRuleTimeVarying && spec.window < 1)
        throw std::invalid_argument("certify: window must be >= 1");

    CertificationReport report;
    report.spec = spec;
    report.pass = true;

    if (spec.mode == CertifyMode::MinRuleTimeVarying) {
        std::int64_t horizon = spec.window;
        switch (schedule.kind()) {
            case GraphSchedule::Kind::Static: horizon = spec.window; break;
            case GraphSchedule::Kind::Periodic:
                horizon = std::lcm<std::int64_t>(schedule.sequence_length(), spec.window);
                break;
            case GraphSchedule::Kind::Explicit:
                horizon = schedule.sequence_length();
                report.partial = true;
                report.note = "connectivity certified only up to the schedule's explicit horizon";
                break;
        }
        if (horizon < spec.window) {
            report.connectivity_ok = false;
            report.connectivity_detail = "schedule shorter than one window";
        } else {
            report.connectivity_ok = jointly_strongly_connected(schedule, spec.window, horizon);
            report.connectivity_detail = report.connectivity_ok
                                             ? "every length-" + std::to_string(spec.window) +
                                                   " window union is strongly connected"
                                             : "a window union graph is not strongly connected";
        }
        report.pass = report.connectivity_ok;
    }

    const DirectedGraph& g = schedule.graph_at(0);
    const int m = model.hypothesis_count();
    for (int p = 0; p < m; ++p) {
        for (int q = p + 1; q < m; ++q) {
            PairCertification pair;
            pair.theta_p = p;
            pair.theta_q = q;
            pair.sources = source_set(model, p, q);
            if (pair.sources.empty()) {
                pair.holds = false;
                pair.detail = "empty source set: no agent distinguishes this pair";
            } else {
                switch (spec.mode) {
                    case CertifyMode::MinRuleTimeVarying:
                        pair.holds = true;
                        pair.detail = "source set non-empty";
                        break;
                    case CertifyMode::MinRuleStatic: {
                        const auto reached = reachable_from(g, pair.sources);
                        pair.holds = static_cast<int>(reached.size()) == g.size();
                        if (pair.holds) {
                            pair.detail = "all agents reachable from " + join_indices(pair.sources);
                        } else {
                            for (int v = 0; v < g.size(); ++v)
                                if (!std::binary_search(reached.begin(), reached.end(), v))
                                    pair.witness.push_back(v);
                            pair.detail = "agents " + join_indices(pair.witness) +
                                          " unreachable from the source set";
                        }
                        break;
                    }
                    case CertifyMode::Lfrhe: {
                        const int r = 2 * spec.max_faulty + 1;
                        auto robust = strongly_r_robust_wrt(g, pair.sources, r);
                        pair.holds = robust.robust;
                        if (pair.holds) {
                            pair.detail = "strongly " + std::to_string(r) + "-robust w.r.t. " +
                                          join_indices(pair.sources);
                        } else {
                            pair.witness = std::move(robust.witness);
                            pair.detail = "set " + join_indices(pair.witness) + " is not " +
                                          std::to_string(r) + "-reachable";
                        }
                        break;
                    }
                }
            }
            report.pass = report.pass && pair.holds;
            report.pairs.push_back(std::move(pair));
        }
    }
    return report;
}

}  // namespace dht
