#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dht/model.hpp"

namespace dht {

// Directed graph over agents 0..n-1. Edge (i, j) means i transmits to j.
// Self-loops are implicit everywhere (every agent hears itself), so they are
// never stored and neighbor queries exclude the node itself.
class DirectedGraph {
public:
    DirectedGraph() = default;
    DirectedGraph(int n, std::vector<std::pair<int, int>> edge_list);

    // Builds the symmetric closure of the given edges.
    static DirectedGraph undirected(int n, const std::vector<std::pair<int, int>>& edge_list);

    int size() const { return n_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& in_neighbors(int i) const;
    const std::vector<int>& out_neighbors(int i) const;
    bool has_edge(int from, int to) const;
    bool is_symmetric() const;
    // Degree in the undirected sense; only meaningful on symmetric graphs.
    int degree(int i) const { return static_cast<int>(out_adj_[i].size()); }

private:
    int n_ = 0;
    std::vector<std::pair<int, int>> edges_;  // sorted, deduplicated, no self-loops
    std::vector<std::vector<int>> in_adj_;
    std::vector<std::vector<int>> out_adj_;
};

// Time-indexed graph sequence: a fixed graph, a repeating block, or an
// explicit prefix that holds its last graph forever after.
class GraphSchedule {
public:
    enum class Kind { Static, Periodic, Explicit };

    static GraphSchedule static_graph(DirectedGraph g);
    static GraphSchedule periodic(std::vector<DirectedGraph> sequence);
    static GraphSchedule explicit_list(std::vector<DirectedGraph> sequence);

    Kind kind() const { return kind_; }
    bool is_static() const { return kind_ == Kind::Static; }
    int agent_count() const { return sequence_.front().size(); }
    std::int64_t sequence_length() const { return static_cast<std::int64_t>(sequence_.size()); }
    const DirectedGraph& graph_at(std::int64_t t) const;

private:
    GraphSchedule(Kind kind, std::vector<DirectedGraph> sequence);
    Kind kind_ = Kind::Static;
    std::vector<DirectedGraph> sequence_;
};

std::vector<int> in_neighbors(const GraphSchedule& schedule, int i, std::int64_t t);

// Union of edge sets over the half-open time interval [t_begin, t_end).
DirectedGraph union_graph(const GraphSchedule& schedule, std::int64_t t_begin, std::int64_t t_end);

std::vector<std::vector<int>> strongly_connected_components(const DirectedGraph& g);
bool strongly_connected(const DirectedGraph& g);

// True iff the union graph over every window [rT, (r+1)T) with (r+1)T <=
// horizon is strongly connected.
bool jointly_strongly_connected(const GraphSchedule& schedule, int window, std::int64_t horizon);

// Nodes with a directed path from some source; sources are included.
std::vector<int> reachable_from(const DirectedGraph& g, const std::vector<int>& sources);

// Strongly connected components whose condensation node has no incoming edge.
std::vector<std::vector<int>> source_components(const DirectedGraph& g);

// True iff some node of `node_set` has at least r in-neighbors outside it.
bool r_reachable(const DirectedGraph& g, const std::vector<int>& node_set, int r);

struct RobustnessResult {
    bool robust = false;
    // On failure: the nodes never activated by percolation. This set is
    // itself a counterexample (no member has r in-neighbors outside it).
    std::vector<int> witness;
};

// Bootstrap-percolation check of strong r-robustness w.r.t. seed set S:
// activate S, then repeatedly activate any node with >= r active in-neighbors;
// robust iff everything activates.
RobustnessResult strongly_r_robust_wrt(const DirectedGraph& g, const std::vector<int>& seed_set, int r);

enum class CertifyMode { MinRuleTimeVarying, MinRuleStatic, Lfrhe };

struct CertifySpec {
    CertifyMode mode = CertifyMode::MinRuleStatic;
    int window = 1;      // T, for MinRuleTimeVarying
    int max_faulty = 0;  // f, for Lfrhe
};

struct PairCertification {
    int theta_p = 0;
    int theta_q = 0;
    std::vector<int> sources;
    bool holds = false;
    std::string detail;
    std::vector<int> witness;
};

struct CertificationReport {
    CertifySpec spec;
    bool pass = false;
    bool connectivity_ok = true;      // MinRuleTimeVarying only
    std::string connectivity_detail;  // ditto
    bool partial = false;             // explicit schedules: checked up to a finite horizon
    std::string note;
    std::vector<PairCertification> pairs;
};

// Checks, per hypothesis pair, the structural condition required by the
// selected rule: non-empty source sets plus joint strong connectivity
// (time-varying min rule), reachability of everyone from each source set
// (static min rule), or strong (2f+1)-robustness w.r.t. each source set
// (trimming rule). Static modes require a static schedule.
CertificationReport certify(const ObservationModel& model, const GraphSchedule& schedule, const CertifySpec& spec);

const char* certify_mode_name(CertifyMode mode);

}  // namespace dht
