#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "dht/graphs.hpp"
#include "test_support.hpp"

using namespace dht;

TEST_CASE("in_neighbors on the star, an empty graph, and a periodic schedule") {
    const auto star = support::star_graph(5);
    CHECK(star.in_neighbors(2) == std::vector<int>{0});
    CHECK(star.in_neighbors(0) == std::vector<int>{1, 2, 3, 4});

    const DirectedGraph empty(3, {});
    CHECK(empty.in_neighbors(1).empty());

    const DirectedGraph even(2, {{0, 1}});
    const DirectedGraph odd(2, {{1, 0}});
    const auto schedule = GraphSchedule::periodic({even, odd});
    CHECK(in_neighbors(schedule, 0, 5) == std::vector<int>{1});  // t=5 uses the odd graph
    CHECK(in_neighbors(schedule, 0, 4).empty());
}

TEST_CASE("self-loops are implicit and never stored") {
    const DirectedGraph g(3, {{0, 0}, {0, 1}, {1, 1}});
    CHECK(g.edges() == std::vector<std::pair<int, int>>{{0, 1}});
    CHECK(g.in_neighbors(1) == std::vector<int>{0});
}

TEST_CASE("strongly_connected") {
    CHECK(strongly_connected(DirectedGraph(1, {})));
    CHECK(strongly_connected(support::three_layer_graph()));
    CHECK_FALSE(strongly_connected(DirectedGraph(3, {{0, 1}, {1, 2}})));
    CHECK(strongly_connected(DirectedGraph(3, {{0, 1}, {1, 2}, {2, 0}})));
}

TEST_CASE("jointly_strongly_connected") {
    const auto static_ring = GraphSchedule::static_graph(DirectedGraph(3, {{0, 1}, {1, 2}, {2, 0}}));
    CHECK(jointly_strongly_connected(static_ring, 1, 1));

    const DirectedGraph forward(2, {{0, 1}});
    const DirectedGraph backward(2, {{1, 0}});
    const auto alternating = GraphSchedule::periodic({forward, backward});
    CHECK(jointly_strongly_connected(alternating, 2, 4));
    CHECK_FALSE(jointly_strongly_connected(alternating, 1, 2));

    // An agent with no incident edge ever: no window can be strongly connected.
    const DirectedGraph partial(3, {{0, 1}, {1, 0}});
    const auto isolated = GraphSchedule::periodic({partial});
    CHECK_FALSE(jointly_strongly_connected(isolated, 1, 4));
    CHECK_FALSE(jointly_strongly_connected(isolated, 4, 8));

    CHECK_THROWS_AS(jointly_strongly_connected(alternating, 4, 2), std::invalid_argument);
}

TEST_CASE("reachable_from") {
    const auto complete = DirectedGraph::undirected(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    CHECK(reachable_from(complete, {0}) == std::vector<int>{0, 1, 2, 3});

    const DirectedGraph chain(3, {{0, 1}, {1, 2}});
    CHECK(reachable_from(chain, {1}) == std::vector<int>{1, 2});

    const auto star = support::star_graph(5);
    CHECK(reachable_from(star, {0}) == std::vector<int>{0, 1, 2, 3, 4});
    CHECK_THROWS_AS(reachable_from(star, {}), std::invalid_argument);
}

TEST_CASE("source_components") {
    CHECK(source_components(support::three_layer_graph()).size() == 1);
    CHECK(source_components(support::three_layer_graph())[0].size() == 9);

    const DirectedGraph chain(3, {{0, 1}, {1, 2}});
    CHECK(source_components(chain) == std::vector<std::vector<int>>{{0}});

    const DirectedGraph two_cycles(4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}});
    CHECK(source_components(two_cycles) == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
}

TEST_CASE("r_reachable") {
    const auto star = support::star_graph(5);
    CHECK_FALSE(r_reachable(star, {1}, 3));  // a leaf has one in-neighbor
    CHECK(r_reachable(star, {1}, 1));

    std::vector<std::pair<int, int>> complete_edges;
    for (int i = 0; i < 9; ++i)
        for (int j = i + 1; j < 9; ++j) complete_edges.emplace_back(i, j);
    const auto complete9 = DirectedGraph::undirected(9, complete_edges);
    CHECK(r_reachable(complete9, {4}, 3));

    const auto layered = support::three_layer_graph();
    CHECK(r_reachable(layered, {6, 7, 8}, 3));  // each has in-neighbors {3,4,5} outside
    CHECK_THROWS_AS(r_reachable(layered, {}, 1), std::invalid_argument);
}

TEST_CASE("strongly_r_robust_wrt on the benchmark graphs") {
    const auto layered = support::three_layer_graph();
    CHECK(strongly_r_robust_wrt(layered, {0, 1, 2}, 3).robust);
    CHECK(strongly_r_robust_wrt(layered, {3, 4, 5, 6, 7, 8}, 3).robust);

    const auto star = support::star_graph(5);
    const auto result = strongly_r_robust_wrt(star, {0}, 3);
    CHECK_FALSE(result.robust);
    CHECK(std::count(result.witness.begin(), result.witness.end(), 1) == 1);

    // Seeding everything is vacuously robust for any r.
    CHECK(strongly_r_robust_wrt(star, {0, 1, 2, 3, 4}, 7).robust);
}

TEST_CASE("percolation checker agrees with the exhaustive subset oracle") {
    std::mt19937 rng(17);
    std::uniform_int_distribution<int> size_dist(2, 9);
    std::uniform_int_distribution<int> r_dist(1, 4);
    std::uniform_real_distribution<double> density(0.1, 0.7);
    for (int trial = 0; trial < 150; ++trial) {
        const int n = size_dist(rng);
        const auto g = support::random_digraph(rng, n, density(rng));
        std::vector<int> seeds;
        std::uniform_int_distribution<int> node(0, n - 1);
        const int seed_count = 1 + node(rng) % n;
        for (int k = 0; k < seed_count; ++k) seeds.push_back(node(rng));
        std::sort(seeds.begin(), seeds.end());
        seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
        const int r = r_dist(rng);
        CHECK(strongly_r_robust_wrt(g, seeds, r).robust == support::oracle_strongly_r_robust(g, seeds, r));
    }
}

TEST_CASE("robustness is monotone in r") {
    std::mt19937 rng(19);
    for (int trial = 0; trial < 60; ++trial) {
        const auto g = support::random_digraph(rng, 8, 0.4);
        std::uniform_int_distribution<int> node(0, 7);
        std::vector<int> seeds = {node(rng), node(rng)};
        std::sort(seeds.begin(), seeds.end());
        seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
        for (int r = 4; r >= 2; --r) {
            if (strongly_r_robust_wrt(g, seeds, r).robust)
                CHECK(strongly_r_robust_wrt(g, seeds, r - 1).robust);
        }
    }
}

TEST_CASE("robustness with a proper complement needs a seed set of size >= r") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 80; ++trial) {
        const auto g = support::random_digraph(rng, 9, 0.5);
        std::uniform_int_distribution<int> node(0, 8);
        std::vector<int> seeds;
        for (int k = 0; k < 1 + node(rng) % 6; ++k) seeds.push_back(node(rng));
        std::sort(seeds.begin(), seeds.end());
        seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
        const int r = 3;
        if (static_cast<int>(seeds.size()) < g.size() && strongly_r_robust_wrt(g, seeds, r).robust)
            CHECK(static_cast<int>(seeds.size()) >= r);
    }
}

TEST_CASE("full reachability coincides with strong 1-robustness") {
    std::mt19937 rng(29);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 8);
        const auto g = support::random_digraph(rng, n, 0.25);
        std::uniform_int_distribution<int> node(0, n - 1);
        std::vector<int> seeds = {node(rng)};
        const bool covers = static_cast<int>(reachable_from(g, seeds).size()) == n;
        CHECK(covers == strongly_r_robust_wrt(g, seeds, 1).robust);
    }
}

TEST_CASE("percolation result is independent of processing order") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 6);
        const auto g = support::random_digraph(rng, n, 0.4);
        std::vector<int> seeds = {static_cast<int>(rng() % n)};
        const int r = 1 + static_cast<int>(rng() % 3);
        const auto reference = strongly_r_robust_wrt(g, seeds, r);

        // Sequential activation in a shuffled order must reach the same fixed point.
        std::vector<char> active(n, 0);
        for (int v : seeds) active[v] = 1;
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        bool changed = true;
        while (changed) {
            changed = false;
            std::shuffle(order.begin(), order.end(), rng);
            for (int v : order) {
                if (active[v]) continue;
                int count = 0;
                for (int u : g.in_neighbors(v))
                    if (active[u]) ++count;
                if (count >= r) {
                    active[v] = 1;
                    changed = true;
                }
            }
        }
        std::vector<int> inactive;
        for (int v = 0; v < n; ++v)
            if (!active[v]) inactive.push_back(v);
        CHECK(inactive == reference.witness);
    }
}

TEST_CASE("certify: static min rule on the informative star") {
    const auto model = support::informative_star_model(5);
    const auto schedule = GraphSchedule::static_graph(support::star_graph(5));
    const auto report = certify(model, schedule, {CertifyMode::MinRuleStatic, 1, 0});
    CHECK(report.pass);
    REQUIRE(report.pairs.size() == 1);
    CHECK(report.pairs[0].sources == std::vector<int>{0});
}

TEST_CASE("certify: trimming rule on the three-layer benchmark") {
    const auto model = support::three_group_model(0);
    const auto schedule = GraphSchedule::static_graph(support::three_layer_graph());
    const auto report = certify(model, schedule, {CertifyMode::Lfrhe, 1, 1});
    CHECK(report.pass);
    CHECK(report.pairs.size() == 3);
    for (const auto& pair : report.pairs) CHECK(pair.holds);
}

TEST_CASE("certify: deleting the only informative group breaks a pair") {
    // Bottom two layers only: nobody distinguishes the first two hypotheses.
    ObservationModel model = support::three_group_model(0);
    model.agents.erase(model.agents.begin(), model.agents.begin() + 3);
    model.validate_and_normalize();
    std::vector<std::pair<int, int>> edges;
    for (int mid = 0; mid < 3; ++mid)
        for (int bottom = 3; bottom < 6; ++bottom) edges.emplace_back(mid, bottom);
    const auto schedule = GraphSchedule::static_graph(DirectedGraph::undirected(6, edges));
    const auto report = certify(model, schedule, {CertifyMode::Lfrhe, 1, 1});
    CHECK_FALSE(report.pass);
    CHECK_FALSE(report.pairs[0].holds);  // pair (theta1, theta2)
    CHECK(report.pairs[0].sources.empty());
    CHECK(report.pairs[0].detail.find("empty source set") != std::string::npos);
}

TEST_CASE("certify: star is not 3-robust w.r.t. its hub") {
    const auto model = support::informative_star_model(5);
    const auto schedule = GraphSchedule::static_graph(support::star_graph(5));
    const auto report = certify(model, schedule, {CertifyMode::Lfrhe, 1, 1});
    CHECK_FALSE(report.pass);
    REQUIRE_FALSE(report.pairs[0].witness.empty());
    CHECK(std::count(report.pairs[0].witness.begin(), report.pairs[0].witness.end(), 1) == 1);
}

TEST_CASE("certify: time-varying mode checks joint connectivity") {
    const auto model = support::informative_star_model(2);
    const DirectedGraph forward(2, {{0, 1}});
    const DirectedGraph backward(2, {{1, 0}});
    const auto alternating = GraphSchedule::periodic({forward, backward});
    const auto pass = certify(model, alternating, {CertifyMode::MinRuleTimeVarying, 2, 0});
    CHECK(pass.pass);
    const auto fail = certify(model, alternating, {CertifyMode::MinRuleTimeVarying, 1, 0});
    CHECK_FALSE(fail.pass);
    CHECK_FALSE(fail.connectivity_ok);

    CHECK_THROWS_AS(certify(model, alternating, {CertifyMode::MinRuleStatic, 1, 0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(certify(model, alternating, {CertifyMode::Lfrhe, 1, 1}), std::invalid_argument);
}

TEST_CASE("certify: explicit schedules are certified only up to their horizon") {
    const auto model = support::informative_star_model(2);
    const DirectedGraph both = DirectedGraph::undirected(2, {{0, 1}});
    const auto explicit_schedule = GraphSchedule::explicit_list({both, both, both});
    const auto report = certify(model, explicit_schedule, {CertifyMode::MinRuleTimeVarying, 1, 0});
    CHECK(report.pass);
    CHECK(report.partial);
    CHECK_FALSE(report.note.empty());
}
