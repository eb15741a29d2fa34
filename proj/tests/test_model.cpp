#include <doctest.h>

#include <cmath>
#include <random>

#include "dht/errors.hpp"
#include "dht/model.hpp"
#include "test_support.hpp"

using namespace dht;

TEST_CASE("kl_divergence is zero on identical rows") {
    const std::vector<double> p = {0.5, 0.5};
    CHECK(kl_divergence(p, p) == 0.0);
    const std::vector<double> r = {0.2, 0.3, 0.5};
    CHECK(kl_divergence(r, r) == 0.0);
}

TEST_CASE("kl_divergence matches hand-derived values") {
    const std::vector<double> half = {0.5, 0.5};
    const std::vector<double> biased = {0.7, 0.3};
    // Frozen from the independent oracle.
    const double forward = support::oracle_kl(half, biased);
    const double backward = support::oracle_kl(biased, half);
    CHECK(forward == doctest::Approx(0.08717669357238891).epsilon(1e-12));
    CHECK(backward == doctest::Approx(0.08228287850505018).epsilon(1e-12));
    CHECK(kl_divergence(half, biased) == doctest::Approx(forward).epsilon(1e-12));
    CHECK(kl_divergence(biased, half) == doctest::Approx(backward).epsilon(1e-12));
}

TEST_CASE("kl_divergence rejects malformed inputs") {
    CHECK_THROWS_AS(kl_divergence(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0}),
                    ModelError);
    CHECK_THROWS_AS(kl_divergence(std::vector<double>{1.0, 0.0}, std::vector<double>{0.5, 0.5}),
                    ModelError);
    CHECK_THROWS_AS(kl_divergence(std::vector<double>{0.5, 0.6}, std::vector<double>{0.5, 0.5}),
                    ModelError);
}

TEST_CASE("source_set identifies the informative agent") {
    const auto model = support::informative_star_model(5);
    CHECK(source_set(model, 0, 1) == std::vector<int>{0});
    CHECK(source_set(model, 1, 0) == std::vector<int>{0});
    CHECK_THROWS_AS(source_set(model, 1, 1), std::invalid_argument);
}

TEST_CASE("source_set is empty when no agent distinguishes the pair") {
    ObservationModel model;
    model.hypotheses.names = {"a", "b"};
    model.hypotheses.true_index = 0;
    AgentLikelihood uniform;
    uniform.signal_names = {"w1", "w2"};
    uniform.table = {{0.5, 0.5}, {0.5, 0.5}};
    model.agents = {uniform, uniform, uniform};
    model.validate_and_normalize();
    CHECK(source_set(model, 0, 1).empty());
}

TEST_CASE("source_set on the three-group model") {
    const auto model = support::three_group_model(0);
    CHECK(source_set(model, 1, 2) == std::vector<int>{3, 4, 5, 6, 7, 8});
    CHECK(source_set(model, 0, 1) == std::vector<int>{0, 1, 2});
    CHECK(source_set(model, 0, 2) == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8});
}

TEST_CASE("globally_identifiable") {
    const auto three_group = support::three_group_model(0);
    CHECK(globally_identifiable(three_group, {0, 1, 2, 3, 4, 5, 6, 7, 8}));
    CHECK_FALSE(globally_identifiable(three_group, {0, 1, 2}));  // cannot split theta2/theta3
    const auto star = support::informative_star_model(5);
    CHECK_FALSE(globally_identifiable(star, {1}));
    CHECK(globally_identifiable(star, {0}));
    CHECK_THROWS_AS(globally_identifiable(star, {}), std::invalid_argument);
}

TEST_CASE("log_ratio_bound") {
    ObservationModel uniform_model;
    uniform_model.hypotheses.names = {"a", "b"};
    uniform_model.hypotheses.true_index = 0;
    AgentLikelihood uniform;
    uniform.signal_names = {"w1", "w2"};
    uniform.table = {{0.5, 0.5}, {0.5, 0.5}};
    uniform_model.agents = {uniform};
    uniform_model.validate_and_normalize();
    CHECK(log_ratio_bound(uniform_model) == 0.0);

    // Extremes frozen from exhaustive scans of the two benchmark tables.
    CHECK(log_ratio_bound(support::three_group_model(0)) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(log_ratio_bound(support::informative_star_model(5)) ==
          doctest::Approx(std::log(0.5 / 0.3)).epsilon(1e-12));
}

TEST_CASE("log_ratio_bound dominates every pairwise log ratio") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        ObservationModel model;
        model.hypotheses.names = {"a", "b", "c"};
        model.hypotheses.true_index = 0;
        for (int i = 0; i < 4; ++i) {
            AgentLikelihood agent;
            agent.signal_names = {"w1", "w2", "w3"};
            for (int p = 0; p < 3; ++p) agent.table.push_back(support::random_row(rng, 3));
            model.agents.push_back(std::move(agent));
        }
        model.validate_and_normalize();
        const double bound = log_ratio_bound(model);
        for (const auto& agent : model.agents)
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q)
                    for (int w = 0; w < 3; ++w)
                        CHECK(std::abs(std::log(agent.table[p][w] / agent.table[q][w])) <=
                              bound + 1e-15);
    }
}

TEST_CASE("kl properties: non-negative, zero iff equal, source symmetry") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = support::random_row(rng, 4);
        const auto q = support::random_row(rng, 4);
        const double d = kl_divergence(p, q);
        CHECK(d >= 0.0);
        CHECK(kl_divergence(p, p) == 0.0);
        if (p != q) CHECK(d > 0.0);
        // Positivity in one direction implies it in the other.
        CHECK((d > kZeroKlTol) == (kl_divergence(q, p) > kZeroKlTol));
    }
}

TEST_CASE("source_set symmetry on random models") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        ObservationModel model;
        model.hypotheses.names = {"a", "b", "c"};
        model.hypotheses.true_index = 0;
        std::bernoulli_distribution informative(0.5);
        for (int i = 0; i < 5; ++i) {
            AgentLikelihood agent;
            agent.signal_names = {"w1", "w2"};
            const auto base = support::random_row(rng, 2);
            for (int p = 0; p < 3; ++p)
                agent.table.push_back(informative(rng) ? support::random_row(rng, 2) : base);
            model.agents.push_back(std::move(agent));
        }
        model.validate_and_normalize();
        for (int p = 0; p < 3; ++p)
            for (int q = p + 1; q < 3; ++q)
                CHECK(source_set(model, p, q) == source_set(model, q, p));
    }
}

TEST_CASE("sample_from_row handles degenerate rows") {
    const std::vector<double> degenerate = {1.0, 0.0, 0.0};
    RngStream stream = RngStream::derive(99, {1, 0});
    for (int k = 0; k < 100; ++k) CHECK(sample_from_row(degenerate, stream.next_double()) == 0);
}

TEST_CASE("sample_signals is deterministic in the stream state") {
    const auto model = support::informative_star_model(5);
    RngStream a = RngStream::derive(42, {kRngPurposeSignals});
    RngStream b = RngStream::derive(42, {kRngPurposeSignals});
    for (int t = 0; t < 50; ++t) CHECK(sample_signals(model, a) == sample_signals(model, b));
    RngStream c = RngStream::derive(43, {kRngPurposeSignals});
    bool any_difference = false;
    RngStream a2 = RngStream::derive(42, {kRngPurposeSignals});
    for (int t = 0; t < 50 && !any_difference; ++t)
        any_difference = sample_signals(model, a2) != sample_signals(model, c);
    CHECK(any_difference);
}

TEST_CASE("sample_signals empirical frequencies match the row") {
    ObservationModel model;
    model.hypotheses.names = {"a", "b"};
    model.hypotheses.true_index = 0;
    AgentLikelihood agent;
    agent.signal_names = {"w1", "w2"};
    agent.table = {{0.7, 0.3}, {0.5, 0.5}};
    model.agents = {agent};
    model.validate_and_normalize();

    RngStream stream = RngStream::derive(2024, {kRngPurposeSignals, 0});
    const int draws = 100000;
    int first = 0;
    for (int k = 0; k < draws; ++k)
        if (sample_signals(model, stream)[0] == 0) ++first;
    const double frequency = static_cast<double>(first) / draws;
    CHECK(frequency == doctest::Approx(0.7).epsilon(0.015));
    CHECK(std::abs(frequency - 0.7) < 0.01);
}

TEST_CASE("model validation rejects bad rows and renormalizes near-misses") {
    ObservationModel model;
    model.hypotheses.names = {"a", "b"};
    model.hypotheses.true_index = 0;
    AgentLikelihood agent;
    agent.signal_names = {"w1", "w2"};
    agent.table = {{0.5, 0.5 + 5e-10}, {0.5, 0.5}};
    model.agents = {agent};
    model.validate_and_normalize();  // within tolerance: renormalized
    const double sum = model.agents[0].table[0][0] + model.agents[0].table[0][1];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));

    ObservationModel bad = model;
    bad.agents[0].table = {{0.5, 0.5 + 2e-9}, {0.5, 0.5}};
    CHECK_THROWS_AS(bad.validate_and_normalize(), ModelError);

    ObservationModel negative = model;
    negative.agents[0].table = {{1.5, -0.5}, {0.5, 0.5}};
    CHECK_THROWS_AS(negative.validate_and_normalize(), ModelError);

    ObservationModel duplicate = model;
    duplicate.hypotheses.names = {"a", "a"};
    CHECK_THROWS_AS(duplicate.validate_and_normalize(), ModelError);
}
