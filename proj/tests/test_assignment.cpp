#include <catch2/catch_amalgamated.hpp>

#include "lasermot/assignment.hpp"
#include "lasermot/synth.hpp"
#include "support/oracles.hpp"

using namespace lasermot;

TEST_CASE("assignment basics") {
    CHECK(solve_assignment({}).pairs.empty());

    const Matching one = solve_assignment({{1.0}});
    REQUIRE(one.pairs.size() == 1);
    CHECK(one.pairs[0] == std::pair<int, int>{0, 0});
    CHECK(one.total_cost == 1.0);

    const Matching forbidden = solve_assignment({{kForbidden}});
    CHECK(forbidden.pairs.empty());
    CHECK(forbidden.unmatched_rows == std::vector<int>{0});
    CHECK(forbidden.unmatched_cols == std::vector<int>{0});
}

TEST_CASE("assignment prefers cardinality over cheap partial matchings") {
    // Row 0 can take either column, row 1 only column 0: both must match.
    const Matching m = solve_assignment({{0.1, 100.0}, {0.2, kForbidden}});
    REQUIRE(m.pairs.size() == 2);
    CHECK(m.pairs[0] == std::pair<int, int>{0, 1});
    CHECK(m.pairs[1] == std::pair<int, int>{1, 0});
    CHECK(m.total_cost == 100.2);
}

TEST_CASE("assignment matches the exhaustive oracle on random gated instances") {
    synth::SplitMix64 rng(201);
    for (int trial = 0; trial < 1000; ++trial) {
        const int nr = 1 + static_cast<int>(rng.next() % 5);
        const int nc = static_cast<int>(rng.next() % 6);
        std::vector<std::vector<double>> cost(static_cast<size_t>(nr),
                                              std::vector<double>(static_cast<size_t>(nc)));
        for (auto& row : cost)
            for (auto& c : row) c = rng.uniform() < 0.25 ? kForbidden : rng.uniform(0.0, 1000.0);

        const Matching got = solve_assignment(cost);
        const auto want = oracle::brute_force_matching(cost);
        CHECK(static_cast<int>(got.pairs.size()) == want.cardinality);
        CHECK(got.total_cost == want.total_cost);
        CHECK(got.pairs.size() + got.unmatched_rows.size() == static_cast<size_t>(nr));
        CHECK(got.pairs.size() + got.unmatched_cols.size() == static_cast<size_t>(nc));
    }
}

TEST_CASE("assignment is deterministic") {
    synth::SplitMix64 rng(202);
    std::vector<std::vector<double>> cost(4, std::vector<double>(4));
    for (auto& row : cost)
        for (auto& c : row) c = rng.uniform(0.0, 10.0);
    const Matching a = solve_assignment(cost);
    const Matching b = solve_assignment(cost);
    CHECK(a.pairs == b.pairs);

    // Fully tied costs resolve to the lowest-index pairing.
    const Matching tied = solve_assignment({{1.0, 1.0}, {1.0, 1.0}});
    REQUIRE(tied.pairs.size() == 2);
    CHECK(tied.pairs[0] == std::pair<int, int>{0, 0});
    CHECK(tied.pairs[1] == std::pair<int, int>{1, 1});
}

TEST_CASE("assignment rejects ragged matrices") {
    CHECK_THROWS_AS(solve_assignment({{1.0, 2.0}, {1.0}}), contract_error);
}
