#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "alertlab/common.hpp"
#include "alertlab/hyperopt.hpp"

using namespace alertlab;

namespace {

Grid toy_grid() {
    Grid g;
    g.n = {10};
    g.t = {kDay};
    g.hidden_nodes = {32};
    g.delta = {0.0, 0.1};
    g.tau_confidence = {0.05, 0.5};
    g.epsilon = {0.3};
    g.min_cluster_size = {5};
    return g;
}

// Deterministic, hyperparameter-dependent score.
double score(const Hyperparameters& hp) {
    return std::sin(3.0 * hp.delta + 7.0 * hp.tau_confidence + 11.0 * hp.epsilon + 0.01 * static_cast<double>(hp.n) +
                    0.001 * static_cast<double>(hp.min_cluster_size) + 1e-4 * static_cast<double>(hp.hidden_nodes) +
                    1e-7 * static_cast<double>(hp.t));
}

}  // namespace

TEST_CASE("standard grid cardinality follows the table") {
    const auto g = Grid::standard();
    CHECK(g.delta.size() == 21);
    CHECK(g.tau_confidence.size() == 20);
    CHECK(g.epsilon.size() == 20);
    CHECK(g.t == std::vector<std::int64_t>{86400, 604800, 2592000});
    CHECK(grid_cardinality(g) == 907200);
    CHECK(g.delta.front() == 0.0);
    CHECK(g.delta.back() == doctest::Approx(1.0));
    CHECK(g.tau_confidence.front() == doctest::Approx(0.05));
}

TEST_CASE("grid indexing visits every point once") {
    const auto g = toy_grid();
    std::set<std::pair<double, double>> seen;
    for (std::uint64_t i = 0; i < grid_cardinality(g); ++i) {
        const auto hp = g.at(i);
        seen.insert({hp.delta, hp.tau_confidence});
    }
    CHECK(seen.size() == 4);
    CHECK_THROWS(g.at(4));
}

TEST_CASE("sampling without replacement") {
    const auto s = sample_without_replacement(1000, 200, 5);
    CHECK(s.size() == 200);
    CHECK(std::set<std::uint64_t>(s.begin(), s.end()).size() == 200);
    for (auto x : s) CHECK(x < 1000);
    const auto longer = sample_without_replacement(1000, 300, 5);
    CHECK(std::vector<std::uint64_t>(longer.begin(), longer.begin() + 200) == s);
    CHECK(sample_without_replacement(10, 50, 1).size() == 10);
    const auto huge = sample_without_replacement(grid_cardinality(Grid::standard()), 500, 3);
    CHECK(std::set<std::uint64_t>(huge.begin(), huge.end()).size() == 500);
}

TEST_CASE("a budget of one returns that point") {
    const auto g = Grid::standard();
    SearchBudget b{1, 9};
    const auto r = random_search(g, b, score);
    REQUIRE(r.trials.size() == 1);
    CHECK(r.best == r.trials[0].hp);
    CHECK(r.best == g.at(sample_without_replacement(grid_cardinality(g), 1, 9)[0]));
}

TEST_CASE("exhaustive budget on a toy grid finds the brute-force argmax") {
    const auto g = toy_grid();
    double best = -2.0;
    Hyperparameters arg;
    for (std::uint64_t i = 0; i < 4; ++i) {
        if (score(g.at(i)) > best) {
            best = score(g.at(i));
            arg = g.at(i);
        }
    }
    const auto r = random_search(g, {10, 3}, score);
    CHECK(r.trials.size() == 4);
    CHECK(r.best == arg);
    CHECK(r.best_score == best);
}

TEST_CASE("search properties") {
    const auto g = Grid::standard();
    SUBCASE("no point is evaluated twice") {
        const auto r = random_search(g, {300, 4}, score);
        std::set<std::uint64_t> idx;
        for (const auto& t : r.trials) idx.insert(t.grid_index);
        CHECK(idx.size() == r.trials.size());
    }
    SUBCASE("deterministic and independent of thread count") {
        const auto a = random_search(g, {64, 2}, score, 1);
        const auto b = random_search(g, {64, 2}, score, 4);
        REQUIRE(a.trials.size() == b.trials.size());
        for (std::size_t i = 0; i < a.trials.size(); ++i) CHECK(a.trials[i].grid_index == b.trials[i].grid_index);
        CHECK(a.best == b.best);
        CHECK(a.best_trial == b.best_trial);
    }
    SUBCASE("larger budgets never lower the best score") {
        double last = -2.0;
        for (std::size_t k : {1, 2, 5, 10, 50, 100, 200}) {
            const auto r = random_search(g, {k, 8}, score);
            CHECK(r.best_score >= last);
            last = r.best_score;
        }
    }
    SUBCASE("the winner reproduces its score") {
        const auto r = random_search(g, {50, 6}, score);
        CHECK(score(r.best) == r.best_score);
    }
    SUBCASE("ties go to the earliest trial") {
        const auto r = random_search(g, {20, 6}, [](const Hyperparameters&) { return 0.5; });
        CHECK(r.best_trial == 0);
    }
}

TEST_CASE("failed trials are logged and skipped") {
    const auto g = toy_grid();
    auto eval = [](const Hyperparameters& hp) -> double {
        if (hp.delta == 0.0) throw ComputeError("boom");
        return hp.tau_confidence;
    };
    const auto r = random_search(g, {4, 1}, eval);
    std::size_t failed = 0;
    for (const auto& t : r.trials) failed += !t.ok;
    CHECK(failed == 2);
    CHECK(r.best.delta == doctest::Approx(0.1));
    CHECK(r.best_score == 0.5);
    std::ostringstream log;
    write_trial_log(log, r);
    CHECK(log.str().rfind("# schema: alertlab.trials/1\n", 0) == 0);
    CHECK(log.str().find(",failed\n") != std::string::npos);

    CHECK_THROWS_AS(random_search(g, {4, 1}, [](const Hyperparameters&) -> double { throw ComputeError("x"); }),
                    ComputeError);
}

TEST_CASE("best-params round trip") {
    Hyperparameters hp;
    hp.n = 15;
    hp.t = kWeek;
    hp.hidden_nodes = 128;
    hp.delta = 0.35;
    hp.tau_confidence = 0.05;
    hp.epsilon = 0.8;
    hp.min_cluster_size = 20;
    std::stringstream io;
    write_best_params(io, hp, "unfiltered", 0.5);
    CHECK(io.str().rfind("# schema: alertlab.best_params/1\n", 0) == 0);
    CHECK(parse_best_params(io) == hp);
    std::istringstream bad("n: banana\n");
    CHECK_THROWS(parse_best_params(bad));
}
