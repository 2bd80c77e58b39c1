#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "alertlab/hyperparameters.hpp"

namespace alertlab {

// Candidate values per hyperparameter; points are enumerated in mixed radix.
struct Grid {
    std::vector<std::size_t> n;
    std::vector<std::int64_t> t;
    std::vector<std::size_t> hidden_nodes;
    std::vector<double> delta;
    std::vector<double> tau_confidence;
    std::vector<double> epsilon;
    std::vector<std::size_t> min_cluster_size;

    // n {10,15,20}, t {day, week, month}, hidden {32,64,128}, delta 0..1,
    // tau and epsilon 0.05..1 (steps of 0.05), min cluster size {5,10,20,50}.
    static Grid standard();

    void validate() const;
    Hyperparameters at(std::uint64_t index) const;
};

std::uint64_t grid_cardinality(const Grid& g);

struct SearchBudget {
    std::size_t max_trials = 200;
    std::uint64_t seed = 1;
};

// First `count` entries of a seeded uniform permutation of [0, cardinality).
// A larger count extends the same prefix.
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t cardinality, std::size_t count, std::uint64_t seed);

struct Trial {
    std::size_t trial = 0;
    std::uint64_t grid_index = 0;
    Hyperparameters hp;
    double macro_f1 = 0.0;
    bool ok = false;
    std::string error;
};

struct SearchResult {
    Hyperparameters best;
    double best_score = 0.0;
    std::size_t best_trial = 0;
    std::vector<Trial> trials;
};

using TrialEvaluator = std::function<double(const Hyperparameters&)>;

// Evaluates distinct grid points; the best macro F1 wins, ties go to the
// earliest trial. Failed trials are logged and skipped. `threads` > 1 runs
// trials concurrently (the evaluator must then be thread-safe).
SearchResult random_search(const Grid& g, const SearchBudget& b, const TrialEvaluator& eval, std::size_t threads = 1);

void write_trial_log(std::ostream& out, const SearchResult& r);
void write_best_params(std::ostream& out, const Hyperparameters& hp, const std::string& dataset, double macro_f1);
Hyperparameters parse_best_params(std::istream& in);

}  // namespace alertlab
