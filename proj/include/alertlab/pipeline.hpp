#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "alertlab/context_builder.hpp"
#include "alertlab/dataset_lab.hpp"
#include "alertlab/hyperopt.hpp"
#include "alertlab/hyperparameters.hpp"
#include "alertlab/interpreter.hpp"
#include "alertlab/metrics.hpp"

namespace alertlab {

struct RunConfig {
    Hyperparameters hp;
    TrainConfig train;  // delta is taken from hp
    double hyperopt_frac = 0.01;
    double train_frac = 0.20;
    double balance_tolerance = 0.05;
    std::vector<std::size_t> explain_ids;  // test sequence ids whose explanations are kept
};

struct RunResult {
    ConfusionMatrix confusion;
    F1Scores f1;
    PrecisionRecall relaxed;
    std::vector<ClassificationRecord> log;  // test split, in order
    std::vector<ExplanationInput> explanations;  // requested ids with a known context
    std::size_t vocab_size = 0;                  // length of the explanation vectors
    TrainReport training;
    std::size_t clusters = 0;
    std::size_t train_size = 0;  // after balancing
    std::size_t test_size = 0;
};

// Model outputs for a set of contexts, computed once per distinct context.
struct ContextScores {
    std::vector<std::vector<EventIndex>> contexts;
    Eigen::VectorXd confidence;
    Eigen::MatrixXd total_attention;  // vocab x contexts
};

ContextScores score_contexts(const ModelParams& m, std::vector<std::vector<EventIndex>> contexts);

// Train on `train`, cluster, and classify `test`. Both use indices of `vocabulary`;
// the model only knows the event types present in `train`.
RunResult evaluate_split(const std::vector<Sequence>& train, const std::vector<Sequence>& test,
                         const EventVocabulary& vocabulary, const RunConfig& cfg, std::uint64_t seed,
                         std::size_t first_test_id = 0);

// Fits the interpreter on `train_seqs` with a trained model and classifies
// `test_seqs`; both use the model's vocabulary indices.
RunResult classify_split(const ModelParams& model, const std::vector<Sequence>& train_seqs,
                         const std::vector<Sequence>& test_seqs, const RunConfig& cfg,
                         std::size_t first_test_id = 0);

// Full protocol on one dataset: chronological splits, incident balancing, evaluation.
RunResult run_single(const LabDataset& d, const RunConfig& cfg, std::uint64_t seed);

// Trial objective: macro F1 on the hyperopt split, halved into train and test.
double hyperopt_objective(const LabDataset& d, const RunConfig& cfg, const Hyperparameters& hp, std::uint64_t seed);

SearchResult tune_hyperparameters(const LabDataset& d, const RunConfig& base, const Grid& g,
                                  const SearchBudget& b, std::size_t threads = 1);

}  // namespace alertlab
