#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "alertlab/attention.hpp"
#include "alertlab/common.hpp"
#include "alertlab/hyperparameters.hpp"
#include "alertlab/sequencer.hpp"

namespace alertlab {

// GRU encoder over the context, additive attention over its hidden states and
// a softmax output layer over the event vocabulary.
template <typename Scalar>
struct BasicModelParams {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    std::size_t vocab_size = 0;
    std::size_t hidden = 0;
    std::uint64_t seed = 0;

    Matrix embedding;  // hidden x (vocab_size + 1); the last column embeds PAD
    Matrix w_z, u_z, w_r, u_r, w_h, u_h;
    Vector b_z, b_r, b_h;
    Matrix w_att;
    Vector b_att, v_att;
    Matrix w_out;  // vocab_size x hidden
    Vector b_out;

    static BasicModelParams zeros(std::size_t vocab_size, std::size_t hidden);
    static BasicModelParams random(std::size_t vocab_size, std::size_t hidden, std::uint64_t seed);

    // Visits every tensor together with its serialized name.
    template <typename F>
    void for_each(F&& f) { visit(*this, f); }
    template <typename F>
    void for_each(F&& f) const { visit(*this, f); }

    std::size_t parameter_count() const;
    // Column-major concatenation of all tensors in visiting order.
    std::vector<Scalar> flatten() const;
    void assign(std::span<const Scalar> values);
    bool all_finite() const;
    bool operator==(const BasicModelParams& o) const;

private:
    template <typename Self, typename F>
    static void visit(Self& s, F& f) {
        f("embedding", s.embedding);
        f("w_z", s.w_z); f("u_z", s.u_z); f("b_z", s.b_z);
        f("w_r", s.w_r); f("u_r", s.u_r); f("b_r", s.b_r);
        f("w_h", s.w_h); f("u_h", s.u_h); f("b_h", s.b_h);
        f("w_att", s.w_att); f("b_att", s.b_att); f("v_att", s.v_att);
        f("w_out", s.w_out); f("b_out", s.b_out);
    }
};

using ModelParams = BasicModelParams<double>;

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
    double delta = 0.0;
    std::size_t epochs = 10;
    std::size_t batch_size = 128;
    double learning_rate = 0.01;
    Optimizer optimizer = Optimizer::Sgd;
    std::uint64_t seed = 1;

    void validate() const;
};

struct TrainReport {
    std::vector<double> epoch_loss;  // weighted mean loss observed during each epoch
    std::size_t unique_examples = 0;
};

struct AttentionVector {
    Eigen::VectorXd weights;  // one per context position
};

struct TotalAttentionVector {
    Eigen::VectorXd values;  // one per event type
};

struct Prediction {
    Eigen::VectorXd distribution;
    EventIndex predicted = 0;
    double confidence = 0.0;
};

class UnseenEvent : public ValidationError {
public:
    UnseenEvent() : ValidationError("sequence contains an event type absent from training") {}
};

// A (context, target) pair with a multiplicity weight.
struct TrainingExample {
    std::vector<EventIndex> context;
    EventIndex target = 0;
    double weight = 1.0;
};

// Identical (context, target) pairs collapse into one weighted example,
// in order of first occurrence.
std::vector<TrainingExample> collapse_duplicates(const std::vector<Sequence>& seqs);

ModelParams train(const std::vector<Sequence>& seqs, std::size_t vocab_size, const TrainConfig& cfg,
                  const Hyperparameters& hp, TrainReport* report = nullptr);

ModelParams train_examples(const std::vector<TrainingExample>& examples, std::size_t vocab_size,
                           const TrainConfig& cfg, std::size_t hidden, TrainReport* report = nullptr);

std::pair<Prediction, AttentionVector> predict(const ModelParams& m, const Sequence& s);

// Batched inference over contexts (no unseen entries allowed).
struct BatchPrediction {
    Eigen::MatrixXd distribution;  // vocab x batch
    Eigen::MatrixXd attention;     // n x batch
};
BatchPrediction predict_batch(const ModelParams& m, std::span<const std::vector<EventIndex>* const> contexts);

TotalAttentionVector total_attention(const Sequence& s, const AttentionVector& a, std::size_t vocab_size);

template <typename Scalar>
Scalar label_smoothed_loss(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& distribution,
                           EventIndex target, Scalar delta) {
    const auto v = distribution.size();
    const Scalar floor = std::numeric_limits<Scalar>::min();
    Scalar loss(0);
    for (Eigen::Index k = 0; k < v; ++k) {
        const Scalar q = delta / Scalar(v) + (k == target ? Scalar(1) - delta : Scalar(0));
        if (q > Scalar(0)) loss -= q * std::log(std::max(distribution(k), floor));
    }
    return loss;
}

// Weighted mean label-smoothed loss of a batch; accumulates dLoss/dParams into
// `grad` when given. Exposed for gradient verification.
template <typename Scalar>
Scalar loss_and_gradient(const BasicModelParams<Scalar>& m, std::span<const TrainingExample> batch,
                         Scalar delta, BasicModelParams<Scalar>* grad);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& m, const EventVocabulary& v);
std::pair<ModelParams, EventVocabulary> load_checkpoint(const std::filesystem::path& path);

}  // namespace alertlab
