#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "alertlab/common.hpp"
#include "alertlab/context_builder.hpp"
#include "alertlab/hyperparameters.hpp"
#include "alertlab/metrics.hpp"
#include "alertlab/sequencer.hpp"

namespace alertlab {

inline constexpr int kNoise = -1;

// DBSCAN over the columns of `points` with Euclidean distance. A point is core
// when at least `min_size` points (itself included) lie within `epsilon`.
// Border points join the cluster of their lowest-index core neighbour.
// Cluster ids follow the order of each cluster's lowest-index core point.
std::vector<int> dbscan(const Eigen::MatrixXd& points, double epsilon, std::size_t min_size);

// Same, where column i stands for weights[i] identical points.
std::vector<int> dbscan_weighted(const Eigen::MatrixXd& points, std::span<const double> weights,
                                 double epsilon, std::size_t min_size);

// For each query column: the index of the nearest point within epsilon among
// the columns of `points` (ties resolved by `tie_rank`, then index), or -1.
std::vector<std::ptrdiff_t> nearest_within(const Eigen::MatrixXd& points, const Eigen::MatrixXd& queries,
                                           double epsilon, std::span<const int> tie_rank);

struct ClusterModel {
    Eigen::MatrixXd points;             // distinct total-attention vectors, one per column
    std::vector<double> weight;         // sequences sharing each vector
    std::vector<Label> point_label;     // highest-risk label among those sequences
    std::vector<std::size_t> source;    // first input item holding each vector
    std::vector<int> cluster;           // per point, kNoise for noise
    std::vector<Label> cluster_label;   // per cluster
    std::vector<double> cluster_size;   // members (sequences) per cluster
    double epsilon = 0.0;
    double tau_confidence = 0.0;
    std::size_t min_cluster_size = 1;

    std::size_t cluster_count() const { return cluster_label.size(); }
};

struct FitItem {
    const Sequence* sequence = nullptr;
    Prediction prediction;
    TotalAttentionVector vector;
};

ClusterModel fit(std::span<const FitItem> items, const Hyperparameters& hp);

// Weighted form used by the pipeline: one entry per distinct context.
struct WeightedFitItem {
    Eigen::VectorXd vector;
    double confidence = 0.0;
    double weight = 1.0;
    Label label = Label::NonIncident;
};
ClusterModel fit_weighted(std::span<const WeightedFitItem> items, std::size_t vocab_size, const Hyperparameters& hp);

enum class OutcomeTag : std::uint8_t {
    Labeled,
    RejectedLowConfidence,
    RejectedUnseenEvent,
    RejectedNoCluster,
};

struct ClassificationOutcome {
    OutcomeTag tag = OutcomeTag::RejectedNoCluster;
    Label label = Label::NonIncident;  // meaningful for Labeled only
    int cluster = kNoise;

    Predicted predicted() const;
    bool operator==(const ClassificationOutcome&) const = default;
};

std::string_view to_string(const ClassificationOutcome& o);
ClassificationOutcome parse_outcome(std::string_view text);

// `prediction` empty means the context builder reported an unseen event.
ClassificationOutcome classify(const ClusterModel& model, const Sequence& s,
                               const std::optional<Prediction>& prediction, const TotalAttentionVector& v);

// Cluster assignment for many vectors at once (columns), ignoring the confidence gate.
std::vector<int> assign_clusters(const ClusterModel& model, const Eigen::MatrixXd& vectors);

struct ClassificationRecord {
    std::string seq_id;
    Label truth = Label::NonIncident;
    ClassificationOutcome outcome;
};

void write_classification_log(std::ostream& out, std::span<const ClassificationRecord> records);
std::vector<ClassificationRecord> parse_classification_log(std::istream& in);

ConfusionMatrix confusion_from(std::span<const ClassificationRecord> records);

}  // namespace alertlab
