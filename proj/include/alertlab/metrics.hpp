#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "alertlab/common.hpp"

namespace alertlab {

class EventVocabulary;
struct Sequence;

// Per-class sample counts.
class ClassCounts {
public:
    ClassCounts() = default;
    explicit ClassCounts(std::vector<std::size_t> counts);

    const std::vector<std::size_t>& counts() const { return counts_; }
    std::size_t total() const { return total_; }
    std::size_t classes() const { return counts_.size(); }

private:
    std::vector<std::size_t> counts_;
    std::size_t total_ = 0;
};

// Multi-class imbalance ratio in [0, 1): 0 is balanced, values near 1 are extreme.
double compute_ir(const ClassCounts& c);

// 1 - IR, computed without the cancellation of forming IR first.
double imbalance_complement(const ClassCounts& c);

enum class Predicted : std::uint8_t { NotClassified = 0, NonIncident = 1, Incident = 2 };

// Rows: true label; columns: NotClassified, NonIncident, Incident.
struct ConfusionMatrix {
    std::array<std::array<double, 3>, 2> counts{};

    double& at(Label truth, Predicted pred) {
        return counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
    }
    double at(Label truth, Predicted pred) const {
        return counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
    }
    double row_total(Label truth) const;
    double total() const { return row_total(Label::NonIncident) + row_total(Label::Incident); }

    ConfusionMatrix& operator+=(const ConfusionMatrix& o);
    bool operator==(const ConfusionMatrix&) const = default;
};

struct F1Scores {
    double micro = 0.0;
    double macro = 0.0;
};

// Rejected predictions are neither TP nor FP of any class; they still count
// towards the support (recall denominator) of their true class.
F1Scores micro_macro_f1(const ConfusionMatrix& cm);

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Incident-positive scores where rejected Incident alerts are true positives
// and rejected NonIncident alerts are false positives.
PrecisionRecall relaxed_prf(const ConfusionMatrix& cm);

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    if (a.size() != b.size()) throw ValidationError("cosine_similarity: length mismatch");
    const Scalar na = a.norm();
    const Scalar nb = b.norm();
    if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
    if (a == b) return Scalar(1);
    const Scalar c = a.dot(b) / (na * nb);
    return std::clamp(c, Scalar(0), Scalar(1));
}

struct CdfPoint {
    double value;
    double fraction;
};

// Right-continuous empirical CDF, one point per distinct sample value.
std::vector<CdfPoint> empirical_cdf(std::vector<double> samples);

// Expert relevance per context position, each in [0, 1].
struct RaterVector {
    std::string seq_id;
    std::vector<double> relevance;
};

struct ExplanationInput {
    std::string seq_id;
    Eigen::VectorXd total_attention;    // per event type
    std::vector<std::int32_t> context;  // event indices the rater's positions refer to
};

struct ExplanationComparison {
    std::vector<std::pair<std::string, double>> similarities;
    std::vector<std::string> missing_expert;  // model vectors without a rater counterpart
    std::vector<std::string> missing_model;   // rater vectors without a model counterpart
    std::vector<std::string> errors;          // skipped items with reason
};

ExplanationComparison compare_explanations(const std::vector<ExplanationInput>& model,
                                           const std::vector<RaterVector>& expert,
                                           std::size_t vocab_size);

std::vector<RaterVector> parse_rater_file(std::istream& in);
void write_rater_file(std::ostream& out, const std::vector<RaterVector>& raters);

}  // namespace alertlab
