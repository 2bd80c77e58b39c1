#include "alertlab/interpreter.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace alertlab {

namespace {

constexpr Eigen::Index kBlock = 128;

double exact_squared_distance(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b, Eigen::Index j) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
        const double d = a(k, i) - b(k, j);
        acc += d * d;
    }
    return acc;
}

// Calls visit(query, point, squared_distance) for every point within epsilon
// of each query column. Distances come from one GEMM per block; pairs close to
// the threshold are recomputed exactly so the relation matches a direct test.
template <typename Visit>
void scan_within(const Eigen::MatrixXd& points, const Eigen::MatrixXd& queries, double epsilon, Visit&& visit) {
    const double eps2 = epsilon * epsilon;
    const Eigen::VectorXd pn = points.colwise().squaredNorm().transpose();
    const Eigen::VectorXd qn = queries.colwise().squaredNorm().transpose();
    const Eigen::Index n = points.cols();
    Eigen::MatrixXd gram;
    for (Eigen::Index start = 0; start < queries.cols(); start += kBlock) {
        const Eigen::Index len = std::min(kBlock, queries.cols() - start);
        gram.noalias() = points.transpose() * queries.middleCols(start, len);
        for (Eigen::Index b = 0; b < len; ++b) {
            const Eigen::Index q = start + b;
            for (Eigen::Index j = 0; j < n; ++j) {
                double d2 = pn(j) + qn(q) - 2.0 * gram(j, b);
                const double band = 1e-9 * (1.0 + pn(j) + qn(q));
                if (d2 > eps2 + band) continue;
                if (d2 >= eps2 - band) {
                    d2 = exact_squared_distance(points, j, queries, q);
                    if (d2 > eps2) continue;
                }
                visit(q, j, std::max(d2, 0.0));
            }
        }
    }
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<int> dbscan_weighted(const Eigen::MatrixXd& points, std::span<const double> weights, double epsilon,
                                 std::size_t min_size) {
    if (!(epsilon > 0.0)) throw ConfigError("dbscan: epsilon must be > 0");
    if (min_size < 1) throw ConfigError("dbscan: min_size must be >= 1");
    const auto n = static_cast<std::size_t>(points.cols());
    if (weights.size() != n) throw ValidationError("dbscan: one weight per point required");

    std::vector<double> mass(n, 0.0);
    scan_within(points, points, epsilon, [&](Eigen::Index q, Eigen::Index j, double) {
        mass[static_cast<std::size_t>(q)] += weights[static_cast<std::size_t>(j)];
    });
    std::vector<char> core(n, 0);
    for (std::size_t i = 0; i < n; ++i) core[i] = mass[i] >= static_cast<double>(min_size);

    // Core points within epsilon of each other share a cluster.
    std::vector<Eigen::Index> core_index;
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) core_index.push_back(static_cast<Eigen::Index>(i));
    }
    Eigen::MatrixXd core_points(points.rows(), static_cast<Eigen::Index>(core_index.size()));
    for (std::size_t k = 0; k < core_index.size(); ++k) core_points.col(static_cast<Eigen::Index>(k)) = points.col(core_index[k]);

    DisjointSets sets(core_index.size());
    scan_within(core_points, core_points, epsilon, [&](Eigen::Index q, Eigen::Index j, double) {
        if (j > q) sets.unite(static_cast<std::size_t>(q), static_cast<std::size_t>(j));
    });

    std::vector<int> labels(n, kNoise);
    std::unordered_map<std::size_t, int> cluster_of_root;
    for (std::size_t k = 0; k < core_index.size(); ++k) {
        const auto root = sets.find(k);
        auto [it, inserted] = cluster_of_root.emplace(root, static_cast<int>(cluster_of_root.size()));
        labels[static_cast<std::size_t>(core_index[k])] = it->second;
    }

    // Border points: lowest-index core neighbour.
    std::vector<Eigen::Index> border;
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i]) border.push_back(static_cast<Eigen::Index>(i));
    }
    if (!border.empty() && !core_index.empty()) {
        Eigen::MatrixXd border_points(points.rows(), static_cast<Eigen::Index>(border.size()));
        for (std::size_t k = 0; k < border.size(); ++k) border_points.col(static_cast<Eigen::Index>(k)) = points.col(border[k]);
        std::vector<Eigen::Index> first(border.size(), -1);
        scan_within(core_points, border_points, epsilon, [&](Eigen::Index q, Eigen::Index j, double) {
            auto& f = first[static_cast<std::size_t>(q)];
            if (f < 0 || j < f) f = j;
        });
        for (std::size_t k = 0; k < border.size(); ++k) {
            if (first[k] >= 0) {
                labels[static_cast<std::size_t>(border[k])] = labels[static_cast<std::size_t>(core_index[static_cast<std::size_t>(first[k])])];
            }
        }
    }
    return labels;
}

std::vector<int> dbscan(const Eigen::MatrixXd& points, double epsilon, std::size_t min_size) {
    const std::vector<double> ones(static_cast<std::size_t>(points.cols()), 1.0);
    return dbscan_weighted(points, ones, epsilon, min_size);
}

std::vector<std::ptrdiff_t> nearest_within(const Eigen::MatrixXd& points, const Eigen::MatrixXd& queries,
                                           double epsilon, std::span<const int> tie_rank) {
    std::vector<std::ptrdiff_t> best(static_cast<std::size_t>(queries.cols()), -1);
    std::vector<double> best_d2(best.size(), 0.0);
    auto rank = [&](Eigen::Index j) { return tie_rank.empty() ? 0 : tie_rank[static_cast<std::size_t>(j)]; };
    scan_within(points, queries, epsilon, [&](Eigen::Index q, Eigen::Index j, double) {
        const auto qi = static_cast<std::size_t>(q);
        // Exact distances decide between candidates.
        const double d2 = exact_squared_distance(points, j, queries, q);
        if (d2 > epsilon * epsilon) return;
        auto& b = best[qi];
        if (b < 0 || d2 < best_d2[qi] || (d2 == best_d2[qi] && rank(j) < rank(b))) {
            b = j;
            best_d2[qi] = d2;
        }
    });
    return best;
}

// --- fit / classify ----------------------------------------------------------

namespace {

struct VectorKey {
    std::vector<double> values;
    bool operator==(const VectorKey&) const = default;
};

struct VectorKeyHash {
    std::size_t operator()(const VectorKey& k) const noexcept {
        std::size_t h = 1469598103934665603ULL;
        for (double x : k.values) {
            std::uint64_t bits = 0;
            std::memcpy(&bits, &x, sizeof bits);
            h ^= bits;
            h *= 1099511628211ULL;
        }
        return h;
    }
};

Label riskier(Label a, Label b) { return (a == Label::Incident || b == Label::Incident) ? Label::Incident : Label::NonIncident; }

}  // namespace

ClusterModel fit_weighted(std::span<const WeightedFitItem> items, std::size_t vocab_size, const Hyperparameters& hp) {
    ClusterModel model;
    model.epsilon = hp.epsilon;
    model.tau_confidence = hp.tau_confidence;
    model.min_cluster_size = hp.min_cluster_size;

    std::unordered_map<VectorKey, std::size_t, VectorKeyHash> index;
    std::vector<const Eigen::VectorXd*> distinct;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& it = items[i];
        if (static_cast<std::size_t>(it.vector.size()) != vocab_size) throw ValidationError("fit: vector length differs from vocabulary");
        if (it.confidence < hp.tau_confidence) continue;
        VectorKey key{std::vector<double>(it.vector.data(), it.vector.data() + it.vector.size())};
        const auto [pos, inserted] = index.emplace(std::move(key), distinct.size());
        if (inserted) {
            distinct.push_back(&it.vector);
            model.weight.push_back(it.weight);
            model.point_label.push_back(it.label);
            model.source.push_back(i);
        } else {
            model.weight[pos->second] += it.weight;
            model.point_label[pos->second] = riskier(model.point_label[pos->second], it.label);
        }
    }
    model.points.resize(static_cast<Eigen::Index>(vocab_size), static_cast<Eigen::Index>(distinct.size()));
    for (std::size_t k = 0; k < distinct.size(); ++k) model.points.col(static_cast<Eigen::Index>(k)) = *distinct[k];
    if (distinct.empty()) return model;

    model.cluster = dbscan_weighted(model.points, model.weight, hp.epsilon, hp.min_cluster_size);
    int clusters = 0;
    for (int c : model.cluster) clusters = std::max(clusters, c + 1);
    model.cluster_label.assign(static_cast<std::size_t>(clusters), Label::NonIncident);
    model.cluster_size.assign(static_cast<std::size_t>(clusters), 0.0);
    for (std::size_t k = 0; k < model.cluster.size(); ++k) {
        const int c = model.cluster[k];
        if (c == kNoise) continue;
        const auto ci = static_cast<std::size_t>(c);
        model.cluster_label[ci] = riskier(model.cluster_label[ci], model.point_label[k]);
        model.cluster_size[ci] += model.weight[k];
    }
    return model;
}

ClusterModel fit(std::span<const FitItem> items, const Hyperparameters& hp) {
    std::vector<WeightedFitItem> weighted;
    weighted.reserve(items.size());
    std::size_t vocab = 0;
    for (const auto& it : items) {
        if (it.sequence == nullptr) throw ValidationError("fit: missing sequence");
        vocab = static_cast<std::size_t>(it.vector.values.size());
        weighted.push_back({it.vector.values, it.prediction.confidence, 1.0, it.sequence->label});
    }
    return fit_weighted(weighted, vocab, hp);
}

std::vector<int> assign_clusters(const ClusterModel& model, const Eigen::MatrixXd& vectors) {
    std::vector<int> out(static_cast<std::size_t>(vectors.cols()), kNoise);
    std::vector<Eigen::Index> clustered;
    for (std::size_t k = 0; k < model.cluster.size(); ++k) {
        if (model.cluster[k] != kNoise) clustered.push_back(static_cast<Eigen::Index>(k));
    }
    if (clustered.empty() || vectors.cols() == 0) return out;
    if (vectors.rows() != model.points.rows()) throw ValidationError("classify: vector length differs from model");
    Eigen::MatrixXd pts(model.points.rows(), static_cast<Eigen::Index>(clustered.size()));
    std::vector<int> rank(clustered.size());
    for (std::size_t k = 0; k < clustered.size(); ++k) {
        pts.col(static_cast<Eigen::Index>(k)) = model.points.col(clustered[k]);
        rank[k] = model.cluster[static_cast<std::size_t>(clustered[k])];
    }
    const auto nearest = nearest_within(pts, vectors, model.epsilon, rank);
    for (std::size_t q = 0; q < nearest.size(); ++q) {
        if (nearest[q] >= 0) out[q] = rank[static_cast<std::size_t>(nearest[q])];
    }
    return out;
}

ClassificationOutcome classify(const ClusterModel& model, const Sequence& s,
                               const std::optional<Prediction>& prediction, const TotalAttentionVector& v) {
    ClassificationOutcome out;
    if (!prediction || s.has_unseen()) {
        out.tag = OutcomeTag::RejectedUnseenEvent;
        return out;
    }
    if (prediction->confidence < model.tau_confidence) {
        out.tag = OutcomeTag::RejectedLowConfidence;
        return out;
    }
    const auto cluster = assign_clusters(model, v.values).front();
    if (cluster == kNoise) {
        out.tag = OutcomeTag::RejectedNoCluster;
        return out;
    }
    out.tag = OutcomeTag::Labeled;
    out.cluster = cluster;
    out.label = model.cluster_label[static_cast<std::size_t>(cluster)];
    return out;
}

Predicted ClassificationOutcome::predicted() const {
    if (tag != OutcomeTag::Labeled) return Predicted::NotClassified;
    return label == Label::Incident ? Predicted::Incident : Predicted::NonIncident;
}

std::string_view to_string(const ClassificationOutcome& o) {
    switch (o.tag) {
        case OutcomeTag::Labeled: return to_string(o.label);
        case OutcomeTag::RejectedLowConfidence: return "RejectedLowConfidence";
        case OutcomeTag::RejectedUnseenEvent: return "RejectedUnseenEvent";
        case OutcomeTag::RejectedNoCluster: return "RejectedNoCluster";
    }
    return "RejectedNoCluster";
}

ClassificationOutcome parse_outcome(std::string_view text) {
    ClassificationOutcome o;
    if (text == "RejectedLowConfidence") o.tag = OutcomeTag::RejectedLowConfidence;
    else if (text == "RejectedUnseenEvent") o.tag = OutcomeTag::RejectedUnseenEvent;
    else if (text == "RejectedNoCluster") o.tag = OutcomeTag::RejectedNoCluster;
    else {
        o.tag = OutcomeTag::Labeled;
        o.label = parse_label(text);
    }
    return o;
}

void write_classification_log(std::ostream& out, std::span<const ClassificationRecord> records) {
    out << "# schema: alertlab.classification/1\n";
    out << "seq_id,true_label,outcome\n";
    for (const auto& r : records) out << r.seq_id << ',' << to_string(r.truth) << ',' << to_string(r.outcome) << '\n';
}

std::vector<ClassificationRecord> parse_classification_log(std::istream& in) {
    std::vector<ClassificationRecord> out;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            if (line != "seq_id,true_label,outcome") throw ParseError("expected header 'seq_id,true_label,outcome'", line_no);
            header = true;
            continue;
        }
        std::stringstream ss(line);
        std::string id, truth, outcome;
        if (!std::getline(ss, id, ',') || !std::getline(ss, truth, ',') || !std::getline(ss, outcome)) {
            throw ParseError("expected 3 fields", line_no);
        }
        try {
            out.push_back({id, parse_label(truth), parse_outcome(outcome)});
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

ConfusionMatrix confusion_from(std::span<const ClassificationRecord> records) {
    ConfusionMatrix cm;
    for (const auto& r : records) cm.at(r.truth, r.outcome.predicted()) += 1.0;
    return cm;
}

}  // namespace alertlab
