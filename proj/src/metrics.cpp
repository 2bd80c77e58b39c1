#include "alertlab/metrics.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>

#include "alertlab/attention.hpp"

namespace alertlab {

ClassCounts::ClassCounts(std::vector<std::size_t> counts) : counts_(std::move(counts)) {
    for (auto c : counts_) total_ += c;
}

double imbalance_complement(const ClassCounts& c) {
    if (c.classes() < 2) throw ValidationError("imbalance ratio needs at least two classes");
    const auto n = static_cast<double>(c.total());
    const auto nc = static_cast<double>(c.classes());
    double sum = 0.0;
    for (auto ci : c.counts()) {
        if (ci == 0) throw ValidationError("imbalance ratio needs every class to be non-empty");
        if (ci == c.total()) throw ValidationError("imbalance ratio undefined: one class holds every sample");
        const auto x = static_cast<double>(ci);
        sum += x / (n - x);
    }
    return 1.0 / ((nc - 1.0) / nc * sum);
}

double compute_ir(const ClassCounts& c) { return 1.0 - imbalance_complement(c); }

double ConfusionMatrix::row_total(Label truth) const {
    const auto& row = counts[static_cast<std::size_t>(truth)];
    return row[0] + row[1] + row[2];
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 3; ++c) counts[r][c] += o.counts[r][c];
    }
    return *this;
}

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

F1Scores micro_macro_f1(const ConfusionMatrix& cm) {
    const std::array<std::pair<Label, Predicted>, 2> classes{
        {{Label::NonIncident, Predicted::NonIncident}, {Label::Incident, Predicted::Incident}}};
    double tp_sum = 0.0;
    double predicted_sum = 0.0;
    double support_sum = 0.0;
    double macro = 0.0;
    for (const auto& [truth, pred] : classes) {
        const double tp = cm.at(truth, pred);
        const double predicted = cm.at(Label::NonIncident, pred) + cm.at(Label::Incident, pred);
        const double support = cm.row_total(truth);
        macro += harmonic(ratio(tp, predicted), ratio(tp, support));
        tp_sum += tp;
        predicted_sum += predicted;
        support_sum += support;
    }
    F1Scores out;
    out.macro = macro / 2.0;
    out.micro = harmonic(ratio(tp_sum, predicted_sum), ratio(tp_sum, support_sum));
    return out;
}

PrecisionRecall relaxed_prf(const ConfusionMatrix& cm) {
    const double tp = cm.at(Label::Incident, Predicted::Incident) +
                      cm.at(Label::Incident, Predicted::NotClassified);
    const double fp = cm.at(Label::NonIncident, Predicted::Incident) +
                      cm.at(Label::NonIncident, Predicted::NotClassified);
    const double fn = cm.at(Label::Incident, Predicted::NonIncident);
    PrecisionRecall out;
    out.precision = ratio(tp, tp + fp);
    out.recall = ratio(tp, tp + fn);
    out.f1 = harmonic(out.precision, out.recall);
    return out;
}

std::vector<CdfPoint> empirical_cdf(std::vector<double> samples) {
    if (samples.empty()) throw ValidationError("empirical_cdf: no samples");
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    std::vector<CdfPoint> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
        out.push_back({samples[i], static_cast<double>(i + 1) / n});
    }
    return out;
}

ExplanationComparison compare_explanations(const std::vector<ExplanationInput>& model,
                                           const std::vector<RaterVector>& expert,
                                           std::size_t vocab_size) {
    std::map<std::string, const RaterVector*> by_id;
    for (const auto& r : expert) by_id.emplace(r.seq_id, &r);

    ExplanationComparison out;
    std::map<std::string, bool> matched;
    for (const auto& m : model) {
        const auto it = by_id.find(m.seq_id);
        if (it == by_id.end()) {
            out.missing_expert.push_back(m.seq_id);
            continue;
        }
        matched[m.seq_id] = true;
        const auto& rel = it->second->relevance;
        if (rel.size() != m.context.size()) {
            out.errors.push_back(m.seq_id + ": rater has " + std::to_string(rel.size()) +
                                 " positions, context has " + std::to_string(m.context.size()));
            continue;
        }
        if (static_cast<std::size_t>(m.total_attention.size()) != vocab_size) {
            out.errors.push_back(m.seq_id + ": model vector length differs from vocabulary size");
            continue;
        }
        const Eigen::Map<const Eigen::VectorXd> weights(rel.data(), static_cast<Eigen::Index>(rel.size()));
        const Eigen::VectorXd projected =
            aggregate_positions<double>(std::span<const std::int32_t>(m.context), weights, vocab_size);
        out.similarities.emplace_back(m.seq_id, cosine_similarity(m.total_attention, projected));
    }
    for (const auto& r : expert) {
        if (!matched.count(r.seq_id)) out.missing_model.push_back(r.seq_id);
    }
    return out;
}

std::vector<RaterVector> parse_rater_file(std::istream& in) {
    std::vector<RaterVector> out;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            if (line.rfind("seq_id", 0) != 0) throw ParseError("expected header 'seq_id,pos_0,...'", line_no);
            header = true;
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        RaterVector r;
        std::getline(ss, r.seq_id, ',');
        while (std::getline(ss, field, ',')) {
            double x = 0.0;
            try {
                std::size_t used = 0;
                x = std::stod(field, &used);
                if (used != field.size()) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw ParseError("relevance is not a number: '" + field + "'", line_no);
            }
            if (!(x >= 0.0 && x <= 1.0)) {
                throw ValidationError("line " + std::to_string(line_no) + ": relevance outside [0,1]");
            }
            r.relevance.push_back(x);
        }
        out.push_back(std::move(r));
    }
    return out;
}

void write_rater_file(std::ostream& out, const std::vector<RaterVector>& raters) {
    const std::size_t n = raters.empty() ? 0 : raters.front().relevance.size();
    out << "# schema: alertlab.raters/1\n";
    out << "seq_id";
    for (std::size_t i = 0; i < n; ++i) out << ",pos_" << i;
    out << '\n';
    char buf[32];
    for (const auto& r : raters) {
        out << r.seq_id;
        for (double x : r.relevance) {
            std::snprintf(buf, sizeof buf, "%.17g", x);
            out << ',' << buf;
        }
        out << '\n';
    }
}

}  // namespace alertlab
