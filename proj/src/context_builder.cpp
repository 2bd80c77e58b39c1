#include "alertlab/context_builder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

namespace alertlab {

// --- parameters ------------------------------------------------------------

template <typename Scalar>
BasicModelParams<Scalar> BasicModelParams<Scalar>::zeros(std::size_t vocab_size, std::size_t hidden) {
    const auto h = static_cast<Eigen::Index>(hidden);
    const auto v = static_cast<Eigen::Index>(vocab_size);
    BasicModelParams p;
    p.vocab_size = vocab_size;
    p.hidden = hidden;
    p.embedding = Matrix::Zero(h, v + 1);
    for (auto* w : {&p.w_z, &p.u_z, &p.w_r, &p.u_r, &p.w_h, &p.u_h, &p.w_att}) *w = Matrix::Zero(h, h);
    for (auto* b : {&p.b_z, &p.b_r, &p.b_h, &p.b_att, &p.v_att}) *b = Vector::Zero(h);
    p.w_out = Matrix::Zero(v, h);
    p.b_out = Vector::Zero(v);
    return p;
}

template <typename Scalar>
BasicModelParams<Scalar> BasicModelParams<Scalar>::random(std::size_t vocab_size, std::size_t hidden,
                                                          std::uint64_t seed) {
    auto p = zeros(vocab_size, hidden);
    p.seed = seed;
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    p.for_each([&](const char* name, auto& t) {
        const double scale = std::string_view(name) == "embedding" ? 1.0 : bound;
        for (Eigen::Index j = 0; j < t.cols(); ++j) {
            for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, j) = Scalar(rng.uniform(-scale, scale));
        }
    });
    return p;
}

template <typename Scalar>
std::size_t BasicModelParams<Scalar>::parameter_count() const {
    std::size_t n = 0;
    for_each([&](const char*, const auto& t) { n += static_cast<std::size_t>(t.size()); });
    return n;
}

template <typename Scalar>
bool BasicModelParams<Scalar>::all_finite() const {
    bool ok = true;
    for_each([&](const char*, const auto& t) { ok = ok && t.allFinite(); });
    return ok;
}

template <typename Scalar>
std::vector<Scalar> BasicModelParams<Scalar>::flatten() const {
    std::vector<Scalar> out;
    out.reserve(parameter_count());
    for_each([&](const char*, const auto& t) {
        for (Eigen::Index j = 0; j < t.cols(); ++j) {
            for (Eigen::Index i = 0; i < t.rows(); ++i) out.push_back(t(i, j));
        }
    });
    return out;
}

template <typename Scalar>
void BasicModelParams<Scalar>::assign(std::span<const Scalar> values) {
    if (values.size() != parameter_count()) throw ValidationError("parameter count mismatch");
    std::size_t k = 0;
    for_each([&](const char*, auto& t) {
        for (Eigen::Index j = 0; j < t.cols(); ++j) {
            for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, j) = values[k++];
        }
    });
}

template <typename Scalar>
bool BasicModelParams<Scalar>::operator==(const BasicModelParams& o) const {
    return vocab_size == o.vocab_size && hidden == o.hidden && seed == o.seed && flatten() == o.flatten();
}

void TrainConfig::validate() const {
    if (!(delta >= 0.0 && delta <= 1.0)) throw ConfigError("delta must lie in [0, 1]");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
}

// --- forward / backward ----------------------------------------------------

namespace {

template <typename Scalar>
struct ForwardPass {
    using Matrix = typename BasicModelParams<Scalar>::Matrix;

    Eigen::Index n = 0;
    Eigen::Index batch = 0;
    std::vector<std::vector<Eigen::Index>> columns;  // [t][b] -> embedding column
    std::vector<Matrix> e, s, z, r, g, u;            // per step, hidden x batch
    Matrix attention;                                // n x batch
    std::vector<bool> all_pad;                       // per batch column
    Matrix context;                                  // hidden x batch
    Matrix log_prob;                                 // vocab x batch
};

template <typename Scalar>
typename BasicModelParams<Scalar>::Matrix sigmoid(const typename BasicModelParams<Scalar>::Matrix& x) {
    return (Scalar(1) + (-x.array()).exp()).inverse().matrix();
}

template <typename Scalar>
void forward(const BasicModelParams<Scalar>& m, std::span<const std::vector<EventIndex>* const> contexts,
             ForwardPass<Scalar>& f) {
    using Matrix = typename BasicModelParams<Scalar>::Matrix;
    const auto h = static_cast<Eigen::Index>(m.hidden);
    const auto pad_column = static_cast<Eigen::Index>(m.vocab_size);
    f.batch = static_cast<Eigen::Index>(contexts.size());
    f.n = contexts.empty() ? 0 : static_cast<Eigen::Index>(contexts.front()->size());
    const auto n = f.n;
    const auto b_count = f.batch;

    f.columns.assign(static_cast<std::size_t>(n), std::vector<Eigen::Index>(static_cast<std::size_t>(b_count)));
    Matrix mask = Matrix::Zero(n, b_count);
    f.all_pad.assign(static_cast<std::size_t>(b_count), false);
    for (Eigen::Index b = 0; b < b_count; ++b) {
        const auto& ctx = *contexts[static_cast<std::size_t>(b)];
        if (static_cast<Eigen::Index>(ctx.size()) != n) throw ValidationError("contexts differ in length");
        for (Eigen::Index t = 0; t < n; ++t) {
            const auto ev = ctx[static_cast<std::size_t>(t)];
            if (ev == kUnseen) throw UnseenEvent();
            if (ev >= static_cast<EventIndex>(m.vocab_size)) throw ValidationError("event index exceeds vocabulary");
            f.columns[static_cast<std::size_t>(t)][static_cast<std::size_t>(b)] = ev == kPad ? pad_column : ev;
            mask(t, b) = ev == kPad ? Scalar(0) : Scalar(1);
        }
        f.all_pad[static_cast<std::size_t>(b)] = mask.col(b).sum() == Scalar(0);
    }

    f.e.resize(static_cast<std::size_t>(n));
    f.s.resize(static_cast<std::size_t>(n));
    f.z.resize(static_cast<std::size_t>(n));
    f.r.resize(static_cast<std::size_t>(n));
    f.g.resize(static_cast<std::size_t>(n));
    f.u.resize(static_cast<std::size_t>(n));
    Matrix scores(n, b_count);
    Matrix prev = Matrix::Zero(h, b_count);
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        auto& e = f.e[ti];
        e.resize(h, b_count);
        for (Eigen::Index b = 0; b < b_count; ++b) e.col(b) = m.embedding.col(f.columns[ti][static_cast<std::size_t>(b)]);

        Matrix pre_z = m.w_z * e + m.u_z * prev;
        pre_z.colwise() += m.b_z;
        Matrix pre_r = m.w_r * e + m.u_r * prev;
        pre_r.colwise() += m.b_r;
        f.z[ti] = sigmoid<Scalar>(pre_z);
        f.r[ti] = sigmoid<Scalar>(pre_r);
        Matrix pre_g = m.w_h * e + m.u_h * (f.r[ti].array() * prev.array()).matrix();
        pre_g.colwise() += m.b_h;
        f.g[ti] = pre_g.array().tanh().matrix();
        f.s[ti] = ((Scalar(1) - f.z[ti].array()) * prev.array() + f.z[ti].array() * f.g[ti].array()).matrix();

        Matrix pre_a = m.w_att * f.s[ti];
        pre_a.colwise() += m.b_att;
        f.u[ti] = pre_a.array().tanh().matrix();
        scores.row(t) = m.v_att.transpose() * f.u[ti];
        prev = f.s[ti];
    }

    // Masked softmax over positions, column by column.
    f.attention.resize(n, b_count);
    for (Eigen::Index b = 0; b < b_count; ++b) {
        if (f.all_pad[static_cast<std::size_t>(b)]) {
            f.attention.col(b).setConstant(Scalar(1) / Scalar(n));
            continue;
        }
        Scalar top = -std::numeric_limits<Scalar>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            if (mask(t, b) > Scalar(0)) top = std::max(top, scores(t, b));
        }
        Scalar total(0);
        for (Eigen::Index t = 0; t < n; ++t) {
            const Scalar w = mask(t, b) > Scalar(0) ? std::exp(scores(t, b) - top) : Scalar(0);
            f.attention(t, b) = w;
            total += w;
        }
        f.attention.col(b) /= total;
    }

    f.context = Matrix::Zero(h, b_count);
    for (Eigen::Index t = 0; t < n; ++t) {
        f.context.array() += f.s[static_cast<std::size_t>(t)].array().rowwise() * f.attention.row(t).array();
    }

    Matrix logits = m.w_out * f.context;
    logits.colwise() += m.b_out;
    f.log_prob.resize(logits.rows(), b_count);
    for (Eigen::Index b = 0; b < b_count; ++b) {
        const Scalar top = logits.col(b).maxCoeff();
        const Scalar lse = top + std::log((logits.col(b).array() - top).exp().sum());
        f.log_prob.col(b) = logits.col(b).array() - lse;
    }
}

}  // namespace

template <typename Scalar>
Scalar loss_and_gradient(const BasicModelParams<Scalar>& m, std::span<const TrainingExample> batch,
                         Scalar delta, BasicModelParams<Scalar>* grad) {
    using Matrix = typename BasicModelParams<Scalar>::Matrix;
    if (batch.empty()) return Scalar(0);
    std::vector<const std::vector<EventIndex>*> contexts;
    contexts.reserve(batch.size());
    Scalar weight_total(0);
    for (const auto& ex : batch) {
        contexts.push_back(&ex.context);
        weight_total += Scalar(ex.weight);
    }
    ForwardPass<Scalar> f;
    forward<Scalar>(m, contexts, f);

    const auto v = static_cast<Eigen::Index>(m.vocab_size);
    const auto b_count = f.batch;
    const Scalar uniform = delta / Scalar(v);

    Scalar loss(0);
    Matrix d_logits(v, b_count);
    for (Eigen::Index b = 0; b < b_count; ++b) {
        const auto& ex = batch[static_cast<std::size_t>(b)];
        if (ex.target < 0 || ex.target >= static_cast<EventIndex>(v)) throw ValidationError("target outside vocabulary");
        const Scalar w = Scalar(ex.weight) / weight_total;
        Scalar l(0);
        for (Eigen::Index k = 0; k < v; ++k) {
            const Scalar q = uniform + (k == ex.target ? Scalar(1) - delta : Scalar(0));
            l -= q * f.log_prob(k, b);
            d_logits(k, b) = w * (std::exp(f.log_prob(k, b)) - q);
        }
        loss += w * l;
    }
    if (grad == nullptr) return loss;

    auto& gr = *grad;
    gr.w_out.noalias() += d_logits * f.context.transpose();
    gr.b_out += d_logits.rowwise().sum();
    const Matrix d_context = m.w_out.transpose() * d_logits;

    const auto n = f.n;
    // Attention softmax backward.
    Matrix d_att(n, b_count);
    for (Eigen::Index t = 0; t < n; ++t) {
        d_att.row(t) = (d_context.array() * f.s[static_cast<std::size_t>(t)].array()).colwise().sum();
    }
    Matrix d_scores(n, b_count);
    for (Eigen::Index b = 0; b < b_count; ++b) {
        if (f.all_pad[static_cast<std::size_t>(b)]) {
            d_scores.col(b).setZero();
            continue;
        }
        const Scalar mean = f.attention.col(b).dot(d_att.col(b));
        d_scores.col(b) = (f.attention.col(b).array() * (d_att.col(b).array() - mean)).matrix();
    }

    std::vector<Matrix> d_state(static_cast<std::size_t>(n));
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        const auto& u = f.u[ti];
        gr.v_att.noalias() += u * d_scores.row(t).transpose();
        Matrix d_pre_a = ((m.v_att * d_scores.row(t)).array() * (Scalar(1) - u.array().square())).matrix();
        gr.w_att.noalias() += d_pre_a * f.s[ti].transpose();
        gr.b_att += d_pre_a.rowwise().sum();
        d_state[ti] = (d_context.array().rowwise() * f.attention.row(t).array()).matrix();
        d_state[ti].noalias() += m.w_att.transpose() * d_pre_a;
    }

    // Backpropagation through time.
    const auto h = static_cast<Eigen::Index>(m.hidden);
    Matrix ds = Matrix::Zero(h, b_count);
    const Matrix zero = Matrix::Zero(h, b_count);
    for (Eigen::Index t = n - 1; t >= 0; --t) {
        const auto ti = static_cast<std::size_t>(t);
        ds += d_state[ti];
        const Matrix& prev = t > 0 ? f.s[ti - 1] : zero;
        const auto& z = f.z[ti];
        const auto& r = f.r[ti];
        const auto& g = f.g[ti];
        const auto& e = f.e[ti];

        const Matrix d_g = (ds.array() * z.array()).matrix();
        const Matrix d_z = (ds.array() * (g.array() - prev.array())).matrix();
        Matrix d_prev = (ds.array() * (Scalar(1) - z.array())).matrix();

        const Matrix d_pre_g = (d_g.array() * (Scalar(1) - g.array().square())).matrix();
        const Matrix r_prev = (r.array() * prev.array()).matrix();
        gr.w_h.noalias() += d_pre_g * e.transpose();
        gr.u_h.noalias() += d_pre_g * r_prev.transpose();
        gr.b_h += d_pre_g.rowwise().sum();
        const Matrix d_r_prev = m.u_h.transpose() * d_pre_g;
        const Matrix d_r = (d_r_prev.array() * prev.array()).matrix();
        d_prev.array() += d_r_prev.array() * r.array();

        const Matrix d_pre_z = (d_z.array() * z.array() * (Scalar(1) - z.array())).matrix();
        gr.w_z.noalias() += d_pre_z * e.transpose();
        gr.u_z.noalias() += d_pre_z * prev.transpose();
        gr.b_z += d_pre_z.rowwise().sum();
        d_prev.noalias() += m.u_z.transpose() * d_pre_z;

        const Matrix d_pre_r = (d_r.array() * r.array() * (Scalar(1) - r.array())).matrix();
        gr.w_r.noalias() += d_pre_r * e.transpose();
        gr.u_r.noalias() += d_pre_r * prev.transpose();
        gr.b_r += d_pre_r.rowwise().sum();
        d_prev.noalias() += m.u_r.transpose() * d_pre_r;

        Matrix d_e = m.w_z.transpose() * d_pre_z;
        d_e.noalias() += m.w_r.transpose() * d_pre_r;
        d_e.noalias() += m.w_h.transpose() * d_pre_g;
        for (Eigen::Index b = 0; b < b_count; ++b) {
            gr.embedding.col(f.columns[ti][static_cast<std::size_t>(b)]) += d_e.col(b);
        }
        ds = d_prev;
    }
    return loss;
}

template struct BasicModelParams<double>;
template double loss_and_gradient<double>(const BasicModelParams<double>&, std::span<const TrainingExample>,
                                          double, BasicModelParams<double>*);

// --- training ----------------------------------------------------------------

std::vector<TrainingExample> collapse_duplicates(const std::vector<Sequence>& seqs) {
    std::unordered_map<std::vector<EventIndex>, std::size_t, ContextHash> index;
    std::vector<TrainingExample> out;
    std::vector<EventIndex> key;
    for (const auto& s : seqs) {
        key = s.context;
        key.push_back(s.target);
        const auto [it, inserted] = index.emplace(key, out.size());
        if (inserted) {
            out.push_back({s.context, s.target, 1.0});
        } else {
            out[it->second].weight += 1.0;
        }
    }
    return out;
}

namespace {

class AdamState {
public:
    explicit AdamState(const ModelParams& shape)
        : m_(ModelParams::zeros(shape.vocab_size, shape.hidden)),
          v_(ModelParams::zeros(shape.vocab_size, shape.hidden)) {}

    void step(ModelParams& params, const ModelParams& grad, double lr) {
        constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
        ++t_;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
        std::vector<Eigen::MatrixXd*> m_mats, v_mats, g_mats;
        std::vector<Eigen::VectorXd*> m_vecs, v_vecs, g_vecs;
        collect(m_, m_mats, m_vecs);
        collect(v_, v_mats, v_vecs);
        collect(const_cast<ModelParams&>(grad), g_mats, g_vecs);
        std::size_t mi = 0, vi = 0;
        params.for_each([&](const char*, auto& p) {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, Eigen::MatrixXd>) {
                update(p, *m_mats[mi], *v_mats[mi], *g_mats[mi], lr, c1, c2, beta1, beta2, eps);
                ++mi;
            } else {
                update(p, *m_vecs[vi], *v_vecs[vi], *g_vecs[vi], lr, c1, c2, beta1, beta2, eps);
                ++vi;
            }
        });
    }

private:
    static void collect(ModelParams& p, std::vector<Eigen::MatrixXd*>& mats, std::vector<Eigen::VectorXd*>& vecs) {
        p.for_each([&](const char*, auto& t) {
            if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Eigen::MatrixXd>) mats.push_back(&t);
            else vecs.push_back(&t);
        });
    }

    template <typename T>
    static void update(T& p, T& m, T& v, const T& g, double lr, double c1, double c2, double beta1,
                       double beta2, double eps) {
        m = beta1 * m + (1.0 - beta1) * g;
        v = (beta2 * v.array() + (1.0 - beta2) * g.array().square()).matrix();
        p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }

    ModelParams m_;
    ModelParams v_;
    std::size_t t_ = 0;
};

void sgd_step(ModelParams& params, const ModelParams& grad, double lr) {
    std::vector<const Eigen::MatrixXd*> mats;
    std::vector<const Eigen::VectorXd*> vecs;
    grad.for_each([&](const char*, const auto& t) {
        if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Eigen::MatrixXd>) mats.push_back(&t);
        else vecs.push_back(&t);
    });
    std::size_t mi = 0, vi = 0;
    params.for_each([&](const char*, auto& p) {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, Eigen::MatrixXd>) p -= lr * *mats[mi++];
        else p -= lr * *vecs[vi++];
    });
}

void zero(ModelParams& g) {
    g.for_each([](const char*, auto& t) { t.setZero(); });
}

}  // namespace

ModelParams train_examples(const std::vector<TrainingExample>& examples, std::size_t vocab_size,
                           const TrainConfig& cfg, std::size_t hidden, TrainReport* report) {
    cfg.validate();
    if (examples.empty()) throw ValidationError("train: no training sequences");
    if (vocab_size < 1) throw ValidationError("train: empty vocabulary");
    if (hidden < 1) throw ConfigError("train: hidden_nodes must be >= 1");

    auto params = ModelParams::random(vocab_size, hidden, cfg.seed);
    auto grad = ModelParams::zeros(vocab_size, hidden);
    AdamState adam(params);
    Rng rng(Rng::mix(cfg.seed, 0x7472));

    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<TrainingExample> batch;
    batch.reserve(cfg.batch_size);
    if (report) {
        report->epoch_loss.clear();
        report->unique_examples = examples.size();
    }

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        double loss_sum = 0.0;
        double weight_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const auto stop = std::min(order.size(), start + cfg.batch_size);
            batch.clear();
            double w = 0.0;
            for (std::size_t i = start; i < stop; ++i) {
                batch.push_back(examples[order[i]]);
                w += examples[order[i]].weight;
            }
            zero(grad);
            const double loss = loss_and_gradient<double>(params, batch, cfg.delta, &grad);
            if (!std::isfinite(loss) || !grad.all_finite()) throw TrainingDiverged(epoch + 1);
            loss_sum += loss * w;
            weight_sum += w;
            if (cfg.optimizer == Optimizer::Adam) {
                adam.step(params, grad, cfg.learning_rate);
            } else {
                sgd_step(params, grad, cfg.learning_rate);
            }
        }
        if (!params.all_finite()) throw TrainingDiverged(epoch + 1);
        if (report) report->epoch_loss.push_back(loss_sum / weight_sum);
    }
    return params;
}

ModelParams train(const std::vector<Sequence>& seqs, std::size_t vocab_size, const TrainConfig& cfg,
                  const Hyperparameters& hp, TrainReport* report) {
    for (const auto& s : seqs) {
        if (s.has_unseen()) throw ValidationError("train: sequence contains an unseen event");
        if (s.context.size() != hp.n) throw ValidationError("train: context length differs from n");
    }
    return train_examples(collapse_duplicates(seqs), vocab_size, cfg, hp.hidden_nodes, report);
}

// --- inference ---------------------------------------------------------------

BatchPrediction predict_batch(const ModelParams& m, std::span<const std::vector<EventIndex>* const> contexts) {
    ForwardPass<double> f;
    forward<double>(m, contexts, f);
    BatchPrediction out;
    out.distribution = f.log_prob.array().exp().matrix();
    out.attention = std::move(f.attention);
    return out;
}

std::pair<Prediction, AttentionVector> predict(const ModelParams& m, const Sequence& s) {
    const std::vector<EventIndex>* ctx = &s.context;
    auto batch = predict_batch(m, std::span<const std::vector<EventIndex>* const>(&ctx, 1));
    Prediction p;
    p.distribution = batch.distribution.col(0);
    Eigen::Index best = 0;
    p.confidence = p.distribution.maxCoeff(&best);
    p.predicted = static_cast<EventIndex>(best);
    return {std::move(p), AttentionVector{batch.attention.col(0)}};
}

TotalAttentionVector total_attention(const Sequence& s, const AttentionVector& a, std::size_t vocab_size) {
    if (static_cast<std::size_t>(a.weights.size()) != s.context.size()) {
        throw ValidationError("total_attention: attention length differs from context length");
    }
    return {aggregate_positions<double>(std::span<const EventIndex>(s.context), a.weights, vocab_size)};
}

// --- checkpoints -------------------------------------------------------------

void save_checkpoint(const std::filesystem::path& path, const ModelParams& m, const EventVocabulary& v) {
    nlohmann::ordered_json j;
    j["format"] = "alertlab.model";
    j["version"] = 1;
    j["vocab_size"] = m.vocab_size;
    j["hidden"] = m.hidden;
    j["seed"] = m.seed;
    j["vocabulary"] = v.names();
    auto& tensors = j["tensors"];
    m.for_each([&](const char* name, const auto& t) {
        nlohmann::ordered_json entry;
        entry["rows"] = t.rows();
        entry["cols"] = t.cols();
        std::vector<double> data;
        data.reserve(static_cast<std::size_t>(t.size()));
        for (Eigen::Index i = 0; i < t.rows(); ++i) {
            for (Eigen::Index k = 0; k < t.cols(); ++k) data.push_back(t(i, k));
        }
        entry["data"] = std::move(data);
        tensors[name] = std::move(entry);
    });
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write checkpoint '" + path.string() + "'");
    out << j.dump() << '\n';
}

std::pair<ModelParams, EventVocabulary> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open checkpoint '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid checkpoint: ") + e.what(), 1);
    }
    if (j.value("format", "") != "alertlab.model" || j.value("version", 0) != 1) {
        throw ValidationError("unsupported checkpoint format");
    }
    auto m = ModelParams::zeros(j.at("vocab_size").get<std::size_t>(), j.at("hidden").get<std::size_t>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.for_each([&](const char* name, auto& t) {
        const auto& entry = j.at("tensors").at(name);
        if (entry.at("rows").get<Eigen::Index>() != t.rows() || entry.at("cols").get<Eigen::Index>() != t.cols()) {
            throw ValidationError(std::string("checkpoint tensor shape mismatch: ") + name);
        }
        const auto data = entry.at("data").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(data.size()) != t.size()) {
            throw ValidationError(std::string("checkpoint tensor size mismatch: ") + name);
        }
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < t.rows(); ++i) {
            for (Eigen::Index c = 0; c < t.cols(); ++c) t(i, c) = data[k++];
        }
    });
    if (!m.all_finite()) throw ValidationError("checkpoint contains non-finite weights");
    EventVocabulary v;
    for (const auto& name : j.at("vocabulary").get<std::vector<std::string>>()) v.add(name);
    v.freeze();
    if (v.size() != m.vocab_size) throw ValidationError("checkpoint vocabulary size mismatch");
    return {std::move(m), std::move(v)};
}

}  // namespace alertlab
