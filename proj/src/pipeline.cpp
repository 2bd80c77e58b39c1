#include "alertlab/pipeline.hpp"

#include <algorithm>
#include <unordered_map>

namespace alertlab {

namespace {

constexpr std::size_t kScoreChunk = 512;

using ContextIndex = std::unordered_map<std::vector<EventIndex>, std::size_t, ContextHash>;

}  // namespace

ContextScores score_contexts(const ModelParams& m, std::vector<std::vector<EventIndex>> contexts) {
    ContextScores out;
    out.contexts = std::move(contexts);
    const auto count = out.contexts.size();
    const auto v = m.vocab_size;
    out.confidence.resize(static_cast<Eigen::Index>(count));
    out.total_attention.setZero(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(count));
    std::vector<const std::vector<EventIndex>*> chunk;
    for (std::size_t start = 0; start < count; start += kScoreChunk) {
        const auto stop = std::min(count, start + kScoreChunk);
        chunk.clear();
        for (std::size_t i = start; i < stop; ++i) chunk.push_back(&out.contexts[i]);
        const auto batch = predict_batch(m, chunk);
        for (std::size_t i = start; i < stop; ++i) {
            const auto b = static_cast<Eigen::Index>(i - start);
            const auto col = static_cast<Eigen::Index>(i);
            out.confidence(col) = batch.distribution.col(b).maxCoeff();
            const Eigen::VectorXd weights = batch.attention.col(b);
            out.total_attention.col(col) =
                aggregate_positions<double>(std::span<const EventIndex>(out.contexts[i]), weights, v);
        }
    }
    return out;
}

RunResult evaluate_split(const std::vector<Sequence>& train, const std::vector<Sequence>& test,
                         const EventVocabulary& vocabulary, const RunConfig& cfg, std::uint64_t seed,
                         std::size_t first_test_id) {
    cfg.hp.validate();
    const EventVocabulary known = vocabulary_of(train, vocabulary);
    const auto train_seqs = reindex(train, vocabulary, known);
    const auto test_seqs = reindex(test, vocabulary, known);

    TrainConfig tc = cfg.train;
    tc.delta = cfg.hp.delta;
    tc.seed = Rng::mix(seed, 0x6d6f);
    TrainReport report;
    const ModelParams model =
        train_examples(collapse_duplicates(train_seqs), known.size(), tc, cfg.hp.hidden_nodes, &report);
    RunResult r = classify_split(model, train_seqs, test_seqs, cfg, first_test_id);
    r.training = std::move(report);
    return r;
}

RunResult classify_split(const ModelParams& model, const std::vector<Sequence>& train_seqs,
                         const std::vector<Sequence>& test_seqs, const RunConfig& cfg, std::size_t first_test_id) {
    cfg.hp.validate();
    const std::size_t v = model.vocab_size;
    RunResult r;
    r.train_size = train_seqs.size();
    r.test_size = test_seqs.size();

    // Score every distinct known context once.
    ContextIndex index;
    std::vector<std::vector<EventIndex>> contexts;
    auto slot = [&](const std::vector<EventIndex>& c) {
        const auto [it, inserted] = index.emplace(c, contexts.size());
        if (inserted) contexts.push_back(c);
        return it->second;
    };
    std::vector<std::ptrdiff_t> train_slot(train_seqs.size(), -1);
    for (std::size_t i = 0; i < train_seqs.size(); ++i) {
        if (!train_seqs[i].has_unseen()) train_slot[i] = static_cast<std::ptrdiff_t>(slot(train_seqs[i].context));
    }
    std::vector<std::ptrdiff_t> test_slot(test_seqs.size(), -1);
    for (std::size_t i = 0; i < test_seqs.size(); ++i) {
        if (!test_seqs[i].has_unseen()) test_slot[i] = static_cast<std::ptrdiff_t>(slot(test_seqs[i].context));
    }
    const ContextScores scores = score_contexts(model, std::move(contexts));

    // One weighted item per (context, label) of the training split.
    std::vector<WeightedFitItem> items;
    {
        std::unordered_map<std::size_t, std::size_t> item_of;
        for (std::size_t i = 0; i < train_seqs.size(); ++i) {
            if (train_slot[i] < 0) continue;
            const std::size_t key = static_cast<std::size_t>(train_slot[i]) * 2 + static_cast<std::size_t>(train_seqs[i].label);
            const auto [it, inserted] = item_of.emplace(key, items.size());
            if (inserted) {
                const auto col = static_cast<Eigen::Index>(train_slot[i]);
                items.push_back({scores.total_attention.col(col), scores.confidence(col), 0.0, train_seqs[i].label});
            }
            items[it->second].weight += 1.0;
        }
    }
    const ClusterModel clusters = fit_weighted(items, v, cfg.hp);
    r.clusters = clusters.cluster_count();

    // Cluster assignment for the distinct confident test contexts.
    std::unordered_map<std::size_t, int> cluster_of_slot;
    {
        std::vector<std::size_t> confident;
        for (auto s : test_slot) {
            if (s < 0) continue;
            const auto k = static_cast<std::size_t>(s);
            if (scores.confidence(static_cast<Eigen::Index>(k)) >= cfg.hp.tau_confidence &&
                cluster_of_slot.emplace(k, kNoise).second) {
                confident.push_back(k);
            }
        }
        Eigen::MatrixXd queries(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(confident.size()));
        for (std::size_t q = 0; q < confident.size(); ++q) {
            queries.col(static_cast<Eigen::Index>(q)) = scores.total_attention.col(static_cast<Eigen::Index>(confident[q]));
        }
        const auto assigned = assign_clusters(clusters, queries);
        for (std::size_t q = 0; q < confident.size(); ++q) cluster_of_slot[confident[q]] = assigned[q];
    }

    r.log.reserve(test_seqs.size());
    for (std::size_t i = 0; i < test_seqs.size(); ++i) {
        ClassificationOutcome o;
        if (test_slot[i] < 0) {
            o.tag = OutcomeTag::RejectedUnseenEvent;
        } else {
            const auto k = static_cast<std::size_t>(test_slot[i]);
            if (scores.confidence(static_cast<Eigen::Index>(k)) < cfg.hp.tau_confidence) {
                o.tag = OutcomeTag::RejectedLowConfidence;
            } else if (const int c = cluster_of_slot.at(k); c == kNoise) {
                o.tag = OutcomeTag::RejectedNoCluster;
            } else {
                o.tag = OutcomeTag::Labeled;
                o.cluster = c;
                o.label = clusters.cluster_label[static_cast<std::size_t>(c)];
            }
        }
        r.log.push_back({std::to_string(first_test_id + i), test_seqs[i].label, o});
    }
    r.vocab_size = v;
    for (const auto id : cfg.explain_ids) {
        if (id < first_test_id || id - first_test_id >= test_seqs.size()) continue;
        const auto s = test_slot[id - first_test_id];
        if (s < 0) continue;
        r.explanations.push_back({std::to_string(id), scores.total_attention.col(static_cast<Eigen::Index>(s)),
                                  test_seqs[id - first_test_id].context});
    }
    r.confusion = confusion_from(r.log);
    r.f1 = micro_macro_f1(r.confusion);
    r.relaxed = relaxed_prf(r.confusion);
    return r;
}

RunResult run_single(const LabDataset& d, const RunConfig& cfg, std::uint64_t seed) {
    const std::vector<Sequence>* seqs = &d.sequences;
    LabDataset rebuilt;
    if (cfg.hp.n != d.n || cfg.hp.t != d.t) {
        rebuilt = make_lab_dataset(d.alerts, cfg.hp.n, cfg.hp.t);
        seqs = &rebuilt.sequences;
    }
    const EventVocabulary& vocab = seqs == &d.sequences ? d.vocabulary : rebuilt.vocabulary;
    const Splits s = chronological_splits(*seqs, cfg.hyperopt_frac, cfg.train_frac);
    const auto train = balance_incidents(s.train, s.test, Rng::mix(seed, 0x6261), cfg.balance_tolerance);
    return evaluate_split(train, s.test, vocab, cfg, seed, s.hyperopt.size() + s.train.size());
}

double hyperopt_objective(const LabDataset& d, const RunConfig& cfg, const Hyperparameters& hp, std::uint64_t seed) {
    RunConfig trial = cfg;
    trial.hp = hp;
    std::vector<Sequence> prefix;
    EventVocabulary vocab;
    const auto cut = static_cast<std::size_t>(static_cast<double>(d.size()) * cfg.hyperopt_frac + 1e-9);
    if (hp.n == d.n && hp.t == d.t) {
        prefix.assign(d.sequences.begin(), d.sequences.begin() + static_cast<std::ptrdiff_t>(cut));
        vocab = d.vocabulary;
    } else {
        AlertDataset head;
        head.alerts.assign(d.alerts.alerts.begin(), d.alerts.alerts.begin() + static_cast<std::ptrdiff_t>(cut));
        vocab = build_vocabulary(head);
        prefix = build_sequences(head, vocab, hp.n, hp.t);
    }
    const std::size_t half = prefix.size() / 2;
    const std::vector<Sequence> first(prefix.begin(), prefix.begin() + static_cast<std::ptrdiff_t>(half));
    const std::vector<Sequence> second(prefix.begin() + static_cast<std::ptrdiff_t>(half), prefix.end());
    if (first.empty() || second.empty()) throw ValidationError("hyperopt split too small to halve");
    const bool balance = incident_fraction(second) > 0.0;
    const auto train = balance ? balance_incidents(first, second, Rng::mix(seed, 0x6862), cfg.balance_tolerance) : first;
    return evaluate_split(train, second, vocab, trial, seed).f1.macro;
}

SearchResult tune_hyperparameters(const LabDataset& d, const RunConfig& base, const Grid& g, const SearchBudget& b,
                                  std::size_t threads) {
    return random_search(
        g, b, [&](const Hyperparameters& hp) { return hyperopt_objective(d, base, hp, b.seed); }, threads);
}

}  // namespace alertlab
