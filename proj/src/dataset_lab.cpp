#include "alertlab/dataset_lab.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "alertlab/metrics.hpp"

namespace alertlab {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Weighted sampling with point updates in O(log n).
class FenwickSampler {
public:
    explicit FenwickSampler(const std::vector<double>& weights) : tree_(weights.size() + 1, 0.0), value_(weights) {
        for (std::size_t i = 0; i < weights.size(); ++i) add(i, weights[i]);
    }

    void set(std::size_t i, double w) {
        add(i, w - value_[i]);
        value_[i] = w;
    }

    double total() const {
        double s = 0.0;
        for (std::size_t i = value_.size(); i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }

    // Index whose cumulative weight interval contains u * total.
    std::size_t sample(Rng& rng) const {
        double target = rng.uniform() * total();
        std::size_t pos = 0;
        std::size_t step = 1;
        while (step * 2 <= value_.size()) step *= 2;
        for (; step > 0; step /= 2) {
            if (pos + step <= value_.size() && tree_[pos + step] <= target) {
                pos += step;
                target -= tree_[pos];
            }
        }
        // Rounding can land on a zero-weight slot; move to the nearest positive one.
        std::size_t i = std::min(pos, value_.size() - 1);
        if (value_[i] > 0.0) return i;
        for (std::size_t k = i; k-- > 0;) {
            if (value_[k] > 0.0) return k;
        }
        for (std::size_t k = i + 1; k < value_.size(); ++k) {
            if (value_[k] > 0.0) return k;
        }
        throw ComputeError("weighted sampling over an empty population");
    }

private:
    void add(std::size_t i, double delta) {
        for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
    }

    std::vector<double> tree_;
    std::vector<double> value_;
};

LabDataset keep_sequences(const LabDataset& d, const std::vector<std::size_t>& copies) {
    LabDataset out;
    out.alerts.name = d.alerts.name;
    out.vocabulary = d.vocabulary;
    out.n = d.n;
    out.t = d.t;
    for (std::size_t i = 0; i < copies.size(); ++i) {
        for (std::size_t c = 0; c < copies[i]; ++c) {
            out.alerts.alerts.push_back(d.alerts.alerts[i]);
            out.sequences.push_back(d.sequences[i]);
        }
    }
    return out;
}

void check_aligned(const LabDataset& d) {
    if (d.alerts.size() != d.sequences.size()) throw ValidationError("lab dataset: alerts and sequences are not aligned");
}

double label_ir_complement_of(std::size_t size, std::size_t incidents) {
    if (incidents == 0 || incidents == size) return 0.0;
    return imbalance_complement(ClassCounts({size - incidents, incidents}));
}

std::size_t incident_sequences(const std::vector<Sequence>& seqs) {
    return static_cast<std::size_t>(
        std::count_if(seqs.begin(), seqs.end(), [](const Sequence& s) { return s.label == Label::Incident; }));
}

// Indices of alerts that are Incident or appear in the context of an Incident alert.
std::vector<char> incident_context_alerts(const AlertDataset& d, std::size_t n, std::int64_t t) {
    std::vector<char> keep(d.size(), 0);
    std::unordered_map<std::string, std::deque<std::size_t>> history;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& a = d.alerts[i];
        auto& past = history[a.host_id];
        while (!past.empty() && d.alerts[past.front()].timestamp <= a.timestamp - t) past.pop_front();
        if (a.label == Label::Incident) {
            keep[i] = 1;
            std::size_t taken = 0;
            for (auto it = past.rbegin(); it != past.rend() && taken < n; ++it) {
                if (d.alerts[*it].timestamp >= a.timestamp) continue;
                keep[*it] = 1;
                ++taken;
            }
        }
        past.push_back(i);
        std::size_t newest = 0;
        for (auto it = past.rbegin(); it != past.rend() && d.alerts[*it].timestamp == a.timestamp; ++it) ++newest;
        while (past.size() > newest + n) past.pop_front();
    }
    return keep;
}

}  // namespace

bool RuleFilter::matches(const AlertRecord& a) const {
    return global_rules.count(a.rule_id) > 0 || per_host.count({a.rule_id, a.host_id}) > 0;
}

RuleFilter parse_rule_filter(std::istream& in) {
    RuleFilter f;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError("expected 'global:' or 'perhost:' entry", line_no);
        const std::string kind = trim(std::string_view(line).substr(0, colon));
        const std::string value = trim(std::string_view(line).substr(colon + 1));
        if (kind == "global") {
            if (value.empty() || value.find(',') != std::string::npos) throw ParseError("global entry needs one rule_id", line_no);
            f.global_rules.insert(value);
        } else if (kind == "perhost") {
            const auto comma = value.find(',');
            if (comma == std::string::npos) throw ParseError("perhost entry needs rule_id,host_id", line_no);
            std::string rule = trim(std::string_view(value).substr(0, comma));
            std::string host = trim(std::string_view(value).substr(comma + 1));
            if (rule.empty() || host.empty() || host.find(',') != std::string::npos) {
                throw ParseError("perhost entry needs rule_id,host_id", line_no);
            }
            f.per_host.emplace(std::move(rule), std::move(host));
        } else {
            throw ParseError("unknown filter kind '" + kind + "'", line_no);
        }
    }
    return f;
}

RuleFilter load_rule_filter(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open filter file " + path.string());
    return parse_rule_filter(in);
}

void write_rule_filter(std::ostream& out, const RuleFilter& f) {
    out << "# schema: alertlab.filter/1\n";
    for (const auto& r : f.global_rules) out << "global: " << r << '\n';
    for (const auto& [r, h] : f.per_host) out << "perhost: " << r << ',' << h << '\n';
}

AlertDataset apply_rule_filter(const AlertDataset& d, const RuleFilter& f) {
    AlertDataset out;
    out.name = d.name;
    out.alerts.reserve(d.size());
    for (const auto& a : d.alerts) {
        if (!f.matches(a)) out.alerts.push_back(a);
    }
    return out;
}

std::array<RuleFilter, 3> suggest_filters(const AlertDataset& d, const TuningPlan& plan) {
    std::set<std::string> incident_rules;
    std::map<std::string, std::size_t> per_rule;
    std::map<std::pair<std::string, std::string>, std::size_t> per_pair;
    for (const auto& a : d.alerts) {
        if (a.label == Label::Incident) incident_rules.insert(a.rule_id);
        ++per_rule[a.rule_id];
        ++per_pair[{a.rule_id, a.host_id}];
    }
    // Most frequent first, ties by name for determinism.
    auto ranked = [&](const auto& counts) {
        using Key = typename std::decay_t<decltype(counts)>::key_type;
        std::vector<std::pair<Key, std::size_t>> v;
        for (const auto& [k, c] : counts) {
            const std::string& rule = [&]() -> const std::string& {
                if constexpr (std::is_same_v<Key, std::string>) return k;
                else return k.first;
            }();
            if (!incident_rules.count(rule)) v.emplace_back(k, c);
        }
        std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        return v;
    };
    const auto rules = ranked(per_rule);
    const auto pairs = ranked(per_pair);

    std::array<RuleFilter, 3> out;
    for (std::size_t i = 0; i < std::min(plan.high_per_host, pairs.size()); ++i) out[0].per_host.insert(pairs[i].first);
    for (std::size_t i = 0; i < std::min(plan.medium_rules, rules.size()); ++i) out[1].global_rules.insert(rules[i].first);
    for (std::size_t i = 0; i < std::min(plan.low_rules, rules.size()); ++i) out[2].global_rules.insert(rules[i].first);
    return out;
}

TunedSuite make_tuned_suite(const AlertDataset& d, const std::array<RuleFilter, 3>& levels) {
    TunedSuite suite;
    for (std::size_t i = 0; i < 3; ++i) {
        suite.levels[i] = apply_rule_filter(d, levels[i]);
        suite.levels[i].name = d.name.empty() ? kTunedLevelNames[i] : d.name + "_" + kTunedLevelNames[i];
        suite.ir_complement[i] = label_ir_complement_of(suite.levels[i].size(), suite.levels[i].incident_count());
    }
    bool ok = true;
    for (std::size_t i = 0; i < 3; ++i) ok = ok && suite.ir_complement[i] > 0.0;
    for (std::size_t i = 1; ok && i < 3; ++i) {
        ok = std::floor(std::log10(suite.ir_complement[i])) > std::floor(std::log10(suite.ir_complement[i - 1]));
    }
    if (!ok) {
        std::ostringstream os;
        os << "tuned suite must span distinct orders of magnitude in 1-IR; achieved";
        for (std::size_t i = 0; i < 3; ++i) os << ' ' << kTunedLevelNames[i] << '=' << suite.ir_complement[i];
        throw ConfigError(os.str());
    }
    return suite;
}

LabDataset make_lab_dataset(AlertDataset d, std::size_t n, std::int64_t t) {
    LabDataset out;
    out.vocabulary = build_vocabulary(d);
    out.sequences = build_sequences(d, out.vocabulary, n, t);
    out.alerts = std::move(d);
    out.n = n;
    out.t = t;
    return out;
}

DatasetStats lab_stats(const LabDataset& d) { return dataset_stats(d.alerts, &d.sequences); }

LabDataset control_filtering_method(const LabDataset& d, std::size_t target_size, std::uint64_t seed) {
    check_aligned(d);
    const std::size_t incidents = incident_sequences(d.sequences);
    if (target_size < incidents || target_size > d.size()) {
        throw ValidationError("filtering-method control: target size " + std::to_string(target_size) +
                              " outside [" + std::to_string(incidents) + ", " + std::to_string(d.size()) + "]");
    }
    std::vector<std::size_t> removable;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.sequences[i].label != Label::Incident) removable.push_back(i);
    }
    Rng rng(seed);
    std::vector<std::size_t> copies(d.size(), 1);
    const std::size_t drop = d.size() - target_size;
    for (std::size_t k = 0; k < drop; ++k) {
        const auto j = k + static_cast<std::size_t>(rng.below(removable.size() - k));
        std::swap(removable[k], removable[j]);
        copies[removable[k]] = 0;
    }
    return keep_sequences(d, copies);
}

LabDataset control_dataset_size(const LabDataset& d, std::size_t target_size, double unfiltered_ir_complement,
                                std::uint64_t seed) {
    LabDataset out = control_filtering_method(d, target_size, seed);
    std::vector<std::size_t> incidents;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out.sequences[i].label == Label::Incident) incidents.push_back(i);
    }
    std::size_t size = out.size();
    std::size_t left = incidents.size();
    // Removing Incident sequences raises the label IR, i.e. lowers 1 - IR.
    std::size_t drop = 0;
    while (left > 0 && label_ir_complement_of(size, left) > unfiltered_ir_complement) {
        --left;
        --size;
        ++drop;
    }
    if (left == 0) {
        throw ValidationError("dataset-size control: label IR target unreachable before exhausting incidents");
    }
    Rng rng(Rng::mix(seed, 0x6473));
    std::vector<std::size_t> copies(out.size(), 1);
    for (std::size_t k = 0; k < drop; ++k) {
        const auto j = k + static_cast<std::size_t>(rng.below(incidents.size() - k));
        std::swap(incidents[k], incidents[j]);
        copies[incidents[k]] = 0;
    }
    return keep_sequences(out, copies);
}

LabDataset control_dimensionality(const LabDataset& d, std::size_t target_dimensionality, std::uint64_t seed) {
    check_aligned(d);
    const auto& alerts = d.alerts.alerts;
    const std::vector<char> locked = incident_context_alerts(d.alerts, d.n, d.t);

    std::map<std::string, std::size_t> type_index;
    for (const auto& a : alerts) type_index.emplace(a.rule_id, 0);
    std::size_t k = 0;
    for (auto& [rule, idx] : type_index) idx = k++;
    const std::size_t types = type_index.size();

    std::vector<double> count(types, 0.0);
    std::vector<std::vector<std::size_t>> removable(types);
    std::vector<char> has_locked(types, 0);
    for (std::size_t i = 0; i < alerts.size(); ++i) {
        const auto ti = type_index.at(alerts[i].rule_id);
        count[ti] += 1.0;
        if (locked[i]) has_locked[ti] = 1;
        else removable[ti].push_back(i);
    }
    if (target_dimensionality > types) {
        throw ValidationError("dimensionality control: target exceeds current dimensionality " + std::to_string(types));
    }
    const auto erasable = static_cast<std::size_t>(std::count(has_locked.begin(), has_locked.end(), 0));
    if (types - target_dimensionality > erasable) {
        throw ValidationError("dimensionality control: target " + std::to_string(target_dimensionality) +
                              " unreachable without touching incident alerts");
    }

    // Per-alert weight (a_c / a_i)^2; a_c is common to all alerts and cancels.
    auto type_weight = [&](std::size_t ti) {
        return count[ti] > 0.0 ? static_cast<double>(removable[ti].size()) / (count[ti] * count[ti]) : 0.0;
    };
    std::vector<double> w(types);
    for (std::size_t ti = 0; ti < types; ++ti) w[ti] = type_weight(ti);
    FenwickSampler sampler(w);
    Rng rng(seed);
    std::vector<char> removed(alerts.size(), 0);
    std::size_t dimensionality = types;
    while (dimensionality > target_dimensionality) {
        const std::size_t ti = sampler.sample(rng);
        auto& pool = removable[ti];
        const auto j = static_cast<std::size_t>(rng.below(pool.size()));
        removed[pool[j]] = 1;
        pool[j] = pool.back();
        pool.pop_back();
        count[ti] -= 1.0;
        if (count[ti] == 0.0) --dimensionality;
        sampler.set(ti, type_weight(ti));
    }

    AlertDataset kept;
    kept.name = d.alerts.name;
    for (std::size_t i = 0; i < alerts.size(); ++i) {
        if (!removed[i]) kept.alerts.push_back(alerts[i]);
    }
    return make_lab_dataset(std::move(kept), d.n, d.t);
}

LabDataset control_heterogeneity(const LabDataset& d, std::size_t target_heterogeneity, std::size_t target_size,
                                 std::uint64_t seed) {
    check_aligned(d);
    std::unordered_map<std::vector<EventIndex>, std::size_t, ContextHash> group_of;
    std::vector<std::size_t> group(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        group[i] = group_of.emplace(d.sequences[i].context, group_of.size()).first->second;
    }
    const std::size_t groups = group_of.size();
    if (target_heterogeneity > groups) {
        throw ValidationError("heterogeneity control: target " + std::to_string(target_heterogeneity) +
                              " exceeds current heterogeneity " + std::to_string(groups));
    }
    std::vector<double> members(groups, 0.0);
    std::vector<std::vector<std::size_t>> removable(groups);
    std::vector<char> has_incident(groups, 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        members[group[i]] += 1.0;
        if (d.sequences[i].label == Label::Incident) has_incident[group[i]] = 1;
        else removable[group[i]].push_back(i);
    }
    const auto erasable = static_cast<std::size_t>(std::count(has_incident.begin(), has_incident.end(), 0));
    if (groups - target_heterogeneity > erasable) {
        throw ValidationError("heterogeneity control: target " + std::to_string(target_heterogeneity) +
                              " unreachable without removing incident sequences");
    }
    if (target_heterogeneity == 0 || target_size == 0) throw ValidationError("heterogeneity control: targets must be positive");

    // Per-sequence weight (s_i / s_c)^2; s_c cancels in the normalization.
    auto group_weight = [&](std::size_t g) { return static_cast<double>(removable[g].size()) * members[g] * members[g]; };
    std::vector<double> w(groups);
    for (std::size_t g = 0; g < groups; ++g) w[g] = group_weight(g);
    FenwickSampler sampler(w);
    Rng rng(seed);
    std::vector<std::size_t> copies(d.size(), 1);
    std::size_t heterogeneity = groups;
    std::size_t alive = d.size();
    while (heterogeneity > target_heterogeneity) {
        const std::size_t g = sampler.sample(rng);
        auto& pool = removable[g];
        const auto j = static_cast<std::size_t>(rng.below(pool.size()));
        copies[pool[j]] = 0;
        pool[j] = pool.back();
        pool.pop_back();
        members[g] -= 1.0;
        --alive;
        if (members[g] == 0.0) --heterogeneity;
        sampler.set(g, group_weight(g));
    }

    // Duplicates come from the surviving NonIncident sequences so that the
    // incident count, and with the source size the label IR, stays put.
    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (copies[i] && d.sequences[i].label != Label::Incident) survivors.push_back(i);
    }
    if (target_size < alive) {
        throw ValidationError("heterogeneity control: target size " + std::to_string(target_size) +
                              " below the " + std::to_string(alive) + " surviving sequences");
    }
    if (target_size > alive && survivors.empty()) {
        throw ValidationError("heterogeneity control: no NonIncident sequence survives to upsample");
    }
    Rng up(Rng::mix(seed, 0x7570));
    for (std::size_t k = alive; k < target_size; ++k) ++copies[survivors[static_cast<std::size_t>(up.below(survivors.size()))]];
    return keep_sequences(d, copies);
}

void write_provenance(std::ostream& out, const std::vector<ProvenanceRow>& rows) {
    out << "# schema: alertlab.provenance/1\n";
    out << "generator,seed,target,achieved\n";
    for (const auto& r : rows) out << r.generator << ',' << r.seed << ',' << r.target << ',' << r.achieved << '\n';
}

Splits chronological_splits(const std::vector<Sequence>& seqs, double hyperopt_frac, double train_frac) {
    if (!(hyperopt_frac >= 0.0 && hyperopt_frac < 1.0) || !(train_frac > 0.0 && train_frac < 1.0)) {
        throw ConfigError("split fractions must lie in [0, 1)");
    }
    const std::size_t n = seqs.size();
    const auto h = static_cast<std::size_t>(std::floor(static_cast<double>(n) * hyperopt_frac + 1e-9));
    const auto tr = static_cast<std::size_t>(std::floor(static_cast<double>(n - h) * train_frac + 1e-9));
    if (tr == 0 || n - h - tr == 0 || (hyperopt_frac > 0.0 && h == 0)) {
        throw ValidationError("too few sequences (" + std::to_string(n) + ") for non-empty splits");
    }
    Splits s;
    s.hyperopt.assign(seqs.begin(), seqs.begin() + static_cast<std::ptrdiff_t>(h));
    s.train.assign(seqs.begin() + static_cast<std::ptrdiff_t>(h), seqs.begin() + static_cast<std::ptrdiff_t>(h + tr));
    s.test.assign(seqs.begin() + static_cast<std::ptrdiff_t>(h + tr), seqs.end());
    return s;
}

double incident_fraction(const std::vector<Sequence>& seqs) {
    if (seqs.empty()) return 0.0;
    return static_cast<double>(incident_sequences(seqs)) / static_cast<double>(seqs.size());
}

std::vector<Sequence> balance_incidents(const std::vector<Sequence>& train, const std::vector<Sequence>& test,
                                        std::uint64_t seed, double tolerance) {
    if (!(tolerance >= 0.0 && tolerance < 1.0)) throw ConfigError("balance tolerance must lie in [0, 1)");
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (test[i].label == Label::Incident) pool.push_back(i);
    }
    if (pool.empty()) throw ValidationError("balance_incidents: test split has no Incident sequences");
    const double goal = incident_fraction(test) * (1.0 - tolerance);
    std::vector<Sequence> out = train;
    std::size_t incidents = incident_sequences(train);
    Rng rng(seed);
    while (static_cast<double>(incidents) < goal * static_cast<double>(out.size())) {
        out.push_back(test[pool[static_cast<std::size_t>(rng.below(pool.size()))]]);
        ++incidents;
    }
    return out;
}

}  // namespace alertlab
