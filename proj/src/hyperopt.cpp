#include "alertlab/hyperopt.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "alertlab/common.hpp"
#include "alertlab/parallel.hpp"

namespace alertlab {

namespace {

std::vector<double> steps(int first, int last) {
    std::vector<double> v;
    for (int k = first; k <= last; ++k) v.push_back(k / 20.0);
    return v;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

Grid Grid::standard() {
    Grid g;
    g.n = {10, 15, 20};
    g.t = {kDay, kWeek, kMonth};
    g.hidden_nodes = {32, 64, 128};
    g.delta = steps(0, 20);
    g.tau_confidence = steps(1, 20);
    g.epsilon = steps(1, 20);
    g.min_cluster_size = {5, 10, 20, 50};
    return g;
}

void Grid::validate() const {
    if (n.empty() || t.empty() || hidden_nodes.empty() || delta.empty() || tau_confidence.empty() ||
        epsilon.empty() || min_cluster_size.empty()) {
        throw ConfigError("grid: every hyperparameter needs at least one candidate value");
    }
}

std::uint64_t grid_cardinality(const Grid& g) {
    std::uint64_t c = 1;
    for (std::size_t len : {g.n.size(), g.t.size(), g.hidden_nodes.size(), g.delta.size(), g.tau_confidence.size(),
                            g.epsilon.size(), g.min_cluster_size.size()}) {
        c *= len;
    }
    return c;
}

Hyperparameters Grid::at(std::uint64_t index) const {
    if (index >= grid_cardinality(*this)) throw ValidationError("grid index out of range");
    auto digit = [&](std::size_t radix) {
        const auto d = static_cast<std::size_t>(index % radix);
        index /= radix;
        return d;
    };
    Hyperparameters hp;
    hp.n = n[digit(n.size())];
    hp.t = t[digit(t.size())];
    hp.hidden_nodes = hidden_nodes[digit(hidden_nodes.size())];
    hp.delta = delta[digit(delta.size())];
    hp.tau_confidence = tau_confidence[digit(tau_confidence.size())];
    hp.epsilon = epsilon[digit(epsilon.size())];
    hp.min_cluster_size = min_cluster_size[digit(min_cluster_size.size())];
    return hp;
}

std::vector<std::uint64_t> sample_without_replacement(std::uint64_t cardinality, std::size_t count, std::uint64_t seed) {
    // Fisher-Yates over a virtual identity array; only displaced slots are stored.
    Rng rng(seed);
    std::unordered_map<std::uint64_t, std::uint64_t> moved;
    auto value_at = [&](std::uint64_t i) {
        const auto it = moved.find(i);
        return it == moved.end() ? i : it->second;
    };
    const auto k = static_cast<std::size_t>(std::min<std::uint64_t>(count, cardinality));
    std::vector<std::uint64_t> out;
    out.reserve(k);
    for (std::uint64_t i = 0; i < k; ++i) {
        const std::uint64_t j = i + rng.below(cardinality - i);
        const std::uint64_t vi = value_at(i);
        const std::uint64_t vj = value_at(j);
        moved[j] = vi;
        out.push_back(vj);
    }
    return out;
}

SearchResult random_search(const Grid& g, const SearchBudget& b, const TrialEvaluator& eval, std::size_t threads) {
    g.validate();
    if (b.max_trials < 1) throw ConfigError("search budget must allow at least one trial");
    const auto points = sample_without_replacement(grid_cardinality(g), b.max_trials, b.seed);

    SearchResult r;
    r.trials.resize(points.size());
    parallel_for(points.size(), threads, [&](std::size_t i) {
        Trial& t = r.trials[i];
        t.trial = i;
        t.grid_index = points[i];
        t.hp = g.at(points[i]);
        try {
            t.macro_f1 = eval(t.hp);
            t.ok = std::isfinite(t.macro_f1);
            if (!t.ok) t.error = "non-finite score";
        } catch (const std::exception& e) {
            t.ok = false;
            t.error = e.what();
        }
    });

    bool found = false;
    for (const auto& t : r.trials) {
        if (t.ok && (!found || t.macro_f1 > r.best_score)) {
            found = true;
            r.best = t.hp;
            r.best_score = t.macro_f1;
            r.best_trial = t.trial;
        }
    }
    if (!found) {
        throw ComputeError("hyperparameter search: every trial failed" +
                           (r.trials.empty() ? std::string() : " (first: " + r.trials.front().error + ")"));
    }
    return r;
}

void write_trial_log(std::ostream& out, const SearchResult& r) {
    out << "# schema: alertlab.trials/1\n";
    out << "trial,n,t,hidden_nodes,delta,tau_confidence,epsilon,min_cluster_size,macro_f1,status\n";
    for (const auto& t : r.trials) {
        out << t.trial << ',' << t.hp.n << ',' << t.hp.t << ',' << t.hp.hidden_nodes << ',' << fmt(t.hp.delta) << ','
            << fmt(t.hp.tau_confidence) << ',' << fmt(t.hp.epsilon) << ',' << t.hp.min_cluster_size << ','
            << (t.ok ? fmt(t.macro_f1) : std::string()) << ',' << (t.ok ? "ok" : "failed") << '\n';
    }
}

void write_best_params(std::ostream& out, const Hyperparameters& hp, const std::string& dataset, double macro_f1) {
    out << "# schema: alertlab.best_params/1\n";
    out << "# dataset: " << dataset << '\n';
    out << "parameter,value\n";
    out << "n," << hp.n << '\n';
    out << "t," << hp.t << '\n';
    out << "hidden_nodes," << hp.hidden_nodes << '\n';
    out << "delta," << fmt(hp.delta) << '\n';
    out << "tau_confidence," << fmt(hp.tau_confidence) << '\n';
    out << "epsilon," << fmt(hp.epsilon) << '\n';
    out << "min_cluster_size," << hp.min_cluster_size << '\n';
    out << "macro_f1," << fmt(macro_f1) << '\n';
}

Hyperparameters parse_best_params(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#' || line == "parameter,value") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError("expected parameter,value", line_no);
        kv[line.substr(0, comma)] = line.substr(comma + 1);
    }
    Hyperparameters hp;
    auto get = [&](const char* key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw ValidationError(std::string("best-params file lacks '") + key + "'");
        return it->second;
    };
    try {
        hp.n = std::stoul(get("n"));
        hp.t = std::stoll(get("t"));
        hp.hidden_nodes = std::stoul(get("hidden_nodes"));
        hp.delta = std::stod(get("delta"));
        hp.tau_confidence = std::stod(get("tau_confidence"));
        hp.epsilon = std::stod(get("epsilon"));
        hp.min_cluster_size = std::stoul(get("min_cluster_size"));
    } catch (const std::logic_error&) {
        throw ValidationError("best-params file holds a malformed number");
    }
    hp.validate();
    return hp;
}

}  // namespace alertlab
