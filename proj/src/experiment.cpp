#include "alertlab/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "alertlab/parallel.hpp"

namespace alertlab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

fs::path resolve(const fs::path& p, const fs::path& base) {
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return base / p;
}

SyntheticConfig parse_synthetic(const json& j) {
    const std::string w = "source.synthetic";
    check_keys(j, w,
               {"n_rules", "n_hosts", "n_alerts", "rule_skew", "hosts_per_rule", "broad_rules", "burst_mean",
                "burst_gap", "n_scenarios", "alerts_per_scenario", "rules_per_scenario", "disjoint_incident_rules",
                "duration", "start_time", "max_scenario_gap", "scenario_start", "seed"});
    SyntheticConfig c;
    read(j, "n_rules", c.n_rules, w);
    read(j, "n_hosts", c.n_hosts, w);
    read(j, "n_alerts", c.n_alerts, w);
    read(j, "rule_skew", c.rule_skew, w);
    read(j, "hosts_per_rule", c.hosts_per_rule, w);
    read(j, "broad_rules", c.broad_rules, w);
    read(j, "burst_mean", c.burst_mean, w);
    read(j, "burst_gap", c.burst_gap, w);
    read(j, "n_scenarios", c.n_scenarios, w);
    read(j, "alerts_per_scenario", c.alerts_per_scenario, w);
    read(j, "rules_per_scenario", c.rules_per_scenario, w);
    read(j, "disjoint_incident_rules", c.disjoint_incident_rules, w);
    read(j, "duration", c.duration, w);
    read(j, "start_time", c.start_time, w);
    read(j, "max_scenario_gap", c.max_scenario_gap, w);
    read(j, "scenario_start", c.scenario_start, w);
    read(j, "seed", c.seed, w);
    return c;
}

json synthetic_json(const SyntheticConfig& c) {
    return json{{"n_rules", c.n_rules},
                {"n_hosts", c.n_hosts},
                {"n_alerts", c.n_alerts},
                {"rule_skew", c.rule_skew},
                {"hosts_per_rule", c.hosts_per_rule},
                {"broad_rules", c.broad_rules},
                {"burst_mean", c.burst_mean},
                {"burst_gap", c.burst_gap},
                {"n_scenarios", c.n_scenarios},
                {"alerts_per_scenario", c.alerts_per_scenario},
                {"rules_per_scenario", c.rules_per_scenario},
                {"disjoint_incident_rules", c.disjoint_incident_rules},
                {"duration", c.duration},
                {"start_time", c.start_time},
                {"max_scenario_gap", c.max_scenario_gap},
                {"scenario_start", c.scenario_start},
                {"seed", c.seed}};
}

Hyperparameters parse_hp(const json& j, Hyperparameters hp) {
    const std::string w = "hyperparameters";
    check_keys(j, w, {"n", "t", "hidden_nodes", "delta", "tau_confidence", "epsilon", "min_cluster_size"});
    read(j, "n", hp.n, w);
    read(j, "t", hp.t, w);
    read(j, "hidden_nodes", hp.hidden_nodes, w);
    read(j, "delta", hp.delta, w);
    read(j, "tau_confidence", hp.tau_confidence, w);
    read(j, "epsilon", hp.epsilon, w);
    read(j, "min_cluster_size", hp.min_cluster_size, w);
    return hp;
}

json hp_json(const Hyperparameters& hp) {
    return json{{"n", hp.n},
                {"t", hp.t},
                {"hidden_nodes", hp.hidden_nodes},
                {"delta", hp.delta},
                {"tau_confidence", hp.tau_confidence},
                {"epsilon", hp.epsilon},
                {"min_cluster_size", hp.min_cluster_size}};
}

std::string_view optimizer_name(Optimizer o) { return o == Optimizer::Adam ? "adam" : "sgd"; }

Optimizer parse_optimizer(const std::string& s) {
    if (s == "adam") return Optimizer::Adam;
    if (s == "sgd") return Optimizer::Sgd;
    throw ConfigError("train.optimizer: expected 'adam' or 'sgd', got '" + s + "'");
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double x = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return x;
    } catch (const std::exception&) {
        throw ParseError("not a number: '" + s + "'", line);
    }
}

std::uint64_t to_unsigned(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        if (!s.empty() && s.front() == '-') throw std::invalid_argument(s);
        const auto x = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return x;
    } catch (const std::exception&) {
        throw ParseError("not a non-negative integer: '" + s + "'", line);
    }
}

std::ofstream open_out(const fs::path& p) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + p.string() + "'");
    return out;
}

constexpr const char* kMetricsHeader =
    "dataset,run,seed,micro_f1,macro_f1,relaxed_p,relaxed_r,relaxed_f1,label_ir,event_ir,size,heterogeneity,"
    "dimensionality";

constexpr std::array<const char*, 3> kPredictedNames{"not_classified", "non_incident", "incident"};

struct Job {
    std::size_t dataset;
    std::size_t run;
};

}  // namespace

std::string_view to_string(ControlKind k) {
    switch (k) {
        case ControlKind::FilteringMethod: return "filtering_method";
        case ControlKind::DatasetSize: return "dataset_size";
        case ControlKind::Dimensionality: return "dimensionality";
        case ControlKind::Heterogeneity: return "heterogeneity";
    }
    throw ValidationError("unknown control kind");
}

ControlKind parse_control_kind(std::string_view text) {
    for (auto k : kAllControls) {
        if (to_string(k) == text) return k;
    }
    throw ConfigError("unknown control '" + std::string(text) + "'");
}

Hyperparameters desk_hyperparameters() {
    Hyperparameters hp;
    hp.hidden_nodes = 32;
    hp.tau_confidence = 0.2;
    hp.epsilon = 0.3;
    hp.min_cluster_size = 5;
    return hp;
}

TrainConfig desk_train_config() {
    TrainConfig tc;
    tc.epochs = 30;
    tc.optimizer = Optimizer::Adam;
    tc.learning_rate = 0.01;
    return tc;
}

std::vector<std::uint64_t> ExperimentConfig::run_seeds() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> out(repeats);
    for (std::size_t i = 0; i < repeats; ++i) out[i] = i + 1;
    return out;
}

void ExperimentConfig::validate() const {
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
    if (!seeds.empty() && seeds.size() != repeats) {
        throw ConfigError("seeds: expected " + std::to_string(repeats) + " entries, got " + std::to_string(seeds.size()));
    }
    if (!seeds.empty() && std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
        throw ConfigError("seeds must be distinct");
    }
    if (synthetic) {
        synthetic->validate();
    } else if (alerts.empty()) {
        throw ConfigError("source: either synthetic or alerts is required");
    }
    if (!plan) {
        for (const auto& f : filter_files) {
            if (f.empty()) throw ConfigError("tuning.filters: three filter files (high, medium, low) are required");
        }
    }
    std::set<ControlKind> seen;
    for (auto k : controls) {
        if (!seen.insert(k).second) throw ConfigError("controls: '" + std::string(to_string(k)) + "' listed twice");
    }
    try {
        hp.validate();
        train.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (hyperopt && hyperopt->max_trials < 1) throw ConfigError("hyperopt.max_trials must be >= 1");
    if (!(hyperopt_frac > 0.0 && train_frac > 0.0 && hyperopt_frac + train_frac < 1.0)) {
        throw ConfigError("splits: fractions must be positive and leave a test split");
    }
    if (!(balance_tolerance >= 0.0)) throw ConfigError("splits.balance_tolerance must be >= 0");
    if (output_dir.empty()) throw ConfigError("output_dir is required");
}

ExperimentConfig parse_experiment_config(std::istream& in, const fs::path& base_dir, const fs::path& output_root) {
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, "config",
               {"name", "source", "tuning", "controls", "control_seed", "hyperparameters", "hyperopt", "train",
                "splits", "repeats", "seeds", "threads", "write_classification_logs", "raters", "output_dir"});
    ExperimentConfig c;
    read(j, "name", c.name, "config");
    if (j.contains("source")) {
        const auto& s = j.at("source");
        check_keys(s, "source", {"synthetic", "alerts"});
        if (s.contains("synthetic") == s.contains("alerts")) {
            throw ConfigError("source: exactly one of 'synthetic' or 'alerts' is required");
        }
        if (s.contains("synthetic")) {
            c.synthetic = parse_synthetic(s.at("synthetic"));
        } else {
            c.synthetic.reset();
            std::string p;
            read(s, "alerts", p, "source");
            c.alerts = resolve(p, base_dir);
        }
    }
    if (j.contains("tuning")) {
        const auto& t = j.at("tuning");
        check_keys(t, "tuning", {"plan", "filters"});
        if (t.contains("plan") == t.contains("filters")) {
            throw ConfigError("tuning: exactly one of 'plan' or 'filters' is required");
        }
        if (t.contains("plan")) {
            const auto& p = t.at("plan");
            check_keys(p, "tuning.plan", {"high_per_host", "medium_rules", "low_rules"});
            TuningPlan plan;
            read(p, "high_per_host", plan.high_per_host, "tuning.plan");
            read(p, "medium_rules", plan.medium_rules, "tuning.plan");
            read(p, "low_rules", plan.low_rules, "tuning.plan");
            c.plan = plan;
        } else {
            std::vector<std::string> files;
            read(t, "filters", files, "tuning");
            if (files.size() != 3) throw ConfigError("tuning.filters: expected three files (high, medium, low)");
            c.plan.reset();
            for (std::size_t i = 0; i < 3; ++i) c.filter_files[i] = resolve(files[i], base_dir);
        }
    }
    if (j.contains("controls")) {
        std::vector<std::string> names;
        read(j, "controls", names, "config");
        c.controls.clear();
        for (const auto& n : names) c.controls.push_back(parse_control_kind(n));
    }
    read(j, "control_seed", c.control_seed, "config");
    if (j.contains("hyperparameters")) c.hp = parse_hp(j.at("hyperparameters"), c.hp);
    if (j.contains("hyperopt") && !j.at("hyperopt").is_null()) {
        const auto& h = j.at("hyperopt");
        check_keys(h, "hyperopt", {"max_trials", "seed"});
        SearchBudget b;
        read(h, "max_trials", b.max_trials, "hyperopt");
        read(h, "seed", b.seed, "hyperopt");
        c.hyperopt = b;
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        check_keys(t, "train", {"epochs", "batch_size", "learning_rate", "optimizer"});
        read(t, "epochs", c.train.epochs, "train");
        read(t, "batch_size", c.train.batch_size, "train");
        read(t, "learning_rate", c.train.learning_rate, "train");
        if (t.contains("optimizer")) {
            std::string o;
            read(t, "optimizer", o, "train");
            c.train.optimizer = parse_optimizer(o);
        }
    }
    if (j.contains("splits")) {
        const auto& s = j.at("splits");
        check_keys(s, "splits", {"hyperopt_frac", "train_frac", "balance_tolerance"});
        read(s, "hyperopt_frac", c.hyperopt_frac, "splits");
        read(s, "train_frac", c.train_frac, "splits");
        read(s, "balance_tolerance", c.balance_tolerance, "splits");
    }
    read(j, "repeats", c.repeats, "config");
    read(j, "seeds", c.seeds, "config");
    read(j, "threads", c.threads, "config");
    read(j, "write_classification_logs", c.write_classification_logs, "config");
    if (j.contains("raters")) {
        const auto& r = j.at("raters");
        check_keys(r, "raters", {"path", "dataset"});
        std::string p;
        read(r, "path", p, "raters");
        c.raters = resolve(p, base_dir);
        read(r, "dataset", c.rater_dataset, "raters");
    }
    if (j.contains("output_dir")) {
        std::string p;
        read(j, "output_dir", p, "config");
        c.output_dir = resolve(p, output_root.empty() ? base_dir : output_root);
    }
    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const fs::path& path, const fs::path& output_root) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    return parse_experiment_config(in, path.parent_path(), output_root);
}

std::string experiment_config_json(const ExperimentConfig& c) {
    json j;
    j["name"] = c.name;
    if (c.synthetic) {
        j["source"] = json{{"synthetic", synthetic_json(*c.synthetic)}};
    } else {
        j["source"] = json{{"alerts", c.alerts.string()}};
    }
    if (c.plan) {
        j["tuning"] = json{{"plan", json{{"high_per_host", c.plan->high_per_host},
                                         {"medium_rules", c.plan->medium_rules},
                                         {"low_rules", c.plan->low_rules}}}};
    } else {
        json files = json::array();
        for (const auto& f : c.filter_files) files.push_back(f.string());
        j["tuning"] = json{{"filters", files}};
    }
    json controls = json::array();
    for (auto k : c.controls) controls.push_back(std::string(to_string(k)));
    j["controls"] = controls;
    j["control_seed"] = c.control_seed;
    j["hyperparameters"] = hp_json(c.hp);
    j["hyperopt"] = c.hyperopt ? json{{"max_trials", c.hyperopt->max_trials}, {"seed", c.hyperopt->seed}} : json();
    j["train"] = json{{"epochs", c.train.epochs},
                      {"batch_size", c.train.batch_size},
                      {"learning_rate", c.train.learning_rate},
                      {"optimizer", std::string(optimizer_name(c.train.optimizer))}};
    j["splits"] = json{{"hyperopt_frac", c.hyperopt_frac},
                       {"train_frac", c.train_frac},
                       {"balance_tolerance", c.balance_tolerance}};
    j["repeats"] = c.repeats;
    j["seeds"] = c.run_seeds();
    j["threads"] = c.threads;
    j["write_classification_logs"] = c.write_classification_logs;
    if (!c.raters.empty()) j["raters"] = json{{"path", c.raters.string()}, {"dataset", c.rater_dataset}};
    j["output_dir"] = c.output_dir.string();
    return j.dump(2);
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
    out << "# schema: alertlab.metrics/1\n" << kMetricsHeader << '\n';
    for (const auto& r : rows) {
        out << r.dataset << ',' << r.run << ',' << r.seed << ',' << num(r.micro_f1) << ',' << num(r.macro_f1) << ','
            << num(r.relaxed_p) << ',' << num(r.relaxed_r) << ',' << num(r.relaxed_f1) << ',' << num(r.label_ir)
            << ',' << num(r.event_ir) << ',' << r.size << ',' << r.heterogeneity << ',' << r.dimensionality << '\n';
    }
}

std::vector<MetricsRow> parse_metrics_csv(std::istream& in) {
    std::vector<MetricsRow> rows;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            if (line != kMetricsHeader) throw ParseError("expected metrics header '" + std::string(kMetricsHeader) + "'", line_no);
            header = true;
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 13) throw ParseError("expected 13 fields, got " + std::to_string(f.size()), line_no);
        MetricsRow r;
        r.dataset = f[0];
        r.run = to_unsigned(f[1], line_no);
        r.seed = to_unsigned(f[2], line_no);
        r.micro_f1 = to_double(f[3], line_no);
        r.macro_f1 = to_double(f[4], line_no);
        r.relaxed_p = to_double(f[5], line_no);
        r.relaxed_r = to_double(f[6], line_no);
        r.relaxed_f1 = to_double(f[7], line_no);
        r.label_ir = to_double(f[8], line_no);
        r.event_ir = to_double(f[9], line_no);
        r.size = to_unsigned(f[10], line_no);
        r.heterogeneity = to_unsigned(f[11], line_no);
        r.dimensionality = to_unsigned(f[12], line_no);
        rows.push_back(std::move(r));
    }
    if (!header) throw ParseError("missing metrics header", line_no);
    return rows;
}

DesignMatrix design_from_metrics(const std::vector<MetricsRow>& rows) {
    DesignMatrix m;
    m.names = {"label_ir", "size", "heterogeneity", "dimensionality", "event_ir"};
    const auto n = static_cast<Eigen::Index>(rows.size());
    m.x.resize(n, 5);
    m.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        m.x.row(i) << r.label_ir, static_cast<double>(r.size), static_cast<double>(r.heterogeneity),
            static_cast<double>(r.dimensionality), r.event_ir;
        m.y(i) = r.relaxed_f1;
    }
    return m;
}

ConfusionSummary summarize(const std::vector<ConfusionMatrix>& runs) {
    if (runs.empty()) throw ValidationError("summarize: no confusion matrices");
    ConfusionSummary s;
    const auto n = static_cast<double>(runs.size());
    for (const auto& cm : runs) s.mean += cm;
    for (auto& row : s.mean.counts) {
        for (auto& x : row) x /= n;
    }
    if (runs.size() > 1) {
        for (std::size_t r = 0; r < 2; ++r) {
            for (std::size_t c = 0; c < 3; ++c) {
                double ss = 0.0;
                for (const auto& cm : runs) ss += (cm.counts[r][c] - s.mean.counts[r][c]) * (cm.counts[r][c] - s.mean.counts[r][c]);
                s.sd.counts[r][c] = std::sqrt(ss / (n - 1.0));
            }
        }
    }
    return s;
}

void write_confusion(std::ostream& out, const ConfusionMatrix& cm) {
    out << "# schema: alertlab.confusion/1\n";
    out << "true_label," << kPredictedNames[0] << ',' << kPredictedNames[1] << ',' << kPredictedNames[2] << '\n';
    for (auto truth : {Label::NonIncident, Label::Incident}) {
        const auto& row = cm.counts[static_cast<std::size_t>(truth)];
        out << to_string(truth) << ',' << num(row[0]) << ',' << num(row[1]) << ',' << num(row[2]) << '\n';
    }
}

ConfusionMatrix parse_confusion(std::istream& in) {
    ConfusionMatrix cm;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    std::set<Label> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto f = split_csv(line);
        if (!header) {
            if (f.size() != 4 || f[0] != "true_label" || f[1] != kPredictedNames[0] || f[2] != kPredictedNames[1] ||
                f[3] != kPredictedNames[2]) {
                throw ParseError("expected header 'true_label,not_classified,non_incident,incident'", line_no);
            }
            header = true;
            continue;
        }
        if (f.size() != 4) throw ParseError("expected 4 fields, got " + std::to_string(f.size()), line_no);
        Label truth;
        try {
            truth = parse_label(f[0]);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line_no);
        }
        if (!seen.insert(truth).second) throw ParseError("duplicate row for " + f[0], line_no);
        for (std::size_t c = 0; c < 3; ++c) {
            const double x = to_double(f[c + 1], line_no);
            if (!(x >= 0.0)) throw ParseError("negative count", line_no);
            cm.counts[static_cast<std::size_t>(truth)][c] = x;
        }
    }
    if (seen.size() != 2) throw ParseError("confusion matrix needs NonIncident and Incident rows", line_no);
    return cm;
}

void write_confusion_summary(std::ostream& out, const std::vector<std::pair<std::string, ConfusionSummary>>& rows) {
    out << "# schema: alertlab.confusion_summary/1\n";
    out << "dataset,true_label,statistic,not_classified,non_incident,incident\n";
    for (const auto& [name, s] : rows) {
        for (auto truth : {Label::Incident, Label::NonIncident}) {
            const auto r = static_cast<std::size_t>(truth);
            out << name << ',' << to_string(truth) << ",mean," << num(s.mean.counts[r][0]) << ','
                << num(s.mean.counts[r][1]) << ',' << num(s.mean.counts[r][2]) << '\n';
            out << name << ',' << to_string(truth) << ",sd," << num(s.sd.counts[r][0]) << ','
                << num(s.sd.counts[r][1]) << ',' << num(s.sd.counts[r][2]) << '\n';
        }
    }
}

void write_scatter(std::ostream& out, const std::vector<MetricsRow>& rows) {
    out << "# schema: alertlab.scatter/1\n";
    out << "dataset,run,label_ir,relaxed_f1,macro_f1\n";
    std::vector<std::string> order;
    std::map<std::string, std::array<double, 4>> sums;  // label_ir, relaxed, macro, count
    for (const auto& r : rows) {
        out << r.dataset << ',' << r.run << ',' << num(r.label_ir) << ',' << num(r.relaxed_f1) << ','
            << num(r.macro_f1) << '\n';
        auto [it, inserted] = sums.try_emplace(r.dataset, std::array<double, 4>{});
        if (inserted) order.push_back(r.dataset);
        it->second[0] += r.label_ir;
        it->second[1] += r.relaxed_f1;
        it->second[2] += r.macro_f1;
        it->second[3] += 1.0;
    }
    for (const auto& name : order) {
        const auto& s = sums.at(name);
        out << name << ",mean," << num(s[0] / s[3]) << ',' << num(s[1] / s[3]) << ',' << num(s[2] / s[3]) << '\n';
    }
}

void write_ecdf(std::ostream& out, const std::vector<CdfPoint>& cdf) {
    out << "# schema: alertlab.ecdf/1\n";
    out << "similarity,fraction\n";
    for (const auto& p : cdf) out << num(p.value) << ',' << num(p.fraction) << '\n';
}

void write_similarities(std::ostream& out, const ExplanationComparison& c) {
    out << "# schema: alertlab.similarities/1\n";
    for (const auto& id : c.missing_expert) out << "# missing_expert: " << id << '\n';
    for (const auto& id : c.missing_model) out << "# missing_model: " << id << '\n';
    for (const auto& e : c.errors) out << "# skipped: " << e << '\n';
    out << "seq_id,similarity\n";
    for (const auto& [id, s] : c.similarities) out << id << ',' << num(s) << '\n';
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto seeds = cfg.run_seeds();
    const std::size_t threads = cfg.threads == 0 ? default_threads() : cfg.threads;
    const fs::path& dir = cfg.output_dir;
    const bool write = !dir.empty();

    AlertDataset source = cfg.synthetic ? generate_stream(*cfg.synthetic) : parse_alerts(cfg.alerts);
    if (source.name.empty()) source.name = "unfiltered";
    std::array<RuleFilter, 3> filters;
    if (cfg.plan) {
        filters = suggest_filters(source, *cfg.plan);
    } else {
        for (std::size_t i = 0; i < 3; ++i) filters[i] = load_rule_filter(cfg.filter_files[i]);
    }
    TunedSuite suite = make_tuned_suite(source, filters);

    ExperimentResult result;
    result.tuned_ir_complement = suite.ir_complement;

    // Datasets in report order: unfiltered, tuned levels, then controls per kind and level.
    std::vector<LabDataset> labs;
    labs.reserve(4 + 3 * cfg.controls.size());
    auto add = [&](LabDataset lab, std::string name, std::string group, std::string level) {
        lab.alerts.name = name;
        result.datasets.push_back({std::move(name), std::move(group), std::move(level), lab_stats(lab), cfg.hp});
        labs.push_back(std::move(lab));
    };
    add(make_lab_dataset(std::move(source), cfg.hp.n, cfg.hp.t), "unfiltered", "unfiltered", "");
    for (std::size_t l = 0; l < 3; ++l) {
        add(make_lab_dataset(std::move(suite.levels[l]), cfg.hp.n, cfg.hp.t), kTunedLevelNames[l], "tuned",
            kTunedLevelNames[l]);
    }
    const LabDataset& unfiltered = labs[0];
    const DatasetStats base = result.datasets[0].stats;
    if (!base.label_ir_complement) throw ValidationError("source stream needs both Incident and NonIncident alerts");
    for (auto kind : cfg.controls) {
        for (std::size_t l = 0; l < 3; ++l) {
            const DatasetStats& tuned = result.datasets[1 + l].stats;
            const std::uint64_t seed = Rng::mix(cfg.control_seed, static_cast<std::uint64_t>(kind) * 16 + l);
            LabDataset lab;
            std::string target;
            switch (kind) {
                case ControlKind::FilteringMethod:
                    lab = control_filtering_method(unfiltered, tuned.size, seed);
                    target = "size=" + std::to_string(tuned.size);
                    break;
                case ControlKind::DatasetSize:
                    lab = control_dataset_size(unfiltered, tuned.size, *base.label_ir_complement, seed);
                    target = "size=" + std::to_string(tuned.size) + " ir_complement=" + num(*base.label_ir_complement);
                    break;
                case ControlKind::Dimensionality:
                    lab = control_dimensionality(unfiltered, tuned.dimensionality, seed);
                    target = "dimensionality=" + std::to_string(tuned.dimensionality);
                    break;
                case ControlKind::Heterogeneity:
                    lab = control_heterogeneity(unfiltered, tuned.heterogeneity.value_or(0), base.size, seed);
                    target = "heterogeneity=" + std::to_string(tuned.heterogeneity.value_or(0)) +
                             " size=" + std::to_string(base.size);
                    break;
            }
            const std::string name = std::string(to_string(kind)) + "_" + kTunedLevelNames[l];
            add(std::move(lab), name, std::string(to_string(kind)), kTunedLevelNames[l]);
            const auto& s = result.datasets.back().stats;
            result.provenance.push_back(
                {name, seed, target,
                 "size=" + std::to_string(s.size) + " dimensionality=" + std::to_string(s.dimensionality) +
                     " heterogeneity=" + std::to_string(s.heterogeneity.value_or(0)) +
                     " ir_complement=" + num(s.label_ir_complement.value_or(0.0))});
        }
    }

    RunConfig base_run;
    base_run.hp = cfg.hp;
    base_run.train = cfg.train;
    base_run.hyperopt_frac = cfg.hyperopt_frac;
    base_run.train_frac = cfg.train_frac;
    base_run.balance_tolerance = cfg.balance_tolerance;

    if (cfg.hyperopt) {
        std::vector<SearchResult> searches(labs.size());
        const Grid grid = Grid::standard();
        parallel_for(labs.size(), threads, [&](std::size_t d) {
            searches[d] = tune_hyperparameters(labs[d], base_run, grid, *cfg.hyperopt, 1);
        });
        for (std::size_t d = 0; d < labs.size(); ++d) {
            result.datasets[d].hp = searches[d].best;
            if (write) {
                auto trials = open_out(dir / "hyperopt" / (result.datasets[d].name + "_trials.csv"));
                write_trial_log(trials, searches[d]);
                auto best = open_out(dir / "hyperopt" / (result.datasets[d].name + "_best_params.txt"));
                write_best_params(best, searches[d].best, result.datasets[d].name, searches[d].best_score);
            }
        }
    }

    std::vector<std::size_t> explain_ids;
    std::vector<RaterVector> raters;
    std::size_t rater_dataset = labs.size();
    if (!cfg.raters.empty()) {
        std::ifstream in(cfg.raters);
        if (!in) throw ValidationError("cannot open rater file '" + cfg.raters.string() + "'");
        raters = parse_rater_file(in);
        for (std::size_t d = 0; d < labs.size(); ++d) {
            if (result.datasets[d].name == cfg.rater_dataset) rater_dataset = d;
        }
        if (rater_dataset == labs.size()) throw ConfigError("raters.dataset: unknown dataset '" + cfg.rater_dataset + "'");
        for (const auto& r : raters) {
            try {
                explain_ids.push_back(static_cast<std::size_t>(to_unsigned(r.seq_id, 0)));
            } catch (const ParseError&) {
                // Not a sequence index; reported as missing from the model side.
            }
        }
    }

    std::vector<Job> jobs;
    for (std::size_t d = 0; d < labs.size(); ++d) {
        for (std::size_t k = 0; k < seeds.size(); ++k) jobs.push_back({d, k});
    }
    result.metrics.resize(jobs.size());
    result.confusion.resize(jobs.size());
    std::vector<ExplanationInput> explanations;
    std::size_t explanation_vocab = 0;
    parallel_for(jobs.size(), threads, [&](std::size_t j) {
        const auto [d, k] = jobs[j];
        const auto& entry = result.datasets[d];
        RunConfig rc = base_run;
        rc.hp = entry.hp;
        const bool explain = d == rater_dataset && k == 0;
        if (explain) rc.explain_ids = explain_ids;
        RunResult r = run_single(labs[d], rc, seeds[k]);
        MetricsRow& m = result.metrics[j];
        m.dataset = entry.name;
        m.run = k;
        m.seed = seeds[k];
        m.micro_f1 = r.f1.micro;
        m.macro_f1 = r.f1.macro;
        m.relaxed_p = r.relaxed.precision;
        m.relaxed_r = r.relaxed.recall;
        m.relaxed_f1 = r.relaxed.f1;
        m.label_ir = entry.stats.label_ir.value_or(0.0);
        m.event_ir = entry.stats.event_ir.value_or(0.0);
        m.size = entry.stats.size;
        m.heterogeneity = entry.stats.heterogeneity.value_or(0);
        m.dimensionality = entry.stats.dimensionality;
        result.confusion[j] = r.confusion;
        if (explain) {
            explanations = std::move(r.explanations);
            explanation_vocab = r.vocab_size;
        }
        if (write) {
            const fs::path run_dir = dir / "runs" / entry.name / ("seed_" + std::to_string(seeds[k]));
            auto cm = open_out(run_dir / "confusion.csv");
            write_confusion(cm, r.confusion);
            if (cfg.write_classification_logs) {
                auto log = open_out(run_dir / "classification.csv");
                write_classification_log(log, r.log);
            }
        }
    });

    const std::size_t columns = 5;
    if (result.metrics.size() <= columns + 1) {
        result.regression_skipped = "too few runs (" + std::to_string(result.metrics.size()) + ") for the regression";
    } else {
        try {
            result.regression = regress(design_from_metrics(result.metrics));
        } catch (const ValidationError& e) {
            result.regression_skipped = e.what();
        }
    }

    if (!cfg.raters.empty()) result.explanations = compare_explanations(explanations, raters, explanation_vocab);

    if (write) {
        {
            auto out = open_out(dir / "metrics.csv");
            write_metrics_csv(out, result.metrics);
        }
        {
            std::vector<std::pair<std::string, ConfusionSummary>> rows;
            for (std::size_t d = 0; d < labs.size(); ++d) {
                std::vector<ConfusionMatrix> runs(result.confusion.begin() + static_cast<std::ptrdiff_t>(d * seeds.size()),
                                                  result.confusion.begin() + static_cast<std::ptrdiff_t>((d + 1) * seeds.size()));
                rows.emplace_back(result.datasets[d].name, summarize(runs));
            }
            auto out = open_out(dir / "confusion_summary.csv");
            write_confusion_summary(out, rows);
        }
        {
            auto out = open_out(dir / "regression.csv");
            if (result.regression) {
                write_regression_report(out, *result.regression);
            } else {
                out << "# schema: alertlab.regression/1\n# skipped: " << result.regression_skipped << '\n';
            }
        }
        {
            auto out = open_out(dir / "scatter.csv");
            write_scatter(out, result.metrics);
        }
        {
            auto out = open_out(dir / "provenance.csv");
            write_provenance(out, result.provenance);
        }
        for (std::size_t l = 0; l < 3; ++l) {
            auto out = open_out(dir / "filters" / (std::string(kTunedLevelNames[l]) + ".txt"));
            write_rule_filter(out, filters[l]);
        }
        if (result.explanations) {
            auto out = open_out(dir / "similarities.csv");
            write_similarities(out, *result.explanations);
            std::vector<double> values;
            for (const auto& [id, s] : result.explanations->similarities) values.push_back(s);
            if (!values.empty()) {
                auto ecdf = open_out(dir / "ecdf.csv");
                write_ecdf(ecdf, empirical_cdf(values));
            }
        }
        json manifest;
        manifest["schema"] = "alertlab.manifest/1";
        manifest["config"] = json::parse(experiment_config_json(cfg));
        manifest["seeds"] = seeds;
        json tuned = json::array();
        for (std::size_t l = 0; l < 3; ++l) {
            tuned.push_back(json{{"level", kTunedLevelNames[l]}, {"label_ir_complement", suite.ir_complement[l]}});
        }
        manifest["tuned_suite"] = tuned;
        json datasets = json::array();
        for (const auto& e : result.datasets) {
            json s{{"name", e.name},
                   {"group", e.group},
                   {"level", e.level},
                   {"size", e.stats.size},
                   {"incidents", e.stats.incidents},
                   {"dimensionality", e.stats.dimensionality},
                   {"heterogeneity", e.stats.heterogeneity.value_or(0)},
                   {"label_ir", e.stats.label_ir.value_or(0.0)},
                   {"label_ir_complement", e.stats.label_ir_complement.value_or(0.0)},
                   {"event_ir", e.stats.event_ir.value_or(0.0)},
                   {"hyperparameters", hp_json(e.hp)}};
            datasets.push_back(std::move(s));
        }
        manifest["datasets"] = datasets;
        auto out = open_out(dir / "manifest.json");
        out << manifest.dump(2) << '\n';
    }
    return result;
}

}  // namespace alertlab
