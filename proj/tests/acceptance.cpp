// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "alertlab/analysis.hpp"
#include "alertlab/attention.hpp"
#include "alertlab/dataset_lab.hpp"
#include "alertlab/experiment.hpp"
#include "alertlab/interpreter.hpp"
#include "alertlab/metrics.hpp"
#include "published_matrices.hpp"
#include "oracles.hpp"

using namespace alertlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back((ok ? "" : "NOT ") + what);
    }
    void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ValidationError("cannot read '" + p.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 1 - IR of a two-class dataset from the closed form 2 / (a/b + b/a).
double complement_oracle(double size, double incidents) {
    const double a = size - incidents;
    return 2.0 / (a / incidents + incidents / a);
}

std::size_t incidents_of(const LabDataset& d) {
    std::size_t k = 0;
    for (const auto& s : d.sequences) k += s.label == Label::Incident;
    return k;
}

Outcome ir_fidelity() {
    Outcome o;
    const double a = imbalance_complement(ClassCounts({115000000 - 227, 227}));
    const double b = imbalance_complement(ClassCounts({24500000 - 616, 616}));
    o.check(a >= 3.5e-6 && a <= 4.5e-6, "1-IR(115M; 227) = " + fmt("%.4g", a) + " in [3.5e-6, 4.5e-6]");
    o.check(b >= 4.5e-5 && b <= 5.5e-5, "1-IR(24.5M; 616) = " + fmt("%.4g", b) + " in [4.5e-5, 5.5e-5]");
    return o;
}

Outcome published_matrix_arithmetic() {
    Outcome o;
    std::map<std::string, double> f1;
    for (const auto& t : published::tables()) {
        f1[t.name] = relaxed_prf(t.mean).f1;
        o.note(t.name + " " + fmt("%.5f", f1[t.name]));
    }
    o.check(std::abs(f1["unfiltered"] - 0.0116) <= 0.0005, "unfiltered relaxed F1 within 0.0116 +- 0.0005");
    o.check(f1["low_ir"] > f1["medium_ir"], "low > medium");
    o.check(f1["medium_ir"] > f1["high_ir"], "medium > high");
    o.check(f1["high_ir"] > f1["unfiltered"], "high > unfiltered");
    return o;
}

struct DeskRun {
    ExperimentResult result;
    double seconds = 0.0;
};

const DeskRun& desk_run(const fs::path& work) {
    static const DeskRun run = [&] {
        ExperimentConfig cfg;
        cfg.name = "desk";
        cfg.write_classification_logs = false;
        cfg.output_dir = work / "desk";
        const auto start = std::chrono::steady_clock::now();
        DeskRun r;
        r.result = run_experiment(cfg);
        r.seconds = seconds_since(start);
        return r;
    }();
    return run;
}

Outcome trend_reproduction(const fs::path& work) {
    Outcome o;
    const auto& run = desk_run(work);
    const auto& r = run.result;
    const auto& ir = r.tuned_ir_complement;
    o.note("1-IR high " + fmt("%.3g", ir[0]) + " medium " + fmt("%.3g", ir[1]) + " low " + fmt("%.3g", ir[2]));
    o.check(ir[2] / ir[0] >= 100.0, "tuned suite spans >= 2 orders of magnitude of 1-IR");
    std::map<std::string, std::pair<double, double>> mean;  // relaxed, macro
    std::map<std::string, std::size_t> runs;
    for (const auto& m : r.metrics) {
        mean[m.dataset].first += m.relaxed_f1;
        mean[m.dataset].second += m.macro_f1;
        ++runs[m.dataset];
    }
    for (auto& [name, v] : mean) {
        v.first /= static_cast<double>(runs[name]);
        v.second /= static_cast<double>(runs[name]);
    }
    for (const char* name : {"unfiltered", "high_ir", "medium_ir", "low_ir"}) {
        o.note(std::string(name) + " relaxed " + fmt("%.4f", mean[name].first) + " macro " + fmt("%.4f", mean[name].second));
    }
    o.check(runs["high_ir"] == 5 && runs["medium_ir"] == 5 && runs["low_ir"] == 5, "5 seeds per tuned level");
    o.check(mean["high_ir"].first < mean["medium_ir"].first && mean["medium_ir"].first < mean["low_ir"].first,
            "relaxed F1 strictly increases high < medium < low");
    o.check(mean["high_ir"].second < mean["medium_ir"].second && mean["medium_ir"].second < mean["low_ir"].second,
            "macro F1 strictly increases high < medium < low");
    o.check(run.seconds <= 15 * 60, "runtime " + fmt("%.0f", run.seconds) + " s <= 900 s");
    return o;
}

Outcome regression_attribution(const fs::path& work) {
    Outcome o;
    const auto& r = desk_run(work).result;
    o.check(r.metrics.size() >= 80, std::to_string(r.metrics.size()) + " runs >= 80");
    if (!r.regression) {
        o.check(false, "regression fitted (" + r.regression_skipped + ")");
        return o;
    }
    const auto& reg = *r.regression;
    for (const auto& [name, vif] : reg.dropped) o.note("dropped " + name + " VIF " + fmt("%.3g", vif));
    const Coefficient* label = nullptr;
    double largest_other = 0.0;
    for (const auto& t : reg.terms) {
        if (t.term == "intercept") continue;
        o.note(t.term + " " + fmt("%+.3f", t.coef) + " p " + fmt("%.3g", t.p));
        if (t.term == "label_ir") {
            label = &t;
        } else {
            largest_other = std::max(largest_other, std::abs(t.coef));
        }
    }
    o.check(label != nullptr, "label_ir retained");
    if (label) {
        o.check(label->coef < 0.0, "label_ir coefficient negative");
        o.check(label->p < 0.05, "label_ir significant");
        o.check(std::abs(label->coef) > largest_other, "label_ir largest in magnitude");
    }

    auto design = design_from_metrics(r.metrics);
    design.names.push_back("planted");
    design.x.conservativeResize(Eigen::NoChange, design.x.cols() + 1);
    design.x.col(design.x.cols() - 1) = 2.0 * design.x.col(0).array() + 1.0;
    const auto planted = regress(design);
    bool dropped = false;
    for (const auto& [name, vif] : planted.dropped) dropped |= name == "planted" && vif > 10.0;
    o.check(dropped, "planted collinear predictor dropped with VIF > 10");
    return o;
}

Outcome gradient_correctness() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::size_t params = 0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const auto g = oracle::check_gradient(oracle::random_gradient_case(s));
        worst = std::max(worst, g.max_rel_error);
        params += g.parameters;
    }
    const double secs = seconds_since(start);
    o.check(worst < 1e-4, "max relative error " + fmt("%.3g", worst) + " < 1e-4 over " + std::to_string(params) +
                              " parameters");
    o.check(secs < 60.0, "runtime " + fmt("%.2f", secs) + " s < 60 s");
    return o;
}

Outcome clustering_oracle() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    std::size_t matched = 0;
    for (std::uint64_t s = 1; s <= 50; ++s) {
        Rng rng(5000 + s);
        const auto count = 10 + rng.below(191);
        const auto dim = 1 + rng.below(6);
        const double eps = rng.uniform(0.05, 0.3);
        const auto min_size = 1 + rng.below(8);
        const auto pts = oracle::random_points(s, count, dim);
        matched += oracle::same_partition(dbscan(pts, eps, min_size), oracle::reference_dbscan(pts, eps, min_size));
    }
    const double secs = seconds_since(start);
    o.check(matched == 50, std::to_string(matched) + "/50 instances match the reference partition");
    o.check(secs < 60.0, "runtime " + fmt("%.2f", secs) + " s < 60 s");
    return o;
}

Outcome control_contracts() {
    Outcome o;
    SyntheticConfig c;
    c.n_alerts = 20000;
    c.n_rules = 40;
    c.n_hosts = 40;
    c.n_scenarios = 4;
    c.alerts_per_scenario = 20;
    c.duration = 10 * kDay;
    c.seed = 3;
    const auto lab = make_lab_dataset(generate_stream(c), 10, kDay);
    const auto stats = lab_stats(lab);
    const double unf = complement_oracle(static_cast<double>(stats.size), static_cast<double>(stats.incidents));
    std::size_t fm_ok = 0, ds_ok = 0, dm_ok = 0, ht_ok = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const std::size_t size_target = lab.size() * 6 / 10;

        const auto fm = control_filtering_method(lab, size_target, seed);
        fm_ok += fm.size() == size_target && incidents_of(fm) == stats.incidents;

        const auto ds = control_dataset_size(lab, size_target, unf, seed);
        const auto k = static_cast<double>(incidents_of(ds));
        const auto n = static_cast<double>(ds.size());
        ds_ok += complement_oracle(n, k) <= unf && complement_oracle(n + 1, k + 1) > unf;

        const std::size_t dim_target = stats.dimensionality - 5;
        const auto dm = lab_stats(control_dimensionality(lab, dim_target, seed));
        dm_ok += dm.dimensionality == dim_target && dm.label_ir &&
                 std::abs(*dm.label_ir - *stats.label_ir) <= 0.1 * *stats.label_ir;

        const std::size_t het_target = *stats.heterogeneity * 7 / 10;
        const auto ht = control_heterogeneity(lab, het_target, lab.size(), seed);
        ht_ok += count_unique_contexts(ht.sequences) == het_target && ht.size() == lab.size();
    }
    o.check(fm_ok == 5, "filtering method: exact size, all incidents kept (" + std::to_string(fm_ok) + "/5)");
    o.check(ds_ok == 5, "dataset size: label IR within one removal (" + std::to_string(ds_ok) + "/5)");
    o.check(dm_ok == 5, "dimensionality: exact rule count, label IR within 10% (" + std::to_string(dm_ok) + "/5)");
    o.check(ht_ok == 5, "heterogeneity: exact unique contexts, unfiltered size (" + std::to_string(ht_ok) + "/5)");
    return o;
}

Outcome statistics_oracles() {
    Outcome o;
    Rng rng(42);
    DesignMatrix m;
    m.names = {"a", "b", "c"};
    m.x.resize(60, 3);
    m.y.resize(60);
    const Eigen::Vector3d beta(1.5, -0.25, 2.0);
    for (Eigen::Index i = 0; i < 60; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) m.x(i, j) = rng.uniform(-2.0, 2.0) * static_cast<double>(j + 1);
        m.y(i) = 0.5 + m.x.row(i).dot(beta);
    }
    Eigen::MatrixXd a(60, 4);
    a.col(0).setOnes();
    a.rightCols(3) = m.x;
    const Eigen::VectorXd expected = (a.transpose() * a).ldlt().solve(a.transpose() * m.y);
    const auto fit = robust_fit(m);
    double diff = 0.0;
    for (std::size_t j = 0; j < fit.terms.size(); ++j) {
        diff = std::max(diff, std::abs(fit.terms[j].coef - expected(static_cast<Eigen::Index>(j))));
    }
    o.check(fit.terms.size() == 4 && diff < 1e-8, "robust fit vs closed-form OLS max diff " + fmt("%.3g", diff));

    const std::vector<double> s1{0.1, 0.4, 0.4, 0.9, 1.3};
    const std::vector<double> s2{5.0, 6.0, 7.0};
    const auto same = ks_gof(s1, s1);
    o.check(same.stat == 0.0 && same.p == 1.0, "KS identical samples (0, 1)");
    o.check(ks_gof(s1, s2).stat == 1.0, "KS disjoint supports stat 1");

    DesignMatrix wide;
    wide.names = {"u", "v"};
    wide.x.resize(97, 2);
    wide.y.resize(97);
    for (Eigen::Index i = 0; i < 97; ++i) {
        wide.x(i, 0) = 1e6 + 1e3 * rng.uniform(-1.0, 1.0);
        wide.x(i, 1) = 1e-6 * rng.uniform(-1.0, 1.0);
        wide.y(i) = rng.uniform();
    }
    const auto z = standardize(wide);
    double worst_mean = 0.0, worst_sd = 0.0;
    for (Eigen::Index j = 0; j < 2; ++j) {
        worst_mean = std::max(worst_mean, std::abs(z.x.col(j).mean()));
        worst_sd = std::max(worst_sd, std::abs(std::sqrt(z.x.col(j).squaredNorm() / 97.0) - 1.0));
    }
    o.check(worst_mean < 1e-12 && worst_sd < 1e-12,
            "standardize |mean| " + fmt("%.2g", worst_mean) + " |sd-1| " + fmt("%.2g", worst_sd) + " < 1e-12");
    return o;
}

ExplanationInput model_vector(std::string id, std::vector<EventIndex> ctx, const Eigen::VectorXd& attention,
                              std::size_t vocab) {
    ExplanationInput in;
    in.seq_id = std::move(id);
    in.context = std::move(ctx);
    in.total_attention = aggregate_positions<double>(std::span<const EventIndex>(in.context), attention, vocab);
    return in;
}

Outcome explanation_scoring() {
    Outcome o;
    const Eigen::Vector3d x(0.3, 0.2, 0.5);
    o.check(cosine_similarity(x, x) == 1.0, "cos(x, x) = 1");
    o.check(cosine_similarity(Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 2, 3)) == 0.0, "orthogonal = 0");
    const double pair = cosine_similarity(Eigen::Vector2d(0.7, 0.3), Eigen::Vector2d(0.3, 0.7));
    o.check(std::abs(pair - 0.42 / 0.58) < 1e-15, "hand pair = 0.42 / 0.58 = " + fmt("%.4f", pair));

    const std::size_t vocab = 3;
    Rng rng(9);
    std::vector<ExplanationInput> model;
    std::vector<RaterVector> raters;
    for (int i = 0; i < 100; ++i) {
        Eigen::VectorXd att(4);
        for (int k = 0; k < 4; ++k) att(k) = 0.05 + rng.uniform();
        att /= att.sum();
        const std::vector<EventIndex> ctx{0, 1, 2, static_cast<EventIndex>(rng.below(3))};
        model.push_back(model_vector(std::to_string(i), ctx, att, vocab));
        std::vector<double> rel(att.data(), att.data() + 4);
        if (i % 5 >= 2) rel = {rng.uniform(), 0.0, 0.0, 0.0};
        raters.push_back({std::to_string(i), rel});
    }
    std::stringstream file;
    write_rater_file(file, raters);
    const auto cmp = compare_explanations(model, parse_rater_file(file), vocab);
    std::vector<double> sims;
    for (const auto& [id, s] : cmp.similarities) sims.push_back(s);
    const auto cdf = empirical_cdf(sims);
    const bool shape = cdf.size() >= 2 && cdf.back().value == 1.0;
    const double mass = shape ? cdf.back().fraction - cdf[cdf.size() - 2].fraction : 0.0;
    o.check(sims.size() == 100, std::to_string(sims.size()) + "/100 vectors compared");
    o.check(shape && cdf[cdf.size() - 2].fraction == 0.6 && cdf.back().fraction == 1.0,
            "ECDF mass at 1 is exactly 0.40 (got " + fmt("%.17g", mass) + ")");
    return o;
}

Outcome determinism(const fs::path& work) {
    Outcome o;
    auto make = [&](const std::string& name, std::size_t threads) {
        ExperimentConfig c;
        c.name = name;
        SyntheticConfig s;
        s.n_alerts = 20000;
        s.n_rules = 40;
        s.n_hosts = 40;
        s.n_scenarios = 4;
        s.alerts_per_scenario = 20;
        s.duration = 10 * kDay;
        s.seed = 3;
        c.synthetic = s;
        c.plan = TuningPlan{1, 1, 3};
        c.hp.hidden_nodes = 8;
        c.train.epochs = 3;
        c.repeats = 2;
        c.threads = threads;
        c.output_dir = work / name;
        return c;
    };
    run_experiment(make("determinism_a", 1));
    run_experiment(make("determinism_b", 4));
    for (const char* f : {"metrics.csv", "regression.csv"}) {
        const auto a = slurp(work / "determinism_a" / f);
        const auto b = slurp(work / "determinism_b" / f);
        o.check(!a.empty() && a == b, std::string(f) + " byte-identical across runs (" + std::to_string(a.size()) + " bytes)");
    }
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    fs::path work = fs::temp_directory_path() / "alertlab_acceptance";
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--work-dir" && i + 1 < argc) {
            work = argv[++i];
        } else if (arg == "--only" && i + 1 < argc) {
            only.insert(std::stoi(argv[++i]));
        } else {
            std::cerr << "usage: acceptance [--work-dir DIR] [--only N]...\n";
            return 1;
        }
    }
    fs::remove_all(work);
    fs::create_directories(work);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"IR formula fidelity", ir_fidelity},
        {"published confusion-matrix arithmetic", published_matrix_arithmetic},
        {"trend reproduction at desk scale", [&] { return trend_reproduction(work); }},
        {"regression attribution", [&] { return regression_attribution(work); }},
        {"gradient correctness", gradient_correctness},
        {"clustering oracle", clustering_oracle},
        {"control-generator contracts", control_contracts},
        {"statistics oracles", statistics_oracles},
        {"explanation scoring", explanation_scoring},
        {"determinism", [&] { return determinism(work); }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.check(false, std::string("error: ") + e.what());
        }
        failed += !o.pass;
        std::string detail;
        for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
        std::cout << "Criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " - " << criteria[i].first << " ["
                  << detail << "]" << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion(s) failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
