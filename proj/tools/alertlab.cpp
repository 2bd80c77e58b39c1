#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "alertlab/experiment.hpp"
#include "alertlab/parallel.hpp"

namespace fs = std::filesystem;
using namespace alertlab;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kCompute = 3 };

fs::path output_root() {
    const char* root = std::getenv("ALERTLAB_OUTPUT_ROOT");
    return root != nullptr ? fs::path(root) : fs::path();
}

fs::path out_path(const std::string& p) {
    const fs::path path(p);
    const fs::path root = output_root();
    return path.is_relative() && !root.empty() ? root / path : path;
}

std::ofstream create(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + p.string() + "'");
    return out;
}

std::ifstream open(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + p.string() + "'");
    return in;
}

SequenceFile read_sequences(const fs::path& p) {
    auto in = open(p);
    return parse_sequences(in);
}

void write_sequence_file(const fs::path& p, const std::vector<Sequence>& seqs, const EventVocabulary& v) {
    auto out = create(p);
    write_sequences(out, seqs, v);
}

// Flags shared by the commands that take pipeline knobs.
struct HpFlags {
    std::string params_file;
    std::optional<std::size_t> n, hidden, min_cluster;
    std::optional<std::int64_t> t;
    std::optional<double> delta, tau, epsilon;

    void add(CLI::App* app) {
        app->add_option("--params", params_file, "best-params file to start from");
        app->add_option("--n", n, "context length");
        app->add_option("--t", t, "context timeout in seconds");
        app->add_option("--hidden", hidden, "hidden nodes of the context builder");
        app->add_option("--delta", delta, "label smoothing");
        app->add_option("--tau", tau, "confidence threshold");
        app->add_option("--epsilon", epsilon, "DBSCAN radius");
        app->add_option("--min-cluster", min_cluster, "DBSCAN minimum cluster size");
    }

    Hyperparameters resolve() const {
        Hyperparameters hp = desk_hyperparameters();
        if (!params_file.empty()) {
            auto in = open(params_file);
            hp = parse_best_params(in);
        }
        if (n) hp.n = *n;
        if (t) hp.t = *t;
        if (hidden) hp.hidden_nodes = *hidden;
        if (delta) hp.delta = *delta;
        if (tau) hp.tau_confidence = *tau;
        if (epsilon) hp.epsilon = *epsilon;
        if (min_cluster) hp.min_cluster_size = *min_cluster;
        hp.validate();
        return hp;
    }
};

struct TrainFlags {
    TrainConfig tc = desk_train_config();
    std::string optimizer = "adam";
    std::uint64_t seed = 1;

    void add(CLI::App* app) {
        app->add_option("--epochs", tc.epochs, "training epochs")->capture_default_str();
        app->add_option("--batch", tc.batch_size, "batch size")->capture_default_str();
        app->add_option("--lr", tc.learning_rate, "learning rate")->capture_default_str();
        app->add_option("--optimizer", optimizer, "adam or sgd")
            ->check(CLI::IsMember({"adam", "sgd"}))
            ->capture_default_str();
        app->add_option("--seed", seed, "run seed")->capture_default_str();
    }

    TrainConfig resolve() const {
        TrainConfig c = tc;
        c.optimizer = optimizer == "adam" ? Optimizer::Adam : Optimizer::Sgd;
        return c;
    }
};

void print_metrics(std::ostream& out, const ConfusionMatrix& cm) {
    const auto f1 = micro_macro_f1(cm);
    const auto relaxed = relaxed_prf(cm);
    out << "# schema: alertlab.scores/1\n";
    out << "micro_f1,macro_f1,relaxed_p,relaxed_r,relaxed_f1\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g\n", f1.micro, f1.macro, relaxed.precision,
                  relaxed.recall, relaxed.f1);
    out << buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Alert triage experiments: sequencing, attention-based clustering and imbalance analysis"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "show help for every subcommand");

    // generate
    auto* gen = app.add_subcommand("generate", "write a seeded synthetic alert stream");
    SyntheticConfig syn;
    std::string gen_out;
    gen->add_option("--out", gen_out, "output file (.csv or .jsonl)")->required();
    gen->add_option("--alerts", syn.n_alerts, "background alerts")->capture_default_str();
    gen->add_option("--rules", syn.n_rules, "distinct rules")->capture_default_str();
    gen->add_option("--hosts", syn.n_hosts, "hosts")->capture_default_str();
    gen->add_option("--hosts-per-rule", syn.hosts_per_rule, "hosts raising each rule (0: all)")->capture_default_str();
    gen->add_option("--skew", syn.rule_skew, "Zipf exponent of rule frequencies")->capture_default_str();
    gen->add_option("--scenarios", syn.n_scenarios, "attack scenarios")->capture_default_str();
    gen->add_option("--alerts-per-scenario", syn.alerts_per_scenario, "incident alerts per scenario")->capture_default_str();
    gen->add_option("--duration", syn.duration, "duration in seconds")->capture_default_str();
    gen->add_option("--seed", syn.seed, "seed")->capture_default_str();

    // tune
    auto* tune = app.add_subcommand("tune", "build the high/medium/low IR suite with rule filters");
    std::string tune_alerts, tune_dir;
    std::vector<std::string> tune_filters;
    TuningPlan plan;
    tune->add_option("--alerts", tune_alerts, "unfiltered alert file")->required();
    tune->add_option("--filters", tune_filters, "three filter files: high medium low")->expected(3);
    tune->add_option("--high-per-host", plan.high_per_host, "per-host filters of the high level")->capture_default_str();
    tune->add_option("--medium-rules", plan.medium_rules, "global filters of the medium level")->capture_default_str();
    tune->add_option("--low-rules", plan.low_rules, "global filters of the low level")->capture_default_str();
    tune->add_option("--out-dir", tune_dir, "output directory")->required();

    // control
    auto* control = app.add_subcommand("control", "derive a control dataset from the unfiltered stream");
    std::string ctl_alerts, ctl_match, ctl_kind, ctl_out;
    std::optional<std::size_t> ctl_size, ctl_dim, ctl_het;
    std::uint64_t ctl_seed = 1;
    HpFlags ctl_hp;
    control->add_option("--alerts", ctl_alerts, "unfiltered alert file")->required();
    control->add_option("--kind", ctl_kind, "filtering_method, dataset_size, dimensionality or heterogeneity")
        ->required()
        ->check(CLI::IsMember({"filtering_method", "dataset_size", "dimensionality", "heterogeneity"}));
    control->add_option("--match", ctl_match, "tuned alert file whose characteristics are the targets");
    control->add_option("--size", ctl_size, "target size");
    control->add_option("--dimensionality", ctl_dim, "target distinct rules");
    control->add_option("--heterogeneity", ctl_het, "target unique contexts");
    control->add_option("--seed", ctl_seed, "seed")->capture_default_str();
    control->add_option("--out", ctl_out, "output sequence file")->required();
    ctl_hp.add(control);

    // split
    auto* split = app.add_subcommand("split", "chronological hyperopt/train/test split with incident balancing");
    std::string split_alerts, split_seqs, split_dir;
    double split_hfrac = 0.01, split_tfrac = 0.20, split_tol = 0.05;
    std::uint64_t split_seed = 1;
    bool split_no_balance = false;
    HpFlags split_hp;
    auto* split_src = split->add_option_group("source");
    split_src->add_option("--alerts", split_alerts, "alert file");
    split_src->add_option("--sequences", split_seqs, "sequence file");
    split_src->require_option(1);
    split->add_option("--hyperopt-frac", split_hfrac, "hyperopt fraction")->capture_default_str();
    split->add_option("--train-frac", split_tfrac, "train fraction of the remainder")->capture_default_str();
    split->add_option("--tolerance", split_tol, "relative balancing tolerance")->capture_default_str();
    split->add_option("--seed", split_seed, "balancing seed")->capture_default_str();
    split->add_flag("--no-balance", split_no_balance, "skip incident balancing");
    split->add_option("--out-dir", split_dir, "output directory")->required();
    split_hp.add(split);

    // hyperopt
    auto* hopt = app.add_subcommand("hyperopt", "random search over the hyperparameter grid");
    std::string hopt_alerts, hopt_dir;
    SearchBudget budget;
    std::size_t hopt_threads = 0;
    TrainFlags hopt_train;
    hopt->add_option("--alerts", hopt_alerts, "alert file")->required();
    hopt->add_option("--trials", budget.max_trials, "trial budget")->capture_default_str();
    hopt->add_option("--search-seed", budget.seed, "search seed")->capture_default_str();
    hopt->add_option("--threads", hopt_threads, "worker threads (0: all cores)")->capture_default_str();
    hopt->add_option("--out-dir", hopt_dir, "output directory")->required();
    hopt_train.add(hopt);

    // train
    auto* trn = app.add_subcommand("train", "train the context builder on a sequence file");
    std::string trn_seqs, trn_out;
    HpFlags trn_hp;
    TrainFlags trn_train;
    trn->add_option("--train", trn_seqs, "training sequence file")->required();
    trn->add_option("--out", trn_out, "model checkpoint")->required();
    trn_hp.add(trn);
    trn_train.add(trn);

    // classify
    auto* cls = app.add_subcommand("classify", "fit the interpreter and classify a test sequence file");
    std::string cls_model, cls_train, cls_test, cls_out, cls_confusion;
    std::size_t cls_first_id = 0;
    HpFlags cls_hp;
    cls->add_option("--model", cls_model, "model checkpoint")->required();
    cls->add_option("--train", cls_train, "training sequence file")->required();
    cls->add_option("--test", cls_test, "test sequence file")->required();
    cls->add_option("--first-id", cls_first_id, "seq_id of the first test sequence")->capture_default_str();
    cls->add_option("--out", cls_out, "classification log")->required();
    cls->add_option("--confusion", cls_confusion, "confusion matrix output");
    cls_hp.add(cls);

    // metrics
    auto* met = app.add_subcommand("metrics", "scores from a classification log or confusion matrix");
    std::string met_log, met_cm, met_out;
    auto* met_src = met->add_option_group("source");
    met_src->add_option("--log", met_log, "classification log");
    met_src->add_option("--confusion", met_cm, "confusion matrix file");
    met_src->require_option(1);
    met->add_option("--out", met_out, "output file (default: stdout)");

    // regress
    auto* reg = app.add_subcommand("regress", "robust regression of relaxed F1 on dataset characteristics");
    std::string reg_metrics, reg_out;
    double reg_vif = 10.0;
    RobustOptions reg_opt;
    reg->add_option("--metrics", reg_metrics, "metrics CSV")->required();
    reg->add_option("--vif", reg_vif, "VIF pruning threshold")->capture_default_str();
    reg->add_option("--huber", reg_opt.huber_c, "Huber tuning constant")->capture_default_str();
    reg->add_option("--ci", reg_opt.ci_level, "confidence level")->capture_default_str();
    reg->add_option("--out", reg_out, "regression report (default: stdout)");

    // explain
    auto* exp = app.add_subcommand("explain", "compare model explanations with expert rater vectors");
    std::string exp_model, exp_seqs, exp_raters, exp_dir;
    exp->add_option("--model", exp_model, "model checkpoint")->required();
    exp->add_option("--sequences", exp_seqs, "sequence file; seq_id is the row index")->required();
    exp->add_option("--raters", exp_raters, "rater file")->required();
    exp->add_option("--out-dir", exp_dir, "output directory")->required();

    // report
    auto* rep = app.add_subcommand("report", "plot data (scatter and ECDF CSV) from experiment outputs");
    std::string rep_metrics, rep_sims, rep_dir;
    rep->add_option("--metrics", rep_metrics, "metrics CSV");
    rep->add_option("--similarities", rep_sims, "similarities CSV");
    rep->add_option("--out-dir", rep_dir, "output directory")->required();

    // run
    auto* run = app.add_subcommand("run", "end-to-end experiment from a JSON config");
    std::string run_config, run_dir;
    std::optional<std::size_t> run_threads;
    run->add_option("--config", run_config, "experiment config (JSON)")->required();
    run->add_option("--output-dir", run_dir, "override the configured output directory");
    run->add_option("--threads", run_threads, "worker threads (0: all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (gen->parsed()) {
            const auto d = generate_stream(syn);
            const fs::path out = out_path(gen_out);
            if (out.has_parent_path()) fs::create_directories(out.parent_path());
            write_alerts(out, d, format_from_path(out));
            const auto s = dataset_stats(d);
            std::cout << "alerts " << s.size << " incidents " << s.incidents << " rules " << s.dimensionality << '\n';
        } else if (tune->parsed()) {
            const auto d = parse_alerts(fs::path(tune_alerts));
            std::array<RuleFilter, 3> filters;
            if (!tune_filters.empty()) {
                for (std::size_t i = 0; i < 3; ++i) filters[i] = load_rule_filter(tune_filters[i]);
            } else {
                filters = suggest_filters(d, plan);
            }
            const auto suite = make_tuned_suite(d, filters);
            const fs::path dir = out_path(tune_dir);
            for (std::size_t l = 0; l < 3; ++l) {
                auto f = create(dir / (std::string(kTunedLevelNames[l]) + "_filter.txt"));
                write_rule_filter(f, filters[l]);
                write_alerts(dir / (std::string(kTunedLevelNames[l]) + ".csv"), suite.levels[l], AlertFormat::Csv);
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.6g", suite.ir_complement[l]);
                std::cout << kTunedLevelNames[l] << " size " << suite.levels[l].size() << " 1-IR " << buf << '\n';
            }
        } else if (control->parsed()) {
            const Hyperparameters hp = ctl_hp.resolve();
            const auto lab = make_lab_dataset(parse_alerts(fs::path(ctl_alerts)), hp.n, hp.t);
            const auto base = lab_stats(lab);
            std::optional<DatasetStats> tuned;
            if (!ctl_match.empty()) tuned = lab_stats(make_lab_dataset(parse_alerts(fs::path(ctl_match)), hp.n, hp.t));
            auto need = [&](const std::optional<std::size_t>& flag, auto field, const char* name) -> std::size_t {
                if (flag) return *flag;
                if (tuned) return field(*tuned);
                throw ConfigError(std::string("control: --") + name + " or --match is required");
            };
            const auto size_of = [](const DatasetStats& s) { return s.size; };
            LabDataset out;
            switch (parse_control_kind(ctl_kind)) {
                case ControlKind::FilteringMethod:
                    out = control_filtering_method(lab, need(ctl_size, size_of, "size"), ctl_seed);
                    break;
                case ControlKind::DatasetSize:
                    if (!base.label_ir_complement) throw ValidationError("control: source needs both labels");
                    out = control_dataset_size(lab, need(ctl_size, size_of, "size"), *base.label_ir_complement, ctl_seed);
                    break;
                case ControlKind::Dimensionality:
                    out = control_dimensionality(
                        lab, need(ctl_dim, [](const DatasetStats& s) { return s.dimensionality; }, "dimensionality"),
                        ctl_seed);
                    break;
                case ControlKind::Heterogeneity:
                    out = control_heterogeneity(
                        lab,
                        need(ctl_het, [](const DatasetStats& s) { return s.heterogeneity.value_or(0); }, "heterogeneity"),
                        ctl_size.value_or(base.size), ctl_seed);
                    break;
            }
            write_sequence_file(out_path(ctl_out), out.sequences, out.vocabulary);
            const auto s = lab_stats(out);
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.6g", s.label_ir_complement.value_or(0.0));
            std::cout << "size " << s.size << " incidents " << s.incidents << " dimensionality " << s.dimensionality
                      << " heterogeneity " << s.heterogeneity.value_or(0) << " 1-IR " << buf << '\n';
        } else if (split->parsed()) {
            std::vector<Sequence> seqs;
            EventVocabulary vocab;
            if (!split_alerts.empty()) {
                const Hyperparameters hp = split_hp.resolve();
                auto lab = make_lab_dataset(parse_alerts(fs::path(split_alerts)), hp.n, hp.t);
                seqs = std::move(lab.sequences);
                vocab = std::move(lab.vocabulary);
            } else {
                auto f = read_sequences(split_seqs);
                seqs = std::move(f.sequences);
                vocab = std::move(f.vocabulary);
            }
            const Splits s = chronological_splits(seqs, split_hfrac, split_tfrac);
            const auto train = split_no_balance ? s.train : balance_incidents(s.train, s.test, split_seed, split_tol);
            const fs::path dir = out_path(split_dir);
            write_sequence_file(dir / "hyperopt.csv", s.hyperopt, vocab);
            write_sequence_file(dir / "train.csv", train, vocab);
            write_sequence_file(dir / "test.csv", s.test, vocab);
            std::cout << "hyperopt " << s.hyperopt.size() << " train " << train.size() << " (" << s.train.size()
                      << " before balancing) test " << s.test.size() << " first_test_id "
                      << s.hyperopt.size() + s.train.size() << '\n';
        } else if (hopt->parsed()) {
            Hyperparameters hp = desk_hyperparameters();
            const auto lab = make_lab_dataset(parse_alerts(fs::path(hopt_alerts)), hp.n, hp.t);
            RunConfig rc;
            rc.hp = hp;
            rc.train = hopt_train.resolve();
            const auto threads = hopt_threads == 0 ? default_threads() : hopt_threads;
            const auto r = tune_hyperparameters(lab, rc, Grid::standard(), budget, threads);
            const fs::path dir = out_path(hopt_dir);
            auto trials = create(dir / "trials.csv");
            write_trial_log(trials, r);
            auto best = create(dir / "best_params.txt");
            write_best_params(best, r.best, fs::path(hopt_alerts).stem().string(), r.best_score);
            std::cout << "best trial " << r.best_trial << " macro_f1 " << r.best_score << ' ' << describe(r.best) << '\n';
        } else if (trn->parsed()) {
            const Hyperparameters hp = trn_hp.resolve();
            const auto f = read_sequences(trn_seqs);
            const EventVocabulary known = vocabulary_of(f.sequences, f.vocabulary);
            const auto seqs = reindex(f.sequences, f.vocabulary, known);
            TrainConfig tc = trn_train.resolve();
            tc.delta = hp.delta;
            tc.seed = trn_train.seed;
            TrainReport report;
            const auto model = train_examples(collapse_duplicates(seqs), known.size(), tc, hp.hidden_nodes, &report);
            const fs::path out = out_path(trn_out);
            if (out.has_parent_path()) fs::create_directories(out.parent_path());
            save_checkpoint(out, model, known);
            std::cout << "examples " << report.unique_examples << " final_loss "
                      << (report.epoch_loss.empty() ? 0.0 : report.epoch_loss.back()) << '\n';
        } else if (cls->parsed()) {
            RunConfig rc;
            rc.hp = cls_hp.resolve();
            const auto [model, known] = load_checkpoint(cls_model);
            const auto train = read_sequences(cls_train);
            const auto test = read_sequences(cls_test);
            const auto r = classify_split(model, reindex(train.sequences, train.vocabulary, known),
                                          reindex(test.sequences, test.vocabulary, known), rc, cls_first_id);
            auto log = create(out_path(cls_out));
            write_classification_log(log, r.log);
            if (!cls_confusion.empty()) {
                auto cm = create(out_path(cls_confusion));
                write_confusion(cm, r.confusion);
            }
            print_metrics(std::cout, r.confusion);
        } else if (met->parsed()) {
            ConfusionMatrix cm;
            if (!met_log.empty()) {
                auto in = open(met_log);
                cm = confusion_from(parse_classification_log(in));
            } else {
                auto in = open(met_cm);
                cm = parse_confusion(in);
            }
            if (met_out.empty()) {
                print_metrics(std::cout, cm);
            } else {
                auto out = create(out_path(met_out));
                print_metrics(out, cm);
            }
        } else if (reg->parsed()) {
            auto in = open(reg_metrics);
            const auto r = regress(design_from_metrics(parse_metrics_csv(in)), reg_vif, reg_opt);
            if (reg_out.empty()) {
                write_regression_report(std::cout, r);
            } else {
                auto out = create(out_path(reg_out));
                write_regression_report(out, r);
            }
        } else if (exp->parsed()) {
            const auto [model, known] = load_checkpoint(exp_model);
            const auto f = read_sequences(exp_seqs);
            const auto seqs = reindex(f.sequences, f.vocabulary, known);
            auto rin = open(exp_raters);
            const auto raters = parse_rater_file(rin);
            std::vector<std::size_t> wanted;
            for (const auto& r : raters) {
                const auto& id = r.seq_id;
                if (!id.empty() && id.find_first_not_of("0123456789") == std::string::npos) {
                    const auto k = std::stoull(id);
                    if (k < seqs.size() && !seqs[k].has_unseen()) wanted.push_back(k);
                }
            }
            std::vector<std::vector<EventIndex>> contexts;
            for (auto k : wanted) contexts.push_back(seqs[k].context);
            const auto scores = score_contexts(model, contexts);
            std::vector<ExplanationInput> inputs;
            for (std::size_t i = 0; i < wanted.size(); ++i) {
                inputs.push_back({std::to_string(wanted[i]), scores.total_attention.col(static_cast<Eigen::Index>(i)),
                                  seqs[wanted[i]].context});
            }
            const auto cmp = compare_explanations(inputs, raters, model.vocab_size);
            const fs::path dir = out_path(exp_dir);
            auto sims = create(dir / "similarities.csv");
            write_similarities(sims, cmp);
            std::vector<double> values;
            for (const auto& [id, s] : cmp.similarities) values.push_back(s);
            if (!values.empty()) {
                auto ecdf = create(dir / "ecdf.csv");
                write_ecdf(ecdf, empirical_cdf(values));
            }
            std::cout << "compared " << cmp.similarities.size() << " missing_model " << cmp.missing_model.size()
                      << " skipped " << cmp.errors.size() << '\n';
        } else if (rep->parsed()) {
            if (rep_metrics.empty() && rep_sims.empty()) throw ConfigError("report: --metrics or --similarities is required");
            const fs::path dir = out_path(rep_dir);
            if (!rep_metrics.empty()) {
                auto in = open(rep_metrics);
                auto out = create(dir / "scatter.csv");
                write_scatter(out, parse_metrics_csv(in));
            }
            if (!rep_sims.empty()) {
                auto in = open(rep_sims);
                std::vector<double> values;
                std::string line;
                std::size_t line_no = 0;
                bool header = false;
                while (std::getline(in, line)) {
                    ++line_no;
                    if (line.empty() || line.front() == '#') continue;
                    if (!header) {
                        header = true;
                        continue;
                    }
                    const auto comma = line.rfind(',');
                    if (comma == std::string::npos) throw ParseError("expected 'seq_id,similarity'", line_no);
                    try {
                        values.push_back(std::stod(line.substr(comma + 1)));
                    } catch (const std::exception&) {
                        throw ParseError("similarity is not a number", line_no);
                    }
                }
                auto out = create(dir / "ecdf.csv");
                write_ecdf(out, empirical_cdf(values));
            }
        } else if (run->parsed()) {
            auto cfg = load_experiment_config(run_config, output_root());
            if (!run_dir.empty()) cfg.output_dir = out_path(run_dir);
            if (run_threads) cfg.threads = *run_threads;
            const auto r = run_experiment(cfg);
            std::cout << "datasets " << r.datasets.size() << " runs " << r.metrics.size() << " output "
                      << cfg.output_dir.string() << '\n';
            if (r.regression) {
                for (const auto& t : r.regression->terms) {
                    char buf[128];
                    std::snprintf(buf, sizeof buf, "%-16s coef %+.4f p %.3g\n", t.term.c_str(), t.coef, t.p);
                    std::cout << buf;
                }
            } else {
                std::cout << "regression skipped: " << r.regression_skipped << '\n';
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ComputeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kCompute;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kOk;
}
