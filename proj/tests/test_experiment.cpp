#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "alertlab/experiment.hpp"

using namespace alertlab;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config(const fs::path& out) {
    ExperimentConfig c;
    c.name = "tiny";
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
    c.repeats = 1;
    c.output_dir = out;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("alertlab_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("config parsing") {
    SUBCASE("full document") {
        std::istringstream in(R"({
          "name": "demo",
          "source": {"synthetic": {"n_alerts": 1000, "seed": 4}},
          "tuning": {"plan": {"high_per_host": 2, "medium_rules": 3, "low_rules": 9}},
          "controls": ["dimensionality", "filtering_method"],
          "control_seed": 11,
          "hyperparameters": {"n": 15, "t": 604800, "epsilon": 0.4},
          "hyperopt": {"max_trials": 7, "seed": 2},
          "train": {"epochs": 4, "optimizer": "sgd"},
          "splits": {"train_frac": 0.3},
          "repeats": 3,
          "threads": 2,
          "write_classification_logs": false,
          "raters": {"path": "r.csv", "dataset": "low_ir"},
          "output_dir": "res"
        })");
        const auto c = parse_experiment_config(in, "/base");
        CHECK(c.name == "demo");
        REQUIRE(c.synthetic.has_value());
        CHECK(c.synthetic->n_alerts == 1000);
        CHECK(c.synthetic->n_rules == SyntheticConfig{}.n_rules);
        CHECK(c.plan->low_rules == 9);
        CHECK(c.controls == std::vector<ControlKind>{ControlKind::Dimensionality, ControlKind::FilteringMethod});
        CHECK(c.control_seed == 11);
        CHECK(c.hp.n == 15);
        CHECK(c.hp.t == kWeek);
        CHECK(c.hp.epsilon == 0.4);
        CHECK(c.hp.hidden_nodes == desk_hyperparameters().hidden_nodes);
        CHECK(c.hyperopt->max_trials == 7);
        CHECK(c.train.optimizer == Optimizer::Sgd);
        CHECK(c.train.epochs == 4);
        CHECK(c.train_frac == 0.3);
        CHECK(c.run_seeds() == std::vector<std::uint64_t>{1, 2, 3});
        CHECK(c.raters == fs::path("/base/r.csv"));
        CHECK(c.output_dir == fs::path("/base/res"));

        std::istringstream again(experiment_config_json(c));
        const auto d = parse_experiment_config(again, "/elsewhere");
        CHECK(experiment_config_json(d) == experiment_config_json(c));
    }
    SUBCASE("output root overrides the base directory for outputs only") {
        std::istringstream in(R"({"output_dir": "res", "raters": {"path": "r.csv"}})");
        const auto c = parse_experiment_config(in, "/base", "/root_out");
        CHECK(c.output_dir == fs::path("/root_out/res"));
        CHECK(c.raters == fs::path("/base/r.csv"));
    }
    SUBCASE("explicit seeds win over repeats") {
        std::istringstream in(R"({"seeds": [7, 9], "repeats": 2})");
        CHECK(parse_experiment_config(in).run_seeds() == std::vector<std::uint64_t>{7, 9});
    }
    SUBCASE("invalid documents") {
        for (const char* text : {R"({"nmae": "typo"})", R"({"train": {"epoch": 3}})", R"({"repeats": 0})",
                                 R"({"controls": ["bogus"]})", R"({"source": {"alerts": "a.csv", "synthetic": {}}})",
                                 R"({"hyperparameters": {"epsilon": -1}})", R"({"repeats": "five"})", "not json"}) {
            CAPTURE(text);
            std::istringstream in(text);
            CHECK_THROWS_AS(parse_experiment_config(in), ConfigError);
        }
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_experiment_config("/nonexistent/config.json"), ConfigError);
    }
}

TEST_CASE("metrics CSV round trip") {
    std::vector<MetricsRow> rows{{"unfiltered", 0, 1, 0.5, 0.25, 0.125, 1, 0.2, 0.75, 0.5, 1000, 20, 5},
                                 {"low_ir", 3, 4, 1, 0, 0, 0, 0, 0.0625, 0.375, 10, 2, 3}};
    std::stringstream io;
    write_metrics_csv(io, rows);
    CHECK(io.str().rfind("# schema: alertlab.metrics/1\n", 0) == 0);
    const auto back = parse_metrics_csv(io);
    REQUIRE(back.size() == 2);
    CHECK(back[0].dataset == "unfiltered");
    CHECK(back[0].macro_f1 == 0.25);
    CHECK(back[1].size == 10);
    CHECK(back[1].label_ir == 0.0625);
    const auto m = design_from_metrics(back);
    CHECK(m.names.front() == "label_ir");
    CHECK(m.y(0) == 0.2);
    std::istringstream bad("dataset,run\n");
    CHECK_THROWS_AS(parse_metrics_csv(bad), ParseError);
}

TEST_CASE("confusion matrices") {
    ConfusionMatrix a, b;
    a.counts = {{{1, 10, 2}, {3, 0, 5}}};
    b.counts = {{{3, 14, 2}, {5, 2, 7}}};
    std::stringstream io;
    write_confusion(io, a);
    CHECK(io.str().rfind("# schema: alertlab.confusion/1\n", 0) == 0);
    CHECK(parse_confusion(io) == a);

    const auto s = summarize({a, b});
    CHECK(s.mean.counts[0][1] == 12);
    CHECK(s.sd.counts[0][1] == doctest::Approx(std::sqrt(8.0)));
    CHECK(s.sd.counts[0][2] == 0);
    CHECK(summarize({a}).sd == ConfusionMatrix{});
    CHECK_THROWS_AS(summarize({}), ValidationError);

    std::ostringstream out;
    write_confusion_summary(out, {{"unfiltered", s}});
    CHECK(out.str().rfind("# schema: alertlab.confusion_summary/1\n", 0) == 0);
}

TEST_CASE("plot data") {
    std::vector<MetricsRow> rows{{"a", 0, 1, 0, 0.5, 0, 0, 0.1, 0.9, 0, 10, 1, 1},
                                 {"a", 1, 2, 0, 0.7, 0, 0, 0.3, 0.9, 0, 10, 1, 1}};
    std::ostringstream scatter;
    write_scatter(scatter, rows);
    CHECK(scatter.str().rfind("# schema: alertlab.scatter/1\n", 0) == 0);
    CHECK(scatter.str().find("a,mean,0.9,0.2,0.6") != std::string::npos);
    std::ostringstream ecdf;
    write_ecdf(ecdf, empirical_cdf({0.5, 1.0}));
    CHECK(ecdf.str() == "# schema: alertlab.ecdf/1\nsimilarity,fraction\n0.5,0.5\n1,1\n");
}

TEST_CASE("tiny experiment writes every report") {
    const auto out = scratch("smoke");
    auto cfg = tiny_config(out);
    cfg.repeats = 2;
    // Rater vectors for the first few test sequences of the unfiltered dataset.
    fs::create_directories(out);
    {
        std::ofstream r(out / "raters.csv");
        r << "seq_id";
        for (int i = 0; i < 10; ++i) r << ",pos_" << i;
        r << '\n';
        for (int id = 4176; id < 4186; ++id) {
            r << id;
            for (int i = 0; i < 10; ++i) r << ',' << (i == 9 ? 1.0 : 0.0);
            r << '\n';
        }
    }
    cfg.raters = out / "raters.csv";
    const auto result = run_experiment(cfg);

    CHECK(result.datasets.size() == 16);
    std::map<std::string, std::size_t> per_dataset;
    for (const auto& r : result.metrics) ++per_dataset[r.dataset];
    for (const auto& [name, n] : per_dataset) {
        CAPTURE(name);
        CHECK(n == 2);
    }
    CHECK(result.metrics.size() == 32);
    CHECK(result.regression.has_value());
    REQUIRE(result.explanations.has_value());

    for (const char* f : {"metrics.csv", "confusion_summary.csv", "regression.csv", "scatter.csv", "provenance.csv",
                          "similarities.csv", "ecdf.csv", "filters/high_ir.txt", "filters/medium_ir.txt",
                          "filters/low_ir.txt", "runs/unfiltered/seed_1/confusion.csv",
                          "runs/low_ir/seed_2/classification.csv"}) {
        CAPTURE(f);
        REQUIRE(fs::exists(out / f));
        CHECK(slurp(out / f).rfind("# schema: alertlab.", 0) == 0);
    }
    const auto manifest = slurp(out / "manifest.json");
    CHECK(manifest.find("\"schema\": \"alertlab.manifest/1\"") != std::string::npos);

    std::ifstream metrics(out / "metrics.csv");
    CHECK(parse_metrics_csv(metrics).size() == 32);
    fs::remove_all(out);
}

TEST_CASE("experiments are deterministic") {
    const auto a_dir = scratch("det_a");
    const auto b_dir = scratch("det_b");
    auto a = tiny_config(a_dir);
    auto b = tiny_config(b_dir);
    b.threads = 3;
    a.threads = 1;
    run_experiment(a);
    run_experiment(b);
    for (const char* f : {"metrics.csv", "regression.csv", "confusion_summary.csv", "scatter.csv", "provenance.csv"}) {
        CAPTURE(f);
        CHECK(slurp(a_dir / f) == slurp(b_dir / f));
    }
    fs::remove_all(a_dir);
    fs::remove_all(b_dir);
}

TEST_CASE("invalid experiment setups fail with distinct errors") {
    const auto out = scratch("invalid");
    auto cfg = tiny_config(out);
    cfg.plan = TuningPlan{0, 0, 0};
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);

    auto missing = tiny_config(out);
    missing.synthetic.reset();
    missing.alerts = "/nonexistent/alerts.csv";
    CHECK_THROWS_AS(run_experiment(missing), ValidationError);

    auto no_output = tiny_config({});
    CHECK_THROWS_AS(run_experiment(no_output), ConfigError);
    fs::remove_all(out);
}
