#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "alertlab/analysis.hpp"
#include "alertlab/dataset_lab.hpp"
#include "alertlab/hyperopt.hpp"
#include "alertlab/metrics.hpp"
#include "alertlab/pipeline.hpp"

namespace alertlab {

enum class ControlKind : std::uint8_t { FilteringMethod, DatasetSize, Dimensionality, Heterogeneity };

inline constexpr std::array<ControlKind, 4> kAllControls{ControlKind::FilteringMethod, ControlKind::DatasetSize,
                                                         ControlKind::Dimensionality, ControlKind::Heterogeneity};

std::string_view to_string(ControlKind k);
ControlKind parse_control_kind(std::string_view text);

// Desk-scale defaults for the pipeline knobs used by experiments.
Hyperparameters desk_hyperparameters();
TrainConfig desk_train_config();

struct ExperimentConfig {
    std::string name = "experiment";
    std::optional<SyntheticConfig> synthetic = SyntheticConfig{};
    std::filesystem::path alerts;               // used when `synthetic` is empty
    std::optional<TuningPlan> plan = TuningPlan{};
    std::array<std::filesystem::path, 3> filter_files;  // used when `plan` is empty
    std::vector<ControlKind> controls{kAllControls.begin(), kAllControls.end()};
    std::uint64_t control_seed = 1;
    Hyperparameters hp = desk_hyperparameters();
    std::optional<SearchBudget> hyperopt;  // per-dataset search instead of fixed `hp`
    TrainConfig train = desk_train_config();
    double hyperopt_frac = 0.01;
    double train_frac = 0.20;
    double balance_tolerance = 0.05;
    std::size_t repeats = 5;
    std::vector<std::uint64_t> seeds;  // empty: 1..repeats
    std::size_t threads = 0;           // 0: one per hardware thread
    bool write_classification_logs = true;
    std::filesystem::path raters;      // optional expert rater file
    std::string rater_dataset = "unfiltered";
    std::filesystem::path output_dir = "results";

    std::vector<std::uint64_t> run_seeds() const;
    void validate() const;  // throws ConfigError
};

// JSON mapping of ExperimentConfig. Unknown keys are rejected; relative input
// paths resolve against `base_dir`, a relative output_dir against `output_root`
// when given and `base_dir` otherwise.
ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir = {},
                                         const std::filesystem::path& output_root = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        const std::filesystem::path& output_root = {});
std::string experiment_config_json(const ExperimentConfig& cfg);

struct MetricsRow {
    std::string dataset;
    std::size_t run = 0;
    std::uint64_t seed = 0;
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
    double relaxed_p = 0.0;
    double relaxed_r = 0.0;
    double relaxed_f1 = 0.0;
    double label_ir = 0.0;
    double event_ir = 0.0;
    std::size_t size = 0;
    std::size_t heterogeneity = 0;
    std::size_t dimensionality = 0;
};

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> parse_metrics_csv(std::istream& in);

// Regression of relaxed F1 on the dataset characteristics of every run.
DesignMatrix design_from_metrics(const std::vector<MetricsRow>& rows);

struct ConfusionSummary {
    ConfusionMatrix mean;
    ConfusionMatrix sd;  // sample standard deviation over runs; 0 for a single run
};

ConfusionSummary summarize(const std::vector<ConfusionMatrix>& runs);

void write_confusion(std::ostream& out, const ConfusionMatrix& cm);
ConfusionMatrix parse_confusion(std::istream& in);
void write_confusion_summary(std::ostream& out, const std::vector<std::pair<std::string, ConfusionSummary>>& rows);

// Plot data: one point per run, and the per-dataset means.
void write_scatter(std::ostream& out, const std::vector<MetricsRow>& rows);
void write_ecdf(std::ostream& out, const std::vector<CdfPoint>& cdf);
void write_similarities(std::ostream& out, const ExplanationComparison& c);

struct DatasetEntry {
    std::string name;
    std::string group;  // unfiltered, tuned, or the control kind
    std::string level;  // tuned level the dataset mirrors; empty for unfiltered
    DatasetStats stats;
    Hyperparameters hp;
};

struct ExperimentResult {
    std::vector<DatasetEntry> datasets;
    std::vector<MetricsRow> metrics;            // dataset-major, then run
    std::vector<ConfusionMatrix> confusion;     // aligned with metrics
    std::array<double, 3> tuned_ir_complement{};
    std::vector<ProvenanceRow> provenance;
    std::optional<RegressionResult> regression;
    std::string regression_skipped;             // reason when no regression was fitted
    std::optional<ExplanationComparison> explanations;
};

// Generates or loads the source stream, builds the tuned suite and controls,
// runs every dataset once per seed, and writes all report files under
// cfg.output_dir (unless it is empty).
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace alertlab
