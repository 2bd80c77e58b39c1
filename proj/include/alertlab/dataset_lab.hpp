#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "alertlab/ingest.hpp"
#include "alertlab/sequencer.hpp"

namespace alertlab {

// Simulated ruleset tuning: rules disabled everywhere or for single hosts.
struct RuleFilter {
    std::set<std::string> global_rules;
    std::set<std::pair<std::string, std::string>> per_host;  // (rule_id, host_id)

    bool empty() const { return global_rules.empty() && per_host.empty(); }
    bool matches(const AlertRecord& a) const;
    bool operator==(const RuleFilter&) const = default;
};

// Lines `global: rule_id` and `perhost: rule_id,host_id`; `#` starts a comment.
RuleFilter parse_rule_filter(std::istream& in);
RuleFilter load_rule_filter(const std::filesystem::path& path);
void write_rule_filter(std::ostream& out, const RuleFilter& f);

AlertDataset apply_rule_filter(const AlertDataset& d, const RuleFilter& f);

struct TuningPlan {
    std::size_t high_per_host = 1;  // busiest (rule, host) pairs disabled for the high-IR level
    std::size_t medium_rules = 2;   // most frequent rules disabled globally for medium IR
    std::size_t low_rules = 10;     // most frequent rules disabled globally for low IR
};

// Filters for the high, medium and low IR levels. Rules that ever raised an
// Incident alert are never selected.
std::array<RuleFilter, 3> suggest_filters(const AlertDataset& d, const TuningPlan& plan = {});

struct TunedSuite {
    std::array<AlertDataset, 3> levels;     // high, medium, low IR
    std::array<double, 3> ir_complement{};  // 1 - label IR per level
};

inline constexpr std::array<const char*, 3> kTunedLevelNames{"high_ir", "medium_ir", "low_ir"};

// Requires strictly decreasing label IR with each level in its own order of
// magnitude of (1 - IR); throws ConfigError listing the achieved values otherwise.
TunedSuite make_tuned_suite(const AlertDataset& d, const std::array<RuleFilter, 3>& levels);

// Alerts with their sequences, aligned by index (sequence i targets alert i).
struct LabDataset {
    AlertDataset alerts;
    EventVocabulary vocabulary;
    std::vector<Sequence> sequences;
    std::size_t n = 0;
    std::int64_t t = 0;

    std::size_t size() const { return sequences.size(); }
};

LabDataset make_lab_dataset(AlertDataset d, std::size_t n, std::int64_t t);
DatasetStats lab_stats(const LabDataset& d);

// Control generators. Sequence-level generators keep the surviving sequences
// exactly as built from the source stream; the dimensionality generator removes
// alerts and rebuilds the sequences.
LabDataset control_filtering_method(const LabDataset& d, std::size_t target_size, std::uint64_t seed);
LabDataset control_dataset_size(const LabDataset& d, std::size_t target_size,
                                double unfiltered_ir_complement, std::uint64_t seed);
LabDataset control_dimensionality(const LabDataset& d, std::size_t target_dimensionality, std::uint64_t seed);
LabDataset control_heterogeneity(const LabDataset& d, std::size_t target_heterogeneity,
                                 std::size_t target_size, std::uint64_t seed);

struct ProvenanceRow {
    std::string generator;
    std::uint64_t seed = 0;
    std::string target;
    std::string achieved;
};

void write_provenance(std::ostream& out, const std::vector<ProvenanceRow>& rows);

struct Splits {
    std::vector<Sequence> hyperopt;
    std::vector<Sequence> train;
    std::vector<Sequence> test;
};

// The first `hyperopt_frac` of the sequences go to hyperparameter search; the
// rest is split chronologically into train and test.
Splits chronological_splits(const std::vector<Sequence>& seqs, double hyperopt_frac = 0.01,
                            double train_frac = 0.20);

// Copies randomly chosen Incident sequences of `test` into `train` until the
// train incident fraction reaches the test fraction within `tolerance` (relative).
std::vector<Sequence> balance_incidents(const std::vector<Sequence>& train, const std::vector<Sequence>& test,
                                        std::uint64_t seed, double tolerance = 0.05);

double incident_fraction(const std::vector<Sequence>& seqs);

}  // namespace alertlab
