#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "alertlab/common.hpp"

namespace alertlab {

struct Sequence;

struct AlertRecord {
    std::int64_t timestamp = 0;  // seconds since epoch
    std::string rule_id;
    std::string host_id;
    Label label = Label::NonIncident;
    std::optional<std::string> scenario_id;  // set for injected attack alerts

    bool operator==(const AlertRecord&) const = default;
};

// Alerts ordered by timestamp; ties keep their input order.
struct AlertDataset {
    std::string name;
    std::vector<AlertRecord> alerts;

    std::size_t size() const { return alerts.size(); }
    std::size_t incident_count() const;
    bool operator==(const AlertDataset&) const = default;
};

void sort_chronologically(AlertDataset& d);
void validate(const AlertRecord& a);

enum class AlertFormat { Csv, Jsonl };

AlertFormat format_from_path(const std::filesystem::path& path);

AlertDataset parse_alerts(std::istream& in, AlertFormat format, std::string name = {});
AlertDataset parse_alerts(const std::filesystem::path& path, AlertFormat format);
AlertDataset parse_alerts(const std::filesystem::path& path);

void write_alerts(std::ostream& out, const AlertDataset& d, AlertFormat format);
void write_alerts(const std::filesystem::path& path, const AlertDataset& d, AlertFormat format);

// Desk-scale synthetic NIDS stream: Zipf-distributed background rules plus
// host-localized bursts of attack alerts.
struct SyntheticConfig {
    std::size_t n_rules = 100;
    std::size_t n_hosts = 200;
    std::size_t n_alerts = 245000;  // background alerts
    double rule_skew = 3.0;         // Zipf exponent over rule rank
    std::size_t hosts_per_rule = 5; // 0: any host may raise any rule
    std::size_t broad_rules = 0;    // the most frequent rules ignore hosts_per_rule
    double burst_mean = 4.0;        // mean background alerts per (rule, host) burst
    std::int64_t burst_gap = 60;    // max seconds between alerts of one burst
    std::size_t n_scenarios = 10;
    std::size_t alerts_per_scenario = 62;
    std::size_t rules_per_scenario = 4;
    bool disjoint_incident_rules = false;  // dedicated rules vs. tail of the background rules
    std::int64_t duration = 35 * 86400;
    std::int64_t start_time = 1648512000;  // 2022-03-29T00:00:00Z
    std::int64_t max_scenario_gap = 900;   // seconds between consecutive attack alerts
    double scenario_start = 0.25;          // attacks begin after this fraction of the duration
    std::uint64_t seed = 1;

    void validate() const;
};

AlertDataset generate_stream(const SyntheticConfig& cfg);

std::vector<std::string> rule_names(const SyntheticConfig& cfg);

struct DatasetStats {
    std::size_t size = 0;
    std::size_t incidents = 0;
    std::size_t dimensionality = 0;
    std::optional<double> label_ir;
    std::optional<double> label_ir_complement;  // 1 - IR, kept separately for precision
    std::optional<double> event_ir;
    std::optional<std::size_t> heterogeneity;
};

DatasetStats dataset_stats(const AlertDataset& d, const std::vector<Sequence>* seqs = nullptr);

}  // namespace alertlab
