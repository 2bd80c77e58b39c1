#include "alertlab/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "alertlab/metrics.hpp"
#include "alertlab/sequencer.hpp"

namespace alertlab {

namespace {

constexpr std::string_view kCsvHeader = "timestamp,rule_id,host_id,label,scenario_id";

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::int64_t parse_timestamp(std::string_view text, std::size_t line) {
    std::int64_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError("timestamp is not an integer: '" + std::string(text) + "'", line);
    }
    if (value < 0) {
        throw ValidationError("line " + std::to_string(line) + ": negative timestamp " +
                              std::to_string(value));
    }
    return value;
}

Label label_at(std::string_view text, std::size_t line) {
    try {
        return parse_label(text);
    } catch (const ValidationError& e) {
        throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

AlertRecord parse_csv_row(std::string_view row, std::size_t line) {
    const auto fields = split(row, ',');
    if (fields.size() != 5) {
        throw ParseError("expected 5 fields, found " + std::to_string(fields.size()), line);
    }
    AlertRecord a;
    a.timestamp = parse_timestamp(fields[0], line);
    if (fields[1].empty()) throw ParseError("empty rule_id", line);
    if (fields[2].empty()) throw ParseError("empty host_id", line);
    a.rule_id = fields[1];
    a.host_id = fields[2];
    a.label = label_at(fields[3], line);
    if (!fields[4].empty()) a.scenario_id = std::string(fields[4]);
    return a;
}

AlertRecord parse_json_row(const std::string& row, std::size_t line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(row);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), line);
    }
    if (!j.is_object()) throw ParseError("expected a JSON object", line);
    auto field = [&](const char* key) -> const nlohmann::json& {
        if (!j.contains(key)) throw ParseError(std::string("missing field '") + key + "'", line);
        return j.at(key);
    };
    AlertRecord a;
    const auto& ts = field("timestamp");
    if (!ts.is_number_integer()) throw ParseError("timestamp is not an integer", line);
    a.timestamp = ts.get<std::int64_t>();
    if (a.timestamp < 0) {
        throw ValidationError("line " + std::to_string(line) + ": negative timestamp " +
                              std::to_string(a.timestamp));
    }
    const auto& rule = field("rule_id");
    const auto& host = field("host_id");
    const auto& label = field("label");
    if (!rule.is_string() || !host.is_string() || !label.is_string()) {
        throw ParseError("rule_id, host_id and label must be strings", line);
    }
    a.rule_id = rule.get<std::string>();
    a.host_id = host.get<std::string>();
    if (a.rule_id.empty()) throw ParseError("empty rule_id", line);
    if (a.host_id.empty()) throw ParseError("empty host_id", line);
    a.label = label_at(label.get<std::string>(), line);
    if (j.contains("scenario_id") && !j["scenario_id"].is_null()) {
        if (!j["scenario_id"].is_string()) throw ParseError("scenario_id must be a string", line);
        auto s = j["scenario_id"].get<std::string>();
        if (!s.empty()) a.scenario_id = std::move(s);
    }
    return a;
}

std::string format_path_error(const std::filesystem::path& path) {
    return "cannot open '" + path.string() + "'";
}

}  // namespace

std::string_view to_string(Label label) {
    return label == Label::Incident ? "Incident" : "NonIncident";
}

Label parse_label(std::string_view text) {
    if (text == "NonIncident") return Label::NonIncident;
    if (text == "Incident") return Label::Incident;
    throw ValidationError("unknown label '" + std::string(text) + "'");
}

std::size_t AlertDataset::incident_count() const {
    return static_cast<std::size_t>(std::count_if(alerts.begin(), alerts.end(), [](const auto& a) {
        return a.label == Label::Incident;
    }));
}

void sort_chronologically(AlertDataset& d) {
    std::stable_sort(d.alerts.begin(), d.alerts.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
}

void validate(const AlertRecord& a) {
    if (a.timestamp < 0) throw ValidationError("negative timestamp");
    if (a.rule_id.empty() || a.host_id.empty()) throw ValidationError("empty identifier");
    for (const auto& s : {a.rule_id, a.host_id, a.scenario_id.value_or("")}) {
        if (s.find_first_of(",\n\r") != std::string::npos) {
            throw ValidationError("identifier contains a separator: '" + s + "'");
        }
    }
}

AlertFormat format_from_path(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return AlertFormat::Jsonl;
    return AlertFormat::Csv;
}

AlertDataset parse_alerts(std::istream& in, AlertFormat format, std::string name) {
    AlertDataset d;
    d.name = std::move(name);
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty() || line.front() == '#') continue;
        if (format == AlertFormat::Csv) {
            if (!header_seen) {
                if (line != kCsvHeader) {
                    throw ParseError("expected header '" + std::string(kCsvHeader) + "'", line_no);
                }
                header_seen = true;
                continue;
            }
            d.alerts.push_back(parse_csv_row(line, line_no));
        } else {
            d.alerts.push_back(parse_json_row(line, line_no));
        }
    }
    sort_chronologically(d);
    return d;
}

AlertDataset parse_alerts(const std::filesystem::path& path, AlertFormat format) {
    std::ifstream in(path);
    if (!in) throw ValidationError(format_path_error(path));
    return parse_alerts(in, format, path.stem().string());
}

AlertDataset parse_alerts(const std::filesystem::path& path) {
    return parse_alerts(path, format_from_path(path));
}

void write_alerts(std::ostream& out, const AlertDataset& d, AlertFormat format) {
    if (format == AlertFormat::Csv) {
        out << kCsvHeader << '\n';
        for (const auto& a : d.alerts) {
            validate(a);
            out << a.timestamp << ',' << a.rule_id << ',' << a.host_id << ',' << to_string(a.label)
                << ',' << a.scenario_id.value_or("") << '\n';
        }
        return;
    }
    for (const auto& a : d.alerts) {
        validate(a);
        nlohmann::ordered_json j;
        j["timestamp"] = a.timestamp;
        j["rule_id"] = a.rule_id;
        j["host_id"] = a.host_id;
        j["label"] = std::string(to_string(a.label));
        j["scenario_id"] = a.scenario_id.value_or("");
        out << j.dump() << '\n';
    }
}

void write_alerts(const std::filesystem::path& path, const AlertDataset& d, AlertFormat format) {
    std::ofstream out(path);
    if (!out) throw ValidationError(format_path_error(path));
    write_alerts(out, d, format);
}

// --- synthetic stream -----------------------------------------------------

void SyntheticConfig::validate() const {
    if (n_rules < 2) throw ConfigError("n_rules must be >= 2");
    if (n_alerts < 1) throw ConfigError("n_alerts must be >= 1");
    if (!(rule_skew > 0.0)) throw ConfigError("rule_skew must be > 0");
    if (n_hosts < 1) throw ConfigError("n_hosts must be >= 1");
    if (duration < 1) throw ConfigError("duration must be >= 1 second");
    if (!(burst_mean >= 1.0)) throw ConfigError("burst_mean must be >= 1");
    if (burst_gap < 1) throw ConfigError("burst_gap must be >= 1 second");
    if (start_time < 0) throw ConfigError("start_time must be >= 0");
    if (hosts_per_rule > n_hosts) throw ConfigError("hosts_per_rule exceeds n_hosts");
    if (n_scenarios > 0) {
        if (alerts_per_scenario < 1) throw ConfigError("alerts_per_scenario must be >= 1");
        if (rules_per_scenario < 1) throw ConfigError("rules_per_scenario must be >= 1");
        if (!disjoint_incident_rules && rules_per_scenario > n_rules / 2) {
            throw ConfigError("rules_per_scenario exceeds the tail half of the rule set");
        }
        if (max_scenario_gap < 1) throw ConfigError("max_scenario_gap must be >= 1");
        if (!(scenario_start >= 0.0 && scenario_start < 1.0)) throw ConfigError("scenario_start must lie in [0, 1)");
    }
}

namespace {

std::string numbered(char prefix, std::size_t i, int width) {
    std::string digits_text = std::to_string(i);
    if (static_cast<int>(digits_text.size()) < width) digits_text.insert(0, static_cast<std::size_t>(width) - digits_text.size(), '0');
    return prefix + digits_text;
}

int digits(std::size_t n) { return n < 10 ? 1 : 1 + digits(n / 10); }

// Inverse-CDF sampler over a fixed discrete distribution.
class DiscreteSampler {
public:
    explicit DiscreteSampler(const std::vector<double>& weights) : cumulative_(weights.size()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            cumulative_[i] = acc;
        }
    }
    std::size_t operator()(Rng& rng) const {
        const double u = rng.uniform() * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                     cumulative_.size() - 1);
    }

private:
    std::vector<double> cumulative_;
};

}  // namespace

std::vector<std::string> rule_names(const SyntheticConfig& cfg) {
    const std::size_t total =
        cfg.n_rules + (cfg.disjoint_incident_rules ? cfg.n_scenarios * cfg.rules_per_scenario : 0);
    const int width = std::max(3, digits(total));
    std::vector<std::string> names;
    names.reserve(total);
    for (std::size_t r = 0; r < total; ++r) names.push_back(numbered('R', r + 1, width));
    return names;
}

AlertDataset generate_stream(const SyntheticConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const auto rules = rule_names(cfg);
    const int host_width = std::max(4, digits(cfg.n_hosts));
    std::vector<std::string> hosts;
    for (std::size_t h = 0; h < cfg.n_hosts; ++h) hosts.push_back(numbered('H', h + 1, host_width));

    std::vector<double> zipf(cfg.n_rules);
    for (std::size_t r = 0; r < cfg.n_rules; ++r) {
        zipf[r] = std::pow(static_cast<double>(r + 1), -cfg.rule_skew);
    }
    const DiscreteSampler rule_sampler(zipf);

    // Optional rule -> host affinity: each rule fires on a fixed subset of hosts.
    std::vector<std::vector<std::size_t>> rule_hosts;
    if (cfg.hosts_per_rule > 0) {
        rule_hosts.resize(cfg.n_rules);
        for (auto& set : rule_hosts) {
            std::vector<std::size_t> pool(cfg.n_hosts);
            for (std::size_t h = 0; h < cfg.n_hosts; ++h) pool[h] = h;
            for (std::size_t k = 0; k < cfg.hosts_per_rule; ++k) {
                const auto j = k + rng.below(cfg.n_hosts - k);
                std::swap(pool[k], pool[j]);
                set.push_back(pool[k]);
            }
        }
    }

    AlertDataset d;
    d.name = "synthetic";
    d.alerts.reserve(cfg.n_alerts + cfg.n_scenarios * cfg.alerts_per_scenario);
    // Background alerts arrive in bursts of one rule on one host; burst lengths
    // are geometric with the configured mean.
    const double stop_p = 1.0 / cfg.burst_mean;
    while (d.alerts.size() < cfg.n_alerts) {
        const auto r = rule_sampler(rng);
        const auto h = rule_hosts.empty() || r < cfg.broad_rules
                           ? rng.below(cfg.n_hosts)
                           : rule_hosts[r][rng.below(rule_hosts[r].size())];
        std::int64_t t = cfg.start_time + static_cast<std::int64_t>(rng.below(cfg.duration));
        do {
            AlertRecord a;
            a.timestamp = std::min(t, cfg.start_time + cfg.duration - 1);
            a.rule_id = rules[r];
            a.host_id = hosts[h];
            d.alerts.push_back(std::move(a));
            t += 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(cfg.burst_gap)));
        } while (d.alerts.size() < cfg.n_alerts && rng.uniform() >= stop_p);
    }

    // Incident rule pool: dedicated rules, or the rarest half of the background rules.
    std::vector<std::size_t> pool;
    if (cfg.disjoint_incident_rules) {
        for (std::size_t r = cfg.n_rules; r < rules.size(); ++r) pool.push_back(r);
    } else {
        for (std::size_t r = cfg.n_rules - cfg.n_rules / 2; r < cfg.n_rules; ++r) pool.push_back(r);
    }
    const int scenario_width = std::max(2, digits(cfg.n_scenarios));
    for (std::size_t s = 0; s < cfg.n_scenarios; ++s) {
        // Kill-chain phases: each scenario walks through its own ordered rule subset.
        std::vector<std::size_t> phase_rules;
        if (cfg.disjoint_incident_rules) {
            for (std::size_t k = 0; k < cfg.rules_per_scenario; ++k) {
                phase_rules.push_back(pool[s * cfg.rules_per_scenario + k]);
            }
        } else {
            auto shuffled = pool;
            for (std::size_t k = 0; k < cfg.rules_per_scenario; ++k) {
                const auto j = k + rng.below(shuffled.size() - k);
                std::swap(shuffled[k], shuffled[j]);
                phase_rules.push_back(shuffled[k]);
            }
        }
        const auto host = rng.below(cfg.n_hosts);
        const auto span = static_cast<std::int64_t>(cfg.alerts_per_scenario) * cfg.max_scenario_gap;
        const auto earliest = static_cast<std::int64_t>(cfg.scenario_start * static_cast<double>(cfg.duration));
        const auto latest = std::max<std::int64_t>(1, cfg.duration - span - earliest);
        std::int64_t t = cfg.start_time + earliest + static_cast<std::int64_t>(rng.below(latest));
        const auto scenario = numbered('S', s + 1, scenario_width);
        for (std::size_t k = 0; k < cfg.alerts_per_scenario; ++k) {
            std::size_t phase = k * cfg.rules_per_scenario / cfg.alerts_per_scenario;
            // Occasional step back to an earlier phase keeps bursts from being strictly periodic.
            if (phase > 0 && rng.uniform() < 0.2) phase -= 1;
            AlertRecord a;
            a.timestamp = t;
            a.rule_id = rules[phase_rules[phase]];
            a.host_id = hosts[host];
            a.label = Label::Incident;
            a.scenario_id = scenario;
            d.alerts.push_back(std::move(a));
            t += 1 + static_cast<std::int64_t>(rng.below(cfg.max_scenario_gap));
        }
    }
    sort_chronologically(d);
    return d;
}

// --- statistics -----------------------------------------------------------

DatasetStats dataset_stats(const AlertDataset& d, const std::vector<Sequence>* seqs) {
    DatasetStats s;
    s.size = d.size();
    s.incidents = d.incident_count();
    std::map<std::string, std::size_t> per_rule;
    for (const auto& a : d.alerts) ++per_rule[a.rule_id];
    s.dimensionality = per_rule.size();

    if (s.incidents > 0 && s.incidents < s.size) {
        const ClassCounts labels({s.size - s.incidents, s.incidents});
        s.label_ir_complement = imbalance_complement(labels);
        s.label_ir = compute_ir(labels);
    }
    if (per_rule.size() >= 2) {
        std::vector<std::size_t> counts;
        for (const auto& [rule, n] : per_rule) counts.push_back(n);
        s.event_ir = compute_ir(ClassCounts(std::move(counts)));
    }
    if (seqs != nullptr) s.heterogeneity = count_unique_contexts(*seqs);
    return s;
}

}  // namespace alertlab
