#include "alertlab/sequencer.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace alertlab {

EventIndex EventVocabulary::lookup(const std::string& rule_id) const {
    const auto it = index_.find(rule_id);
    return it == index_.end() ? kUnseen : it->second;
}

EventIndex EventVocabulary::add(const std::string& rule_id) {
    if (const auto it = index_.find(rule_id); it != index_.end()) return it->second;
    if (frozen_) throw ValidationError("vocabulary is frozen; cannot add '" + rule_id + "'");
    const auto e = static_cast<EventIndex>(names_.size());
    index_.emplace(rule_id, e);
    names_.push_back(rule_id);
    return e;
}

bool Sequence::has_unseen() const {
    return target == kUnseen ||
           std::find(context.begin(), context.end(), kUnseen) != context.end();
}

EventVocabulary build_vocabulary(const AlertDataset& d) {
    EventVocabulary v;
    for (const auto& a : d.alerts) v.add(a.rule_id);
    v.freeze();
    return v;
}

EventVocabulary vocabulary_of(const std::vector<Sequence>& seqs, const EventVocabulary& source) {
    std::vector<char> used(source.size(), 0);
    auto mark = [&](EventIndex e) {
        if (e >= 0) used[static_cast<std::size_t>(e)] = 1;
    };
    for (const auto& s : seqs) {
        mark(s.target);
        for (auto e : s.context) mark(e);
    }
    EventVocabulary v;
    for (std::size_t e = 0; e < used.size(); ++e) {
        if (used[e]) v.add(source.name(static_cast<EventIndex>(e)));
    }
    v.freeze();
    return v;
}

std::vector<Sequence> build_sequences(const AlertDataset& d, const EventVocabulary& v,
                                      std::size_t n, std::int64_t t) {
    if (n < 1) throw ConfigError("context length must be >= 1");
    if (t <= 0) throw ConfigError("context timeout must be > 0");

    struct Past {
        std::int64_t time;
        EventIndex event;
    };
    std::unordered_map<std::string, std::deque<Past>> history;
    std::vector<Sequence> out;
    out.reserve(d.size());

    for (const auto& a : d.alerts) {
        auto& past = history[a.host_id];
        // Eligible window is the open interval (timestamp - t, timestamp).
        while (!past.empty() && past.front().time <= a.timestamp - t) past.pop_front();

        Sequence s;
        s.context.assign(n, kPad);
        s.target = v.lookup(a.rule_id);
        s.host_id = a.host_id;
        s.timestamp = a.timestamp;
        s.label = a.label;

        std::size_t slot = n;
        for (auto it = past.rbegin(); it != past.rend() && slot > 0; ++it) {
            if (it->time >= a.timestamp) continue;  // simultaneous alerts are not context
            s.context[--slot] = it->event;
        }
        out.push_back(std::move(s));

        past.push_back({a.timestamp, v.lookup(a.rule_id)});
        // Later alerts need every event at the newest timestamp plus the n before them.
        std::size_t newest = 0;
        for (auto it = past.rbegin(); it != past.rend() && it->time == a.timestamp; ++it) ++newest;
        while (past.size() > newest + n) past.pop_front();
    }
    return out;
}

std::vector<Sequence> reindex(const std::vector<Sequence>& seqs, const EventVocabulary& from,
                              const EventVocabulary& to) {
    std::vector<EventIndex> map(from.size());
    for (std::size_t e = 0; e < from.size(); ++e) map[e] = to.lookup(from.name(static_cast<EventIndex>(e)));
    auto translate = [&](EventIndex e) { return e >= 0 ? map[static_cast<std::size_t>(e)] : e; };

    std::vector<Sequence> out = seqs;
    for (auto& s : out) {
        s.target = translate(s.target);
        for (auto& e : s.context) e = translate(e);
    }
    return out;
}

std::size_t ContextHash::operator()(const std::vector<EventIndex>& c) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (auto e : c) {
        h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(e));
        h *= 1099511628211ULL;
    }
    return h;
}

std::size_t count_unique_contexts(const std::vector<Sequence>& seqs) {
    std::unordered_set<std::vector<EventIndex>, ContextHash> seen;
    for (const auto& s : seqs) seen.insert(s.context);
    return seen.size();
}

void write_sequences(std::ostream& out, const std::vector<Sequence>& seqs, const EventVocabulary& v) {
    const std::size_t n = seqs.empty() ? 0 : seqs.front().context.size();
    out << "# schema: alertlab.sequences/1\n";
    out << "target,label,host_id,timestamp";
    for (std::size_t i = 0; i < n; ++i) out << ",ctx_" << i;
    out << '\n';
    auto render = [&](EventIndex e) -> const std::string& {
        static const std::string pad = "-";
        static const std::string unseen = "?";
        if (e == kPad) return pad;
        if (e == kUnseen) return unseen;
        return v.name(e);
    };
    for (const auto& s : seqs) {
        out << render(s.target) << ',' << to_string(s.label) << ',' << s.host_id << ',' << s.timestamp;
        for (auto e : s.context) out << ',' << render(e);
        out << '\n';
    }
}

SequenceFile parse_sequences(std::istream& in) {
    SequenceFile out;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool header = false;
    std::vector<std::string> fields;
    auto event = [&](const std::string& f) -> EventIndex {
        if (f == "-") return kPad;
        if (f == "?") return kUnseen;
        if (f.empty()) throw ParseError("empty event field", line_no);
        return out.vocabulary.add(f);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        fields.clear();
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        if (!header) {
            if (fields.size() < 4 || fields[0] != "target" || fields[1] != "label") {
                throw ParseError("expected header 'target,label,host_id,timestamp,ctx_0,...'", line_no);
            }
            width = fields.size() - 4;
            header = true;
            continue;
        }
        if (fields.size() != width + 4) {
            throw ParseError("expected " + std::to_string(width + 4) + " fields, got " + std::to_string(fields.size()),
                             line_no);
        }
        Sequence s;
        try {
            s.label = parse_label(fields[1]);
            std::size_t used = 0;
            s.timestamp = std::stoll(fields[3], &used);
            if (used != fields[3].size()) throw std::invalid_argument(fields[3]);
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(std::string("invalid field: ") + e.what(), line_no);
        }
        s.host_id = fields[2];
        s.context.reserve(width);
        for (std::size_t i = 0; i < width; ++i) s.context.push_back(event(fields[4 + i]));
        s.target = event(fields[0]);
        out.sequences.push_back(std::move(s));
    }
    if (!header) throw ParseError("missing header", line_no);
    out.vocabulary.freeze();
    return out;
}

}  // namespace alertlab
