#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "alertlab/common.hpp"
#include "alertlab/ingest.hpp"

namespace alertlab {

using EventIndex = std::int32_t;

inline constexpr EventIndex kPad = -1;
inline constexpr EventIndex kUnseen = -2;

// Dense rule_id -> index map. Once frozen, unknown rules resolve to kUnseen.
class EventVocabulary {
public:
    EventIndex lookup(const std::string& rule_id) const;
    EventIndex add(const std::string& rule_id);  // throws once frozen
    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }

    std::size_t size() const { return names_.size(); }
    const std::string& name(EventIndex e) const { return names_.at(static_cast<std::size_t>(e)); }
    const std::vector<std::string>& names() const { return names_; }

    bool operator==(const EventVocabulary& o) const { return names_ == o.names_ && frozen_ == o.frozen_; }

private:
    std::unordered_map<std::string, EventIndex> index_;
    std::vector<std::string> names_;
    bool frozen_ = false;
};

struct Sequence {
    std::vector<EventIndex> context;  // length n, oldest first, left-padded with kPad
    EventIndex target = kPad;
    std::string host_id;
    std::int64_t timestamp = 0;
    Label label = Label::NonIncident;

    bool has_unseen() const;
    bool operator==(const Sequence&) const = default;
};

EventVocabulary build_vocabulary(const AlertDataset& d);

// Vocabulary of the events a set of sequences actually mentions (contexts and targets).
EventVocabulary vocabulary_of(const std::vector<Sequence>& seqs, const EventVocabulary& source);

std::vector<Sequence> build_sequences(const AlertDataset& d, const EventVocabulary& v,
                                      std::size_t n, std::int64_t t);

// Translates indices of `from` into indices of the frozen `to` vocabulary.
std::vector<Sequence> reindex(const std::vector<Sequence>& seqs, const EventVocabulary& from,
                              const EventVocabulary& to);

struct ContextHash {
    std::size_t operator()(const std::vector<EventIndex>& c) const noexcept;
};

std::size_t count_unique_contexts(const std::vector<Sequence>& seqs);

// Events are written by rule id; `-` marks padding and `?` an unseen event.
void write_sequences(std::ostream& out, const std::vector<Sequence>& seqs, const EventVocabulary& v);

struct SequenceFile {
    std::vector<Sequence> sequences;
    EventVocabulary vocabulary;  // rule ids in order of first appearance, frozen
};

SequenceFile parse_sequences(std::istream& in);

}  // namespace alertlab
