#pragma once

#include <cstdint>
#include <string>

namespace alertlab {

inline constexpr std::int64_t kDay = 86400;
inline constexpr std::int64_t kWeek = 7 * kDay;
inline constexpr std::int64_t kMonth = 30 * kDay;

// Pipeline knobs: context length and timeout, context-builder width, label
// smoothing, confidence gate and the DBSCAN radius / minimum cluster size.
struct Hyperparameters {
    std::size_t n = 10;
    std::int64_t t = kDay;
    std::size_t hidden_nodes = 64;
    double delta = 0.1;
    double tau_confidence = 0.2;
    double epsilon = 0.1;
    std::size_t min_cluster_size = 5;

    void validate() const;  // throws ConfigError
    bool operator==(const Hyperparameters&) const = default;
};

std::string describe(const Hyperparameters& hp);

}  // namespace alertlab
