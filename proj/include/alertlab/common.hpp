#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace alertlab {

enum class Label : std::uint8_t { NonIncident = 0, Incident = 1 };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

// Error hierarchy. The CLI maps each family onto a distinct exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ComputeError : public Error {
public:
    using Error::Error;
};

class TrainingDiverged : public ComputeError {
public:
    explicit TrainingDiverged(std::size_t epoch)
        : ComputeError("training diverged (non-finite loss) in epoch " + std::to_string(epoch)),
          epoch_(epoch) {}
    std::size_t epoch() const { return epoch_; }

private:
    std::size_t epoch_;
};

// Portable random source. std::mt19937_64 is fully specified by the standard,
// the distributions are not, so the derived draws are implemented here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    // Derives an independent stream, e.g. one per run or per dataset.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace alertlab
