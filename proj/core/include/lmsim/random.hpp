#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace lmsim {

/// Deterministic counter-based random stream.
///
/// A stream is identified by a (seed, label) pair and always produces the
/// same sequence for the same pair, on every platform. derive() creates a
/// child stream keyed on the parent's identity and the child label; the
/// child is unaffected by how many values the parent has produced, so
/// modules never perturb each other's draws regardless of execution order.
///
/// All distribution helpers are implemented locally because the standard
/// library's distributions are implementation-defined and would break the
/// cross-platform reproducibility contract.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::string_view label);

    RandomStream derive(std::string_view label) const;

    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double uniform01();

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t uniform_below(std::uint64_t bound);

    double uniform(double lo, double hi);

    bool bernoulli(double p);

    /// Box-Muller, two uniforms per value, no caching.
    double normal(double mean, double sd);

    /// Knuth's product method; large rates split into independent halves.
    long long poisson(double lambda);

    /// Index drawn proportionally to weights (nonnegative, sum > 0).
    std::size_t categorical(std::span<const double> weights);

private:
    explicit RandomStream(std::uint64_t base);

    std::uint64_t base_;  // stream identity, used by derive()
    std::uint64_t state_; // advances with each draw
};

} // namespace lmsim
