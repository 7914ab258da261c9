#include "lmsim/random.hpp"

#include "lmsim/util.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

namespace lmsim {

namespace {

// splitmix64 output function (Steele, Lea, Flood 2014).
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

} // namespace

RandomStream::RandomStream(std::uint64_t base) : base_(base), state_(base) {}

RandomStream::RandomStream(std::uint64_t seed, std::string_view label)
    : RandomStream(combine(mix64(seed), fnv1a64(label))) {}

RandomStream RandomStream::derive(std::string_view label) const {
    return RandomStream(combine(base_, fnv1a64(label)));
}

std::uint64_t RandomStream::next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double RandomStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::uniform_below(std::uint64_t bound) {
    assert(bound > 0);
    // Rejection sampling to avoid modulo bias.
    std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
        std::uint64_t v = next_u64();
        if (v >= threshold) {
            return v % bound;
        }
    }
}

double RandomStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

bool RandomStream::bernoulli(double p) {
    return uniform01() < p;
}

double RandomStream::normal(double mean, double sd) {
    double u1 = 1.0 - uniform01(); // (0, 1]
    double u2 = uniform01();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + sd * z;
}

long long RandomStream::poisson(double lambda) {
    if (lambda <= 0.0) {
        return 0;
    }
    // Poisson(a) + Poisson(b) ~ Poisson(a + b) for independent draws, so
    // large rates split in half until Knuth's method is cheap.
    if (lambda > 30.0) {
        return poisson(lambda * 0.5) + poisson(lambda * 0.5);
    }
    double limit = std::exp(-lambda);
    long long k = 0;
    double product = 1.0;
    do {
        ++k;
        product *= uniform01();
    } while (product > limit);
    return k - 1;
}

std::size_t RandomStream::categorical(std::span<const double> weights) {
    assert(!weights.empty());
    double total = 0.0;
    for (double w : weights) {
        assert(w >= 0.0);
        total += w;
    }
    assert(total > 0.0);
    double x = uniform01() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        cum += weights[i];
        if (x < cum) {
            return i;
        }
    }
    // Numerical edge: fall back to the last positive-weight index.
    for (std::size_t i = weights.size(); i-- > 0;) {
        if (weights[i] > 0.0) {
            return i;
        }
    }
    return weights.size() - 1;
}

} // namespace lmsim
