#pragma once

#include "robustmc/matrix.hpp"

#include <cstdint>

namespace robustmc {

/// Counter-based generator: the k-th draw is a fixed mix of (seed, k), so the
/// stream depends only on the seed, never on the platform's <random>.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform integer in [0, bound); bound must be positive.
    std::uint64_t below(std::uint64_t bound);
    double normal();
    bool bernoulli(double prob) { return uniform() < prob; }

    Matrix gaussian(Eigen::Index rows, Eigen::Index cols);

    /// Independent generator for parallel task `index` (seed xor index).
    Rng child(std::uint64_t index) const { return Rng(seed_ ^ index); }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace robustmc
