#pragma once

#include <cstdint>

namespace identikit {

// Counter-based random stream: every draw is a pure function of
// (seed, stream, counter), so callers can partition work across threads
// and still reproduce results bit-for-bit.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t bits(std::uint64_t counter) const;
    // Uniform on the open interval (0, 1).
    double uniform(std::uint64_t counter) const;
    // Standard normal via Box–Muller on counters 2k, 2k+1.
    double normal(std::uint64_t k) const;

    // Child stream for an independent sub-task.
    CounterRng split(std::uint64_t child) const;

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
};

std::uint64_t mix64(std::uint64_t x);

// Sequential convenience wrapper around a CounterRng.
class RngStream {
public:
    explicit RngStream(CounterRng rng) : rng_(rng) {}
    double uniform() { return rng_.uniform(counter_++); }
    double normal() { return rng_.normal(counter_++); }
    std::uint64_t bits() { return rng_.bits(counter_++); }
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    CounterRng rng_;
    std::uint64_t counter_ = 0;
};

} // namespace identikit
