#include "identikit/rng.hpp"

#include <cmath>
#include <numbers>

namespace identikit {

std::uint64_t mix64(std::uint64_t x) {
    // SplitMix64 finaliser
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed) ^ (stream * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL))) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
    return mix64(key_ ^ mix64(counter));
}

double CounterRng::uniform(std::uint64_t counter) const {
    // 53 random bits, shifted off zero
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t k) const {
    const double u1 = uniform(2 * k);
    const double u2 = uniform(2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

CounterRng CounterRng::split(std::uint64_t child) const {
    return CounterRng(key_, child + 1);
}

std::uint64_t RngStream::below(std::uint64_t n) {
    // Lemire's multiply-shift; the slight bias is irrelevant for bootstrap indices.
    const unsigned __int128 product = static_cast<unsigned __int128>(bits()) * n;
    return static_cast<std::uint64_t>(product >> 64);
}

} // namespace identikit
