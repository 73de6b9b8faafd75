#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "qkd/bitvec.hpp"

namespace qkd {

/// Mixes a base seed with a label and index into an independent child seed,
/// so every consumer of randomness in a run gets its own named stream.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t index = 0);

/// Deterministic generator. mt19937_64 raw output is pinned by the standard,
/// and all derived draws below are implemented here rather than with
/// std:: distributions, so two builds produce identical streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double next_unit() { return (gen_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_unit() < p; }

    /// Uniform in [0, bound). bound must be nonzero.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do { x = gen_(); } while (x >= limit);
        return x % bound;
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    BitVec random_bits(std::size_t nbits) {
        BitVec out(nbits);
        auto words = out.words();
        for (auto& w : words) w = gen_();
        if (nbits & 63) words[words.size() - 1] &= (std::uint64_t{1} << (nbits & 63)) - 1;
        return out;
    }

private:
    std::mt19937_64 gen_;
};

} // namespace qkd
