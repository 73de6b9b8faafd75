#pragma once

#include <cstdint>

#include "qkd/bitvec.hpp"
#include "qkd/rng.hpp"

namespace qkd::privacy {

/// Binary Toeplitz matrix descriptor: m x n with diagonals taken from
/// `seed`, T[j][i] = seed[j - i + n - 1]. The seed must hold exactly
/// n + m - 1 bits (n bits across the first row, m - 1 continuing down the
/// first column).
struct HashSpec {
    std::size_t n = 0;
    std::size_t m = 0;
    BitVec seed;

    static HashSpec from_rng(std::size_t n, std::size_t m, Rng& rng);
    void validate() const;
};

/// Bits [offset, offset + out_bits) of the carry-less product a(x) * b(x).
/// Word-sliced; uses the carry-less multiply instruction when the CPU has
/// it and a nibble-table fallback otherwise.
BitVec gf2_conv_slice(const BitVec& a, const BitVec& b, std::size_t offset,
                      std::size_t out_bits);

/// Toeplitz hash of `key` (length spec.n) down to spec.m bits, computed as
/// a slice of the key-seed convolution.
BitVec pa_hash(const BitVec& key, const HashSpec& spec);

/// Short 2-universal tag for error verification: equal keys always agree,
/// distinct keys collide with probability at most 2^-tag_len over the seed.
BitVec verification_tag(const BitVec& key, std::uint64_t tag_seed, std::size_t tag_len);

/// Final-key compression: hashes the concatenated per-basis corrected keys
/// down to m bits with a shared seed (seed length must be
/// |x| + |z| + m - 1).
BitVec amplify(const BitVec& corrected_x, const BitVec& corrected_z,
               std::size_t m, const BitVec& seed_bits);

} // namespace qkd::privacy
