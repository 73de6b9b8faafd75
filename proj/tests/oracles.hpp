#pragma once

// Test-only reference implementations, kept independent of the library
// code paths they check.

#include <cmath>
#include <cstdint>
#include <vector>

#include "qkd/bitvec.hpp"

namespace oracles {

/// Row-by-row binary Toeplitz product: row j of the matrix is
/// seed[j - i + n - 1] over columns i; output bit j is the dot product
/// with the key over GF(2).
inline qkd::BitVec toeplitz_rowwise(const qkd::BitVec& key, const qkd::BitVec& seed,
                                    std::size_t m) {
    const std::size_t n = key.size();
    qkd::BitVec out(m);
    for (std::size_t j = 0; j < m; ++j) {
        bool acc = false;
        for (std::size_t i = 0; i < n; ++i)
            acc ^= key.get(i) && seed.get(j - i + n - 1);
        out.set(j, acc);
    }
    return out;
}

/// Long-double re-evaluation of the final-length formula, written
/// spreadsheet style.
inline long double secure_length_ref(std::uint64_t n_xx, std::uint64_t n_zz, long double e_bx,
                                     long double e_bz, long double eps_x, long double eps_z,
                                     std::uint64_t leak_x, std::uint64_t leak_z) {
    auto h = [](long double x) -> long double {
        if (x <= 0.0L || x >= 1.0L) return 0.0L;
        return (-x * std::log(x) - (1.0L - x) * std::log(1.0L - x)) / std::log(2.0L);
    };
    const long double ax = std::min(e_bz + eps_x, 0.5L);
    const long double az = std::min(e_bx + eps_z, 0.5L);
    long double v = n_xx * (1.0L - h(ax)) - leak_x + n_zz * (1.0L - h(az)) - leak_z;
    return v > 0.0L ? std::floor(v) : 0.0L;
}

} // namespace oracles
