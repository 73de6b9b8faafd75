#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qkd/privacy.hpp"
#include "qkd/rng.hpp"

using namespace qkd;
using namespace qkd::privacy;

TEST_CASE("hand-derived 4x2 matrix product") {
    // seed 10110 with T[j][i] = seed[j-i+n-1] gives rows [1,1,0,1] and
    // [0,1,1,0]; key 1100 hashes to (1*1^1*1, 1*0^1*1) = (0, 1).
    HashSpec spec;
    spec.n = 4;
    spec.m = 2;
    spec.seed = BitVec::from_string("10110");
    const BitVec key = BitVec::from_string("1100");
    const BitVec out = pa_hash(key, spec);
    CHECK(out.to_string() == "01");
    CHECK(oracles::toeplitz_rowwise(key, spec.seed, 2).to_string() == "01");
}

TEST_CASE("fast hash equals the row-by-row oracle") {
    Rng rng(201);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(300);
        const std::size_t m = rng.below(n + 1);
        HashSpec spec = HashSpec::from_rng(n, m, rng);
        const BitVec key = rng.random_bits(n);
        CHECK(pa_hash(key, spec) == oracles::toeplitz_rowwise(key, spec.seed, m));
    }
}

TEST_CASE("hash edge cases and validation") {
    Rng rng(202);
    HashSpec spec = HashSpec::from_rng(16, 0, rng);
    CHECK(pa_hash(rng.random_bits(16), spec).size() == 0);

    HashSpec bad;
    bad.n = 4;
    bad.m = 6;
    bad.seed = rng.random_bits(9);
    CHECK_THROWS_AS(pa_hash(rng.random_bits(4), bad), std::invalid_argument);

    HashSpec short_seed;
    short_seed.n = 8;
    short_seed.m = 4;
    short_seed.seed = rng.random_bits(5);
    CHECK_THROWS_AS(pa_hash(rng.random_bits(8), short_seed), std::invalid_argument);

    // determinism
    HashSpec spec2 = HashSpec::from_rng(64, 32, rng);
    const BitVec key = rng.random_bits(64);
    CHECK(pa_hash(key, spec2) == pa_hash(key, spec2));
}

TEST_CASE("Toeplitz map is linear") {
    Rng rng(203);
    HashSpec spec = HashSpec::from_rng(128, 48, rng);
    for (int trial = 0; trial < 100; ++trial) {
        const BitVec x = rng.random_bits(128);
        const BitVec y = rng.random_bits(128);
        BitVec xy(128);
        for (std::size_t i = 0; i < 128; ++i) xy.set(i, x.get(i) ^ y.get(i));
        const BitVec hx = pa_hash(x, spec);
        const BitVec hy = pa_hash(y, spec);
        BitVec hxy(48);
        for (std::size_t i = 0; i < 48; ++i) hxy.set(i, hx.get(i) ^ hy.get(i));
        CHECK(pa_hash(xy, spec) == hxy);
    }
}

TEST_CASE("collision probability obeys the 2-universal bound") {
    Rng rng(204);
    const std::size_t n = 40, m = 8;
    const BitVec x = rng.random_bits(n);
    BitVec y = rng.random_bits(n);
    if (x == y) y.flip(0);
    const int seeds = 20000;
    int collisions = 0;
    for (int s = 0; s < seeds; ++s) {
        HashSpec spec = HashSpec::from_rng(n, m, rng);
        if (pa_hash(x, spec) == pa_hash(y, spec)) ++collisions;
    }
    // distinct inputs collide with probability exactly 2^-m over the seed
    const double p = std::pow(2.0, -double(m));
    const double sigma = std::sqrt(p * (1 - p) * seeds);
    CHECK(std::abs(collisions - p * seeds) <= 3.0 * sigma);
}

TEST_CASE("verification tags separate unequal keys") {
    Rng rng(205);
    const BitVec key = rng.random_bits(512);
    BitVec other = key;
    other.flip(rng.below(512));

    int differ = 0;
    const int seeds = 10000;
    for (int s = 0; s < seeds; ++s) {
        const std::uint64_t seed = rng.next_u64();
        const BitVec ta = verification_tag(key, seed, 16);
        const BitVec tb = verification_tag(other, seed, 16);
        CHECK(verification_tag(key, seed, 16) == ta); // equal keys, equal tags
        if (!(ta == tb)) ++differ;
    }
    // collision chance 2^-16 per seed
    CHECK(differ >= seeds - 4);
}

TEST_CASE("amplify concatenates the per-basis keys before hashing") {
    Rng rng(206);
    const BitVec x = rng.random_bits(100);
    const BitVec z = rng.random_bits(300);
    const std::size_t m = 128;
    const BitVec seed = rng.random_bits(400 + m - 1);
    const BitVec out = amplify(x, z, m, seed);
    BitVec joined = x;
    joined.append(z);
    HashSpec spec;
    spec.n = 400;
    spec.m = m;
    spec.seed = seed;
    CHECK(out == pa_hash(joined, spec));
    CHECK(amplify(x, z, 0, BitVec{}).size() == 0);
}
