#include "qkd/privacy.hpp"

#include <cstring>
#include <stdexcept>
#include <vector>

#if defined(__x86_64__) && defined(__GNUC__)
#include <wmmintrin.h>
#define QKD_HAVE_CLMUL_TARGET 1
#endif

namespace qkd::privacy {

namespace {

// c[i+j], c[i+j+1] accumulate the 128-bit carry-less product a[i] * b[j]
// for all pairs with i + j in [pair_lo, pair_hi].

#if QKD_HAVE_CLMUL_TARGET
__attribute__((target("pclmul,sse2")))
void conv_words_clmul(const std::uint64_t* a, std::size_t na,
                      const std::uint64_t* b, std::size_t nb,
                      std::size_t pair_lo, std::size_t pair_hi, std::uint64_t* c) {
    for (std::size_t i = 0; i < na; ++i) {
        if (a[i] == 0) continue;
        const __m128i va = _mm_set_epi64x(0, static_cast<long long>(a[i]));
        const std::size_t j_begin = pair_lo > i ? pair_lo - i : 0;
        const std::size_t j_end = pair_hi >= i ? std::min(nb, pair_hi - i + 1) : 0;
        for (std::size_t j = j_begin; j < j_end; ++j) {
            if (b[j] == 0) continue;
            const __m128i vb = _mm_set_epi64x(0, static_cast<long long>(b[j]));
            const __m128i r = _mm_clmulepi64_si128(va, vb, 0x00);
            c[i + j] ^= static_cast<std::uint64_t>(_mm_cvtsi128_si64(r));
            c[i + j + 1] ^= static_cast<std::uint64_t>(_mm_cvtsi128_si64(_mm_srli_si128(r, 8)));
        }
    }
}

bool cpu_has_clmul() { return __builtin_cpu_supports("pclmul"); }
#else
bool cpu_has_clmul() { return false; }
#endif

void conv_words_soft(const std::uint64_t* a, std::size_t na,
                     const std::uint64_t* b, std::size_t nb,
                     std::size_t pair_lo, std::size_t pair_hi, std::uint64_t* c) {
    std::uint64_t tlo[16], thi[16];
    for (std::size_t i = 0; i < na; ++i) {
        const std::uint64_t ai = a[i];
        if (ai == 0) continue;
        tlo[0] = 0; thi[0] = 0;
        for (int v = 1; v < 16; ++v) {
            std::uint64_t lo = 0, hi = 0;
            for (int bit = 0; bit < 4; ++bit) {
                if ((v >> bit) & 1) {
                    lo ^= ai << bit;
                    if (bit) hi ^= ai >> (64 - bit);
                }
            }
            tlo[v] = lo;
            thi[v] = hi;
        }
        const std::size_t j_begin = pair_lo > i ? pair_lo - i : 0;
        const std::size_t j_end = pair_hi >= i ? std::min(nb, pair_hi - i + 1) : 0;
        for (std::size_t j = j_begin; j < j_end; ++j) {
            std::uint64_t w = b[j];
            if (w == 0) continue;
            std::uint64_t rlo = 0, rhi = 0;
            int shift = 0;
            while (w) {
                const unsigned nib = static_cast<unsigned>(w & 0xF);
                if (nib) {
                    rlo ^= tlo[nib] << shift;
                    if (shift) rhi ^= tlo[nib] >> (64 - shift);
                    rhi ^= thi[nib] << shift;
                }
                w >>= 4;
                shift += 4;
            }
            c[i + j] ^= rlo;
            c[i + j + 1] ^= rhi;
        }
    }
}

} // namespace

HashSpec HashSpec::from_rng(std::size_t n, std::size_t m, Rng& rng) {
    HashSpec spec;
    spec.n = n;
    spec.m = m;
    spec.seed = rng.random_bits(n + m >= 1 ? n + m - 1 : 0);
    spec.validate();
    return spec;
}

void HashSpec::validate() const {
    if (m > n) throw std::invalid_argument("HashSpec: output longer than input");
    const std::size_t want = n + m >= 1 ? n + m - 1 : 0;
    if (seed.size() != want)
        throw std::invalid_argument("HashSpec: seed must hold n + m - 1 bits");
}

BitVec gf2_conv_slice(const BitVec& a, const BitVec& b, std::size_t offset,
                      std::size_t out_bits) {
    if (out_bits == 0) return BitVec{};
    const std::size_t conv_bits = a.size() + b.size();
    if (a.size() == 0 || b.size() == 0 || offset + out_bits > conv_bits)
        return BitVec(out_bits); // zero product or fully out of range

    const std::size_t w_lo = offset / 64;
    const std::size_t out_words = (out_bits + 63) / 64;
    // products with i + j in this range can land bits in the output window
    const std::size_t pair_lo = w_lo > 0 ? w_lo - 1 : 0;
    const std::size_t pair_hi = w_lo + out_words;
    std::vector<std::uint64_t> c(a.words().size() + b.words().size() + 1, 0);

    static const bool use_clmul = cpu_has_clmul();
#if QKD_HAVE_CLMUL_TARGET
    if (use_clmul) {
        conv_words_clmul(a.words().data(), a.words().size(),
                         b.words().data(), b.words().size(), pair_lo, pair_hi, c.data());
    } else
#endif
    {
        (void)use_clmul;
        conv_words_soft(a.words().data(), a.words().size(),
                        b.words().data(), b.words().size(), pair_lo, pair_hi, c.data());
    }

    BitVec out(out_bits);
    auto words = out.words();
    const unsigned shift = offset & 63;
    for (std::size_t w = 0; w < words.size(); ++w) {
        const std::size_t src = w_lo + w;
        std::uint64_t v = c[src] >> shift;
        if (shift && src + 1 < c.size()) v |= c[src + 1] << (64 - shift);
        words[w] = v;
    }
    if (out_bits & 63) words[words.size() - 1] &= (std::uint64_t{1} << (out_bits & 63)) - 1;
    return out;
}

BitVec pa_hash(const BitVec& key, const HashSpec& spec) {
    spec.validate();
    if (key.size() != spec.n)
        throw std::invalid_argument("pa_hash: key length differs from spec.n");
    if (spec.m == 0) return BitVec{};
    return gf2_conv_slice(key, spec.seed, spec.n - 1, spec.m);
}

BitVec verification_tag(const BitVec& key, std::uint64_t tag_seed, std::size_t tag_len) {
    if (tag_len < 1) throw std::invalid_argument("verification_tag: tag_len must be >= 1");
    if (key.size() == 0) return BitVec(tag_len);
    Rng rng(tag_seed);
    const BitVec seed = rng.random_bits(key.size() + tag_len - 1);
    return gf2_conv_slice(key, seed, key.size() - 1, tag_len);
}

BitVec amplify(const BitVec& corrected_x, const BitVec& corrected_z,
               std::size_t m, const BitVec& seed_bits) {
    BitVec input = corrected_x;
    input.append(corrected_z);
    if (m == 0) return BitVec{};
    HashSpec spec;
    spec.n = input.size();
    spec.m = m;
    spec.seed = seed_bits;
    spec.validate();
    return pa_hash(input, spec);
}

} // namespace qkd::privacy
