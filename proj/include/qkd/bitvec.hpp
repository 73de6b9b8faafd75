#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkd {

/// Packed bit string. Bit i lives in word i/64 at position i%64 (LSB first).
/// Unused high bits of the last word are kept zero.
class BitVec {
public:
    BitVec() = default;
    explicit BitVec(std::size_t nbits) : words_((nbits + 63) / 64, 0), size_(nbits) {}

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    bool get(std::size_t i) const {
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }
    void set(std::size_t i, bool v) {
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (v) words_[i >> 6] |= mask;
        else   words_[i >> 6] &= ~mask;
    }
    void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    void push_back(bool v) {
        if ((size_ & 63) == 0) words_.push_back(0);
        if (v) words_.back() |= std::uint64_t{1} << (size_ & 63);
        ++size_;
    }

    void append(const BitVec& other) {
        for (std::size_t i = 0; i < other.size_; ++i) push_back(other.get(i));
    }

    /// XOR of bits in [lo, hi).
    bool parity_range(std::size_t lo, std::size_t hi) const {
        std::uint64_t acc = 0;
        std::size_t wl = lo >> 6, wh = (hi - 1) >> 6;
        if (lo >= hi) return false;
        if (wl == wh) {
            std::uint64_t w = words_[wl] >> (lo & 63);
            acc = w & ((hi - lo < 64) ? ((std::uint64_t{1} << (hi - lo)) - 1) : ~std::uint64_t{0});
        } else {
            acc = words_[wl] >> (lo & 63);
            for (std::size_t w = wl + 1; w < wh; ++w) acc ^= words_[w];
            std::size_t rem = hi & 63;
            acc ^= rem ? (words_[wh] & ((std::uint64_t{1} << rem) - 1)) : words_[wh];
        }
        return std::popcount(acc) & 1;
    }

    bool parity_all() const { return parity_range(0, size_); }

    /// XOR of this[i] for every i where mask[i] is set. Sizes must match.
    bool parity_masked(const BitVec& mask) const {
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < words_.size(); ++w) acc ^= words_[w] & mask.words_[w];
        return std::popcount(acc) & 1;
    }

    std::size_t count_ones() const {
        std::size_t n = 0;
        for (auto w : words_) n += std::popcount(w);
        return n;
    }

    std::size_t hamming_distance(const BitVec& other) const {
        if (size_ != other.size_) throw std::invalid_argument("hamming_distance: size mismatch");
        std::size_t n = 0;
        for (std::size_t w = 0; w < words_.size(); ++w)
            n += std::popcount(words_[w] ^ other.words_[w]);
        return n;
    }

    BitVec slice(std::size_t lo, std::size_t hi) const {
        BitVec out(hi - lo);
        for (std::size_t i = lo; i < hi; ++i) out.set(i - lo, get(i));
        return out;
    }

    /// Packed bytes, most-significant-bit-first within each byte.
    std::vector<std::uint8_t> to_bytes_msb() const {
        std::vector<std::uint8_t> out((size_ + 7) / 8, 0);
        for (std::size_t i = 0; i < size_; ++i)
            if (get(i)) out[i / 8] |= std::uint8_t(0x80u >> (i % 8));
        return out;
    }

    static BitVec from_bytes_msb(std::span<const std::uint8_t> bytes, std::size_t nbits) {
        BitVec out(nbits);
        for (std::size_t i = 0; i < nbits; ++i)
            if (bytes[i / 8] & (0x80u >> (i % 8))) out.set(i, true);
        return out;
    }

    std::string to_string() const {
        std::string s(size_, '0');
        for (std::size_t i = 0; i < size_; ++i) if (get(i)) s[i] = '1';
        return s;
    }

    static BitVec from_string(const std::string& s) {
        BitVec out(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '1') out.set(i, true);
            else if (s[i] != '0') throw std::invalid_argument("BitVec::from_string: bad char");
        }
        return out;
    }

    bool operator==(const BitVec& other) const {
        return size_ == other.size_ && words_ == other.words_;
    }

    std::span<const std::uint64_t> words() const { return words_; }
    std::span<std::uint64_t> words() { return words_; }

private:
    std::vector<std::uint64_t> words_;
    std::size_t size_ = 0;
};

} // namespace qkd
