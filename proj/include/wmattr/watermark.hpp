#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wmattr/rational.hpp"

namespace wmattr {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for_bits(std::size_t n) { return (n + kWordBits - 1) / kWordBits; }

/// Fixed-length bitstring packed into 64-bit words. Bit k lives in word k/64
/// at position k%64. Bits past n are always zero.
class Watermark {
public:
    Watermark() = default;
    explicit Watermark(std::size_t n);
    Watermark(std::size_t n, std::span<const Word> words);

    /// Parses a string of '0'/'1' characters, bit 0 first.
    static Watermark from_bits(std::string_view bits);
    /// Parses MSB-first hex of exactly ceil(n/8) bytes. Padding bits must be zero.
    static Watermark from_hex(std::string_view hex, std::size_t n);

    std::string to_bits() const;
    std::string to_hex() const;

    std::size_t size() const { return n_; }
    bool test(std::size_t k) const { return (words_[k / kWordBits] >> (k % kWordBits)) & 1U; }
    bool operator[](std::size_t k) const { return test(k); }
    void set(std::size_t k, bool value);
    void flip(std::size_t k) { words_[k / kWordBits] ^= Word{1} << (k % kWordBits); }

    std::size_t count() const;
    Watermark operator~() const;

    std::span<const Word> words() const { return words_; }

    friend bool operator==(const Watermark&, const Watermark&) = default;

private:
    void mask_tail();

    std::size_t n_ = 0;
    std::vector<Word> words_;
};

/// Matched positions between two packed bitstrings of the same word count.
inline std::size_t matched_bits(std::span<const Word> a, std::span<const Word> b, std::size_t n) {
    std::size_t differing = 0;
    for (std::size_t w = 0; w < a.size(); ++w) {
        differing += static_cast<std::size_t>(std::popcount(a[w] ^ b[w]));
    }
    return n - differing;
}

/// Bitwise accuracy kept as the integer pair (matched, n). Ordering compares the
/// exact fractions.
struct BitwiseAccuracy {
    std::size_t matched = 0;
    std::size_t n = 1;

    double value() const { return static_cast<double>(matched) / static_cast<double>(n); }
    Rational as_rational() const {
        return {static_cast<std::int64_t>(matched), static_cast<std::int64_t>(n)};
    }

    friend bool operator==(const BitwiseAccuracy& a, const BitwiseAccuracy& b) {
        return a.matched * b.n == b.matched * a.n;
    }
    friend std::strong_ordering operator<=>(const BitwiseAccuracy& a, const BitwiseAccuracy& b) {
        return a.matched * b.n <=> b.matched * a.n;
    }
};

/// Number of positions where a and b agree. Throws LengthMismatch.
std::size_t matched_bits(const Watermark& a, const Watermark& b);

/// Fraction of matched bits. Throws LengthMismatch; n must be at least 1.
BitwiseAccuracy bitwise_accuracy(const Watermark& a, const Watermark& b);

/// n * (1 - BA).
std::size_t hamming_distance(const Watermark& a, const Watermark& b);

struct WatermarkHash {
    std::size_t operator()(const Watermark& w) const noexcept;
};

} // namespace wmattr
