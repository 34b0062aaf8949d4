#include "wmattr/watermark.hpp"

#include <stdexcept>

#include "wmattr/errors.hpp"

namespace wmattr {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

Watermark::Watermark(std::size_t n) : n_(n), words_(words_for_bits(n), 0) {}

Watermark::Watermark(std::size_t n, std::span<const Word> words)
    : n_(n), words_(words.begin(), words.end()) {
    if (words_.size() != words_for_bits(n)) {
        throw std::invalid_argument("word count does not match watermark length");
    }
    mask_tail();
}

Watermark Watermark::from_bits(std::string_view bits) {
    Watermark w(bits.size());
    for (std::size_t k = 0; k < bits.size(); ++k) {
        if (bits[k] == '1') {
            w.set(k, true);
        } else if (bits[k] != '0') {
            throw std::invalid_argument("watermark bits must be '0' or '1'");
        }
    }
    return w;
}

Watermark Watermark::from_hex(std::string_view hex, std::size_t n) {
    const std::size_t bytes = (n + 7) / 8;
    if (hex.size() != 2 * bytes) {
        throw LengthMismatch(2 * bytes, hex.size(), "hex digits");
    }
    Watermark w(n);
    for (std::size_t b = 0; b < bytes; ++b) {
        const int hi = hex_value(hex[2 * b]);
        const int lo = hex_value(hex[2 * b + 1]);
        if (hi < 0 || lo < 0) {
            throw std::invalid_argument("malformed hex digit in watermark");
        }
        const unsigned byte = static_cast<unsigned>(hi * 16 + lo);
        for (std::size_t j = 0; j < 8; ++j) {
            const bool bit = (byte >> (7 - j)) & 1U;
            const std::size_t k = 8 * b + j;
            if (k >= n) {
                if (bit) throw std::invalid_argument("nonzero padding bits in hex watermark");
                continue;
            }
            w.set(k, bit);
        }
    }
    return w;
}

std::string Watermark::to_bits() const {
    std::string out(n_, '0');
    for (std::size_t k = 0; k < n_; ++k) {
        if (test(k)) out[k] = '1';
    }
    return out;
}

std::string Watermark::to_hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    const std::size_t bytes = (n_ + 7) / 8;
    std::string out;
    out.reserve(2 * bytes);
    for (std::size_t b = 0; b < bytes; ++b) {
        unsigned byte = 0;
        for (std::size_t j = 0; j < 8; ++j) {
            const std::size_t k = 8 * b + j;
            if (k < n_ && test(k)) byte |= 1U << (7 - j);
        }
        out.push_back(kDigits[byte >> 4]);
        out.push_back(kDigits[byte & 0xF]);
    }
    return out;
}

void Watermark::set(std::size_t k, bool value) {
    const Word mask = Word{1} << (k % kWordBits);
    if (value) {
        words_[k / kWordBits] |= mask;
    } else {
        words_[k / kWordBits] &= ~mask;
    }
}

std::size_t Watermark::count() const {
    std::size_t c = 0;
    for (Word w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

Watermark Watermark::operator~() const {
    Watermark out = *this;
    for (Word& w : out.words_) w = ~w;
    out.mask_tail();
    return out;
}

void Watermark::mask_tail() {
    if (const std::size_t rem = n_ % kWordBits; rem != 0 && !words_.empty()) {
        words_.back() &= (Word{1} << rem) - 1;
    }
}

std::size_t matched_bits(const Watermark& a, const Watermark& b) {
    if (a.size() != b.size()) {
        throw LengthMismatch(a.size(), b.size());
    }
    return matched_bits(a.words(), b.words(), a.size());
}

BitwiseAccuracy bitwise_accuracy(const Watermark& a, const Watermark& b) {
    if (a.size() == 0) {
        throw std::invalid_argument("bitwise accuracy of empty watermarks");
    }
    return {matched_bits(a, b), a.size()};
}

std::size_t hamming_distance(const Watermark& a, const Watermark& b) {
    return a.size() - matched_bits(a, b);
}

std::size_t WatermarkHash::operator()(const Watermark& w) const noexcept {
    std::size_t h = w.size() * 0x9E3779B97F4A7C15ULL;
    for (Word word : w.words()) {
        h ^= word + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

} // namespace wmattr
