#pragma once

#include <string>
#include <vector>

#include "wmattr/codebook.hpp"
#include "wmattr/rng.hpp"
#include "wmattr/selection.hpp"

namespace testing {

/// Codebook from bitstrings written bit 0 first; users are u1, u2, ...
inline wmattr::Codebook book_of(const std::vector<std::string>& bits) {
    wmattr::Codebook book(bits.front().size());
    for (const auto& b : bits) book.append("u" + std::to_string(book.size() + 1), wmattr::Watermark::from_bits(b));
    return book;
}

/// s distinct uniformly random watermarks.
inline wmattr::Codebook random_book(std::size_t n, std::size_t s, wmattr::Rng& rng) {
    wmattr::Codebook book(n);
    while (book.size() < s) {
        wmattr::Watermark w = wmattr::random_select(n, rng);
        if (!book.contains(w)) book.append("u" + std::to_string(book.size() + 1), w);
    }
    return book;
}

} // namespace testing
