#pragma once

// Slow, obviously-correct reference implementations used by the `verify`
// subcommand and the test suites to cross-check the fast paths.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wmattr/codebook.hpp"
#include "wmattr/detect.hpp"
#include "wmattr/rational.hpp"

namespace wmattr::reference {

/// Pr(Binomial(n, p) >= k) summed term by term in exact rational arithmetic,
/// rounded to double at the end.
double tail_ge(std::int64_t n, const Rational& p, std::int64_t k);
double tail_le(std::int64_t n, const Rational& p, std::int64_t k);

/// Pr(Binomial(n, p) >= k) for every k in [0, n + 1], exact until the final
/// rounding. Much cheaper than n + 2 separate tail_ge calls.
std::vector<double> tail_ge_all(std::int64_t n, const Rational& p);

/// Bit-by-bit count of agreeing positions.
std::size_t agreements(const Watermark& a, const Watermark& b);

/// Scores every user with agreements() and picks the first maximum.
AttributionResult attribute(const Watermark& decoded, const Codebook& book, const Rational& tau);

/// Largest matched-bit count between candidate and any codebook entry.
std::size_t max_matched(const Codebook& book, const Watermark& candidate);

/// All pairs, bit by bit.
std::size_t max_pairwise_matched(const Codebook& book);

} // namespace wmattr::reference
