#include "wmattr/reference.hpp"

#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

namespace wmattr::reference {

namespace mp = boost::multiprecision;

namespace {

// With p = a/b every pmf term shares the denominator b^n, so the tail is
// sum_j C(n,j) a^j (b-a)^(n-j) / b^n over integers.
double tail_sum(std::int64_t n, const Rational& p, std::int64_t lo, std::int64_t hi) {
    if (n < 0) throw std::invalid_argument("n must be non-negative");
    if (p < Rational(0) || p > Rational(1)) throw std::invalid_argument("p must lie in [0, 1]");
    lo = std::max<std::int64_t>(lo, 0);
    hi = std::min(hi, n);
    if (lo > hi) return 0.0;
    const mp::cpp_int a = p.num();
    const mp::cpp_int b = p.den();
    const mp::cpp_int q = b - a;
    mp::cpp_int total = 0;
    mp::cpp_int binom = 1;
    for (std::int64_t j = 0; j <= hi; ++j) {
        if (j >= lo) total += binom * mp::pow(a, static_cast<unsigned>(j)) * mp::pow(q, static_cast<unsigned>(n - j));
        binom = binom * (n - j) / (j + 1);
    }
    const mp::cpp_rational exact(total, mp::pow(b, static_cast<unsigned>(n)));
    return exact.convert_to<double>();
}

} // namespace

std::vector<double> tail_ge_all(std::int64_t n, const Rational& p) {
    if (n < 0) throw std::invalid_argument("n must be non-negative");
    if (p < Rational(0) || p > Rational(1)) throw std::invalid_argument("p must lie in [0, 1]");
    const mp::cpp_int a = p.num();
    const mp::cpp_int b = p.den();
    const mp::cpp_int q = b - a;
    std::vector<mp::cpp_int> terms(static_cast<std::size_t>(n) + 1);
    mp::cpp_int binom = 1;
    for (std::int64_t j = 0; j <= n; ++j) {
        terms[static_cast<std::size_t>(j)] =
            binom * mp::pow(a, static_cast<unsigned>(j)) * mp::pow(q, static_cast<unsigned>(n - j));
        binom = binom * (n - j) / (j + 1);
    }
    const mp::cpp_int denom = mp::pow(b, static_cast<unsigned>(n));
    std::vector<double> out(static_cast<std::size_t>(n) + 2, 0.0);
    mp::cpp_int suffix = 0;
    for (std::int64_t k = n; k >= 0; --k) {
        suffix += terms[static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(k)] = mp::cpp_rational(suffix, denom).convert_to<double>();
    }
    return out;
}

double tail_ge(std::int64_t n, const Rational& p, std::int64_t k) { return tail_sum(n, p, k, n); }

double tail_le(std::int64_t n, const Rational& p, std::int64_t k) { return tail_sum(n, p, 0, k); }

std::size_t agreements(const Watermark& a, const Watermark& b) {
    if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
    std::size_t same = 0;
    for (std::size_t k = 0; k < a.size(); ++k) same += a.test(k) == b.test(k) ? 1 : 0;
    return same;
}

AttributionResult attribute(const Watermark& decoded, const Codebook& book, const Rational& tau) {
    std::vector<std::size_t> scores;
    for (std::size_t i = 0; i < book.size(); ++i) scores.push_back(agreements(decoded, book.watermark(i)));
    std::size_t best_i = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best_i]) best_i = i;
    }
    std::size_t ties = 0;
    std::size_t runner_up = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (i == best_i) continue;
        if (scores[i] == scores[best_i]) ++ties;
        runner_up = std::max(runner_up, scores[i]);
    }
    AttributionResult r;
    const std::size_t n = book.n();
    r.best_ba = {scores[best_i], n};
    r.runner_up_ba = {runner_up, n};
    r.tied = ties > 0;
    // best / n >= tau, compared exactly.
    r.detected = Rational(static_cast<std::int64_t>(scores[best_i]), static_cast<std::int64_t>(n)) >= tau;
    if (r.detected) {
        r.user_index = best_i;
        r.attributed_user = book.user_id(best_i);
    }
    return r;
}

std::size_t max_matched(const Codebook& book, const Watermark& candidate) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < book.size(); ++i) best = std::max(best, agreements(candidate, book.watermark(i)));
    return best;
}

std::size_t max_pairwise_matched(const Codebook& book) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < book.size(); ++i) {
        const Watermark wi = book.watermark(i);
        for (std::size_t j = i + 1; j < book.size(); ++j) best = std::max(best, agreements(wi, book.watermark(j)));
    }
    return best;
}

} // namespace wmattr::reference
