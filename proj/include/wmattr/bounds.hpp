#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "wmattr/rational.hpp"

namespace wmattr {

inline constexpr std::int64_t kMaxTailTrials = 4096;

/// Pr(X >= k) for X ~ Binomial(n, p). k <= 0 gives 1, k > n gives 0.
/// Terms are summed in log space with compensated accumulation.
double binom_tail_ge(std::int64_t n, double p, std::int64_t k);

/// Pr(X <= k) for X ~ Binomial(n, p). k < 0 gives 0, k >= n gives 1.
double binom_tail_le(std::int64_t n, double p, std::int64_t k);

/// Parameters of the detection/attribution bounds. tau, alpha_min and
/// alpha_max are exact so that thresholds like ceil(tau * n) are integer-exact.
struct BoundInputs {
    std::int64_t n = 64;
    Rational tau{9, 10};
    double beta = 1.0;
    double gamma = 0.0;
    std::uint64_t s = 1;
    Rational alpha_min{0};
    Rational alpha_max{0};
};

struct BoundTerm {
    std::string name;
    double value = 0.0;
};

struct BoundResult {
    double value = 0.0;
    /// Set when the raw expression fell outside [0, 1] and was clamped.
    bool clamped = false;
    std::vector<BoundTerm> terms;
};

/// Smallest k with k / n >= tau.
std::int64_t detection_min_matches(std::int64_t n, const Rational& tau);

/// Pr(n_i >= tau*n) + Pr(n_i <= n - tau*n - alpha_min*n), n_i ~ B(n, beta).
/// Requires 0.5 < tau < beta (DomainError otherwise).
BoundResult tdr_lower_bound(const BoundInputs& in);

/// Pr(n_1 >= tau*n) + Pr(n_1 <= n - tau*n + alpha_max*n), n_1 ~ B(n, 1/2).
/// With s = 1 only the first term applies. Typically loose; the raw sum often
/// exceeds 1 and is clamped.
BoundResult fdr_upper_bound_general(const BoundInputs& in);

/// 1 - Pr(n' < tau*n)^s with n' ~ B(n, 1/2 + gamma), for independently chosen
/// watermarks. Evaluated as -expm1(s * log1p(-p)).
BoundResult fdr_upper_bound_independent(const BoundInputs& in);

/// Minimum matched bits a decoded watermark needs with w_i to be both
/// detected and strictly closer to w_i than to any other watermark:
/// max(floor((1 + alpha_max) / 2 * n) + 1, ceil(tau * n)).
std::int64_t tar_threshold(std::int64_t n, const Rational& tau, const Rational& alpha_max);

/// Pr(n_i >= tar_threshold), n_i ~ B(n, beta).
BoundResult tar_lower_bound(const BoundInputs& in);

struct AttributionGap {
    BoundResult tdr;
    BoundResult tar;
    /// ceil(tau*n) >= floor((1 + alpha_max)/2 * n) + 1: detection then implies
    /// correct attribution and the TAR bound equals the TDR bound's first term.
    bool coincide = false;
};

AttributionGap detection_implies_attribution_gap(const BoundInputs& in);

/// True when ceil(tau*n) >= floor((1 + alpha_max)/2 * n) + 1.
bool detection_implies_attribution(std::int64_t n, const Rational& tau, const Rational& alpha_max);

} // namespace wmattr
