#include "wmattr/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "wmattr/errors.hpp"

namespace wmattr {

namespace {

void check_tail_args(std::int64_t n, double p) {
    if (n < 0 || n > kMaxTailTrials) {
        throw std::invalid_argument("binomial tail supports 0 <= n <= " + std::to_string(kMaxTailTrials));
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("binomial probability must lie in [0, 1]");
    }
}

double log_pmf(std::int64_t n, std::int64_t k, double log_p, double log_q) {
    const double lchoose = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                           std::lgamma(static_cast<double>(n - k) + 1.0);
    return lchoose + static_cast<double>(k) * log_p + static_cast<double>(n - k) * log_q;
}

/// Sum of pmf(j) for j in [lo, hi], 0 < p < 1.
double pmf_range_sum(std::int64_t n, double p, std::int64_t lo, std::int64_t hi) {
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    std::vector<double> logs;
    logs.reserve(static_cast<std::size_t>(hi - lo + 1));
    double peak = -INFINITY;
    for (std::int64_t j = lo; j <= hi; ++j) {
        logs.push_back(log_pmf(n, j, log_p, log_q));
        peak = std::max(peak, logs.back());
    }
    // Neumaier summation of exp(l - peak).
    double sum = 0.0;
    double carry = 0.0;
    for (double l : logs) {
        const double term = std::exp(l - peak);
        const double t = sum + term;
        carry += std::fabs(sum) >= term ? (sum - t) + term : (term - t) + sum;
        sum = t;
    }
    return std::min(1.0, std::exp(peak) * (sum + carry));
}

double clamp_unit(double raw, bool& clamped) {
    clamped = raw < 0.0 || raw > 1.0;
    return std::clamp(raw, 0.0, 1.0);
}

void check_inputs(const BoundInputs& in) {
    if (in.n < 1 || in.n > kMaxTailTrials) {
        throw std::invalid_argument("watermark length must lie in [1, " + std::to_string(kMaxTailTrials) + "]");
    }
    if (!(in.tau > Rational(1, 2) && in.tau <= Rational(1))) {
        throw DomainError("detection threshold must satisfy 0.5 < tau <= 1");
    }
    if (!(in.beta > 0.0 && in.beta <= 1.0)) {
        throw DomainError("beta must lie in (0, 1]");
    }
    if (!(in.gamma >= 0.0 && in.gamma <= 0.5)) {
        throw DomainError("gamma must lie in [0, 0.5]");
    }
    if (in.s < 1) {
        throw DomainError("user count s must be at least 1");
    }
    for (const Rational* a : {&in.alpha_min, &in.alpha_max}) {
        if (*a < Rational(0) || *a > Rational(1)) {
            throw DomainError("alpha statistics must lie in [0, 1]");
        }
    }
}

} // namespace

double binom_tail_ge(std::int64_t n, double p, std::int64_t k) {
    check_tail_args(n, p);
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    // Sum whichever side excludes the mean; the complement of a small tail is
    // accurate near 1, where summing the large side loses the last digits.
    if (static_cast<double>(k) > static_cast<double>(n) * p) return pmf_range_sum(n, p, k, n);
    return std::clamp(1.0 - pmf_range_sum(n, p, 0, k - 1), 0.0, 1.0);
}

double binom_tail_le(std::int64_t n, double p, std::int64_t k) {
    check_tail_args(n, p);
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    if (p == 0.0) return 1.0;
    if (p == 1.0) return 0.0;
    if (static_cast<double>(k) < static_cast<double>(n) * p) return pmf_range_sum(n, p, 0, k);
    return std::clamp(1.0 - pmf_range_sum(n, p, k + 1, n), 0.0, 1.0);
}

std::int64_t detection_min_matches(std::int64_t n, const Rational& tau) { return (tau * n).ceil(); }

BoundResult tdr_lower_bound(const BoundInputs& in) {
    check_inputs(in);
    if (!(in.tau.to_double() < in.beta)) {
        throw DomainError("TDR lower bound requires 0.5 < tau < beta_i (tau = " + in.tau.to_string() +
                          ", beta_i = " + std::to_string(in.beta) + ")");
    }
    const std::int64_t k_detect = detection_min_matches(in.n, in.tau);
    const std::int64_t k_far = (Rational(in.n) * (Rational(1) - in.tau - in.alpha_min)).floor();
    const double own = binom_tail_ge(in.n, in.beta, k_detect);
    const double other = binom_tail_le(in.n, in.beta, k_far);
    BoundResult r;
    r.value = clamp_unit(own + other, r.clamped);
    r.terms = {{"pr_own_ge_tau_n", own}, {"pr_own_le_far_threshold", other}};
    return r;
}

BoundResult fdr_upper_bound_general(const BoundInputs& in) {
    check_inputs(in);
    const std::int64_t k_detect = detection_min_matches(in.n, in.tau);
    const double first = binom_tail_ge(in.n, 0.5, k_detect);
    BoundResult r;
    r.terms.push_back({"pr_first_ge_tau_n", first});
    double raw = first;
    if (in.s > 1) {
        const std::int64_t k_near = (Rational(in.n) * (Rational(1) - in.tau + in.alpha_max)).floor();
        const double second = binom_tail_le(in.n, 0.5, k_near);
        r.terms.push_back({"pr_first_le_near_threshold", second});
        raw += second;
    }
    r.value = clamp_unit(raw, r.clamped);
    return r;
}

BoundResult fdr_upper_bound_independent(const BoundInputs& in) {
    check_inputs(in);
    const double p = binom_tail_ge(in.n, 0.5 + in.gamma, detection_min_matches(in.n, in.tau));
    BoundResult r;
    r.terms = {{"pr_single_ge_tau_n", p}};
    if (p >= 1.0) {
        r.value = 1.0;
        return r;
    }
    r.value = clamp_unit(-std::expm1(static_cast<double>(in.s) * std::log1p(-p)), r.clamped);
    return r;
}

std::int64_t tar_threshold(std::int64_t n, const Rational& tau, const Rational& alpha_max) {
    const std::int64_t separation = ((Rational(1) + alpha_max) * Rational(1, 2) * Rational(n)).floor() + 1;
    return std::max(separation, detection_min_matches(n, tau));
}

BoundResult tar_lower_bound(const BoundInputs& in) {
    check_inputs(in);
    const std::int64_t k = tar_threshold(in.n, in.tau, in.alpha_max);
    BoundResult r;
    r.value = binom_tail_ge(in.n, in.beta, k);
    r.terms = {{"threshold", static_cast<double>(k)}, {"pr_own_ge_threshold", r.value}};
    return r;
}

bool detection_implies_attribution(std::int64_t n, const Rational& tau, const Rational& alpha_max) {
    const std::int64_t separation = ((Rational(1) + alpha_max) * Rational(1, 2) * Rational(n)).floor() + 1;
    return detection_min_matches(n, tau) >= separation;
}

AttributionGap detection_implies_attribution_gap(const BoundInputs& in) {
    AttributionGap gap;
    gap.tdr = tdr_lower_bound(in);
    gap.tar = tar_lower_bound(in);
    gap.coincide = detection_implies_attribution(in.n, in.tau, in.alpha_max);
    return gap;
}

} // namespace wmattr
