#include "wmattr/rational.hpp"

#include <charconv>
#include <numeric>
#include <stdexcept>

namespace wmattr {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) {
        throw std::overflow_error("rational arithmetic overflow");
    }
    return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t out = 0;
    if (__builtin_add_overflow(a, b, &out)) {
        throw std::overflow_error("rational arithmetic overflow");
    }
    return out;
}

std::int64_t parse_int(std::string_view digits, std::string_view whole) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
        throw std::invalid_argument("not a rational number: '" + std::string(whole) + "'");
    }
    return v;
}

} // namespace

Rational::Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) {
        throw std::invalid_argument("rational with zero denominator");
    }
    if (den_ < 0) {
        num_ = -num_;
        den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_, den_);
    if (g > 1) {
        num_ /= g;
        den_ /= g;
    }
}

Rational Rational::parse(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
    if (text.empty()) {
        throw std::invalid_argument("empty rational");
    }
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        return {parse_int(text.substr(0, slash), text), parse_int(text.substr(slash + 1), text)};
    }
    bool negative = false;
    std::string_view body = text;
    if (body.front() == '-' || body.front() == '+') {
        negative = body.front() == '-';
        body.remove_prefix(1);
    }
    const auto dot = body.find('.');
    std::string_view int_part = body.substr(0, dot);
    std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : body.substr(dot + 1);
    if (int_part.empty() && frac_part.empty()) {
        throw std::invalid_argument("not a rational number: '" + std::string(text) + "'");
    }
    if (frac_part.size() > 15) {
        throw std::invalid_argument("too many decimal places: '" + std::string(text) + "'");
    }
    std::int64_t num = int_part.empty() ? 0 : parse_int(int_part, text);
    std::int64_t den = 1;
    for (char c : frac_part) {
        if (c < '0' || c > '9') {
            throw std::invalid_argument("not a rational number: '" + std::string(text) + "'");
        }
        num = checked_add(checked_mul(num, 10), c - '0');
        den = checked_mul(den, 10);
    }
    return {negative ? -num : num, den};
}

std::int64_t Rational::floor() const {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
}

std::int64_t Rational::ceil() const {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ > 0) ++q;
    return q;
}

std::string Rational::to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
    const std::int64_t g = std::gcd(a.den_, b.den_);
    const std::int64_t l = checked_mul(a.den_ / g, b.den_);
    return {checked_add(checked_mul(a.num_, l / a.den_), checked_mul(b.num_, l / b.den_)), l};
}

Rational operator-(const Rational& a, const Rational& b) {
    return a + Rational(-b.num_, b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
    return {checked_mul(a.num_, b.num_), checked_mul(a.den_, b.den_)};
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    return checked_mul(a.num_, b.den_) <=> checked_mul(b.num_, a.den_);
}

} // namespace wmattr
