#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace wmattr {

/// Exact non-negative-denominator fraction. Used for thresholds and accuracy
/// statistics so that comparisons such as BA >= tau never go through floating
/// point.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1);

    /// Accepts decimal ("0.9") or fraction ("9/10") notation.
    static Rational parse(std::string_view text);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    std::int64_t floor() const;
    std::int64_t ceil() const;

    std::string to_string() const;

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, std::int64_t k) { return a * Rational(k); }
    friend Rational operator*(std::int64_t k, const Rational& a) { return a * Rational(k); }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

} // namespace wmattr
