#pragma once

#include <stdexcept>
#include <string>

namespace wmattr {

/// Two watermarks (or a watermark and a codebook) disagree on length n.
class LengthMismatch : public std::invalid_argument {
public:
    /// `unit` names what is being counted, e.g. "bits" or "hex digits".
    LengthMismatch(std::size_t expected, std::size_t actual, const char* unit = "bits")
        : std::invalid_argument("watermark length mismatch: expected " + std::to_string(expected) + " " + unit +
                                ", got " + std::to_string(actual)),
          expected_(expected), actual_(actual) {}

    std::size_t expected() const { return expected_; }
    std::size_t actual() const { return actual_; }

private:
    std::size_t expected_;
    std::size_t actual_;
};

/// A statistic or bound was requested outside the domain where it is defined.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A solver or enumeration would exceed its configured work budget.
class ResourceLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace wmattr
