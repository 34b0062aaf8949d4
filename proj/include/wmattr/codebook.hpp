#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "wmattr/watermark.hpp"

namespace wmattr {

class CodebookError : public std::invalid_argument {
public:
    enum class Kind { DuplicateUserId, DuplicateWatermark, InvalidUserId };

    CodebookError(Kind kind, const std::string& what) : std::invalid_argument(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Registered users and their watermarks, in registration order. Watermarks
/// are stored contiguously so that nearest-neighbour scans stay in cache.
class Codebook {
public:
    explicit Codebook(std::size_t n);

    std::size_t n() const { return n_; }
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    std::size_t words_per_mark() const { return stride_; }

    const std::string& user_id(std::size_t i) const { return ids_.at(i); }
    Watermark watermark(std::size_t i) const { return {n_, words(i)}; }
    std::span<const Word> words(std::size_t i) const {
        return std::span<const Word>(words_).subspan(i * stride_, stride_);
    }

    std::optional<std::size_t> find_user(std::string_view user_id) const;
    bool contains(const Watermark& w) const { return marks_.contains(w); }

    /// Appends a user. Throws LengthMismatch or CodebookError.
    void append(std::string user_id, const Watermark& w);

    /// Matched bits between watermark i and candidate.
    std::size_t matched_with(std::size_t i, std::span<const Word> candidate) const {
        return matched_bits(words(i), candidate, n_);
    }

    friend bool operator==(const Codebook& a, const Codebook& b) {
        return a.n_ == b.n_ && a.ids_ == b.ids_ && a.words_ == b.words_;
    }

private:
    std::size_t n_;
    std::size_t stride_;
    std::vector<std::string> ids_;
    std::vector<Word> words_;
    std::unordered_map<std::string, std::size_t> index_;
    std::unordered_set<Watermark, WatermarkHash> marks_;
};

/// Index and matched count of the most similar registered watermark; ties go
/// to the lowest index.
struct Nearest {
    std::size_t index = 0;
    std::size_t matched = 0;
};

Nearest most_similar(const Codebook& book, std::span<const Word> candidate);

/// Minimum BA between watermark i and every other watermark. Requires size() >= 2.
BitwiseAccuracy alpha_min(const Codebook& book, std::size_t i);
/// Maximum BA between watermark i and every other watermark. Requires size() >= 2.
BitwiseAccuracy alpha_max(const Codebook& book, std::size_t i);
/// Maximum BA over all unordered pairs. Requires size() >= 2.
BitwiseAccuracy max_pairwise_ba(const Codebook& book);

struct AlphaRange {
    BitwiseAccuracy min;
    BitwiseAccuracy max;
};

/// alpha_min/alpha_max for every user in one O(s^2) pass.
std::vector<AlphaRange> alpha_ranges(const Codebook& book);

// Codebook file: a "wmdb v1 n=<n> count=<s>" header, then "<user_id>\t<hex>"
// per line with hex MSB-first over ceil(n/8) bytes.

class CodebookParseError : public std::runtime_error {
public:
    enum class Kind {
        MalformedHeader,
        MalformedRecord,
        LengthMismatch,
        CountMismatch,
        DuplicateUserId,
        DuplicateWatermark,
    };

    CodebookParseError(Kind kind, std::size_t line, const std::string& what)
        : std::runtime_error("codebook line " + std::to_string(line) + ": " + what), kind_(kind), line_(line) {}

    Kind kind() const { return kind_; }
    std::size_t line() const { return line_; }

private:
    Kind kind_;
    std::size_t line_;
};

void save_codebook(const Codebook& book, std::ostream& sink);
Codebook load_codebook(std::istream& source);

void save_codebook_file(const Codebook& book, const std::string& path);
Codebook load_codebook_file(const std::string& path);

} // namespace wmattr
