#include "wmattr/codebook.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "wmattr/errors.hpp"

namespace wmattr {

Codebook::Codebook(std::size_t n) : n_(n), stride_(words_for_bits(n)) {
    if (n == 0) {
        throw std::invalid_argument("codebook watermark length must be positive");
    }
}

std::optional<std::size_t> Codebook::find_user(std::string_view user_id) const {
    if (auto it = index_.find(std::string(user_id)); it != index_.end()) {
        return it->second;
    }
    return std::nullopt;
}

void Codebook::append(std::string user_id, const Watermark& w) {
    if (w.size() != n_) {
        throw LengthMismatch(n_, w.size());
    }
    if (user_id.empty() || user_id.find_first_of("\t\r\n") != std::string::npos) {
        throw CodebookError(CodebookError::Kind::InvalidUserId,
                            "user id must be non-empty and free of tabs and newlines");
    }
    if (index_.contains(user_id)) {
        throw CodebookError(CodebookError::Kind::DuplicateUserId, "duplicate user id '" + user_id + "'");
    }
    if (marks_.contains(w)) {
        throw CodebookError(CodebookError::Kind::DuplicateWatermark,
                            "watermark " + w.to_hex() + " already registered");
    }
    index_.emplace(user_id, ids_.size());
    ids_.push_back(std::move(user_id));
    words_.insert(words_.end(), w.words().begin(), w.words().end());
    marks_.insert(w);
}

Nearest most_similar(const Codebook& book, std::span<const Word> candidate) {
    Nearest best;
    for (std::size_t i = 0; i < book.size(); ++i) {
        const std::size_t m = book.matched_with(i, candidate);
        if (i == 0 || m > best.matched) {
            best = {i, m};
        }
    }
    return best;
}

namespace {

void require_pairs(const Codebook& book) {
    if (book.size() < 2) {
        throw DomainError("pairwise statistic needs at least two watermarks, codebook has " +
                          std::to_string(book.size()));
    }
}

} // namespace

BitwiseAccuracy alpha_min(const Codebook& book, std::size_t i) {
    require_pairs(book);
    std::size_t lo = book.n();
    for (std::size_t j = 0; j < book.size(); ++j) {
        if (j != i) lo = std::min(lo, book.matched_with(j, book.words(i)));
    }
    return {lo, book.n()};
}

BitwiseAccuracy alpha_max(const Codebook& book, std::size_t i) {
    require_pairs(book);
    std::size_t hi = 0;
    for (std::size_t j = 0; j < book.size(); ++j) {
        if (j != i) hi = std::max(hi, book.matched_with(j, book.words(i)));
    }
    return {hi, book.n()};
}

BitwiseAccuracy max_pairwise_ba(const Codebook& book) {
    require_pairs(book);
    std::size_t hi = 0;
    for (std::size_t i = 1; i < book.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            hi = std::max(hi, book.matched_with(j, book.words(i)));
        }
    }
    return {hi, book.n()};
}

std::vector<AlphaRange> alpha_ranges(const Codebook& book) {
    require_pairs(book);
    const std::size_t s = book.size();
    std::vector<std::size_t> lo(s, book.n());
    std::vector<std::size_t> hi(s, 0);
    for (std::size_t i = 1; i < s; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const std::size_t m = book.matched_with(j, book.words(i));
            lo[i] = std::min(lo[i], m);
            hi[i] = std::max(hi[i], m);
            lo[j] = std::min(lo[j], m);
            hi[j] = std::max(hi[j], m);
        }
    }
    std::vector<AlphaRange> out(s);
    for (std::size_t i = 0; i < s; ++i) {
        out[i] = {{lo[i], book.n()}, {hi[i], book.n()}};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

using ParseKind = CodebookParseError::Kind;

bool parse_field(std::string_view token, std::string_view key, std::size_t& out) {
    if (!token.starts_with(key)) return false;
    token.remove_prefix(key.size());
    if (token.empty()) return false;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc{} && ptr == token.data() + token.size();
}

} // namespace

void save_codebook(const Codebook& book, std::ostream& sink) {
    sink << "wmdb v1 n=" << book.n() << " count=" << book.size() << '\n';
    for (std::size_t i = 0; i < book.size(); ++i) {
        sink << book.user_id(i) << '\t' << book.watermark(i).to_hex() << '\n';
    }
}

Codebook load_codebook(std::istream& source) {
    std::string line;
    if (!std::getline(source, line)) {
        throw CodebookParseError(ParseKind::MalformedHeader, 1, "missing header");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::size_t n = 0;
    std::size_t count = 0;
    {
        std::string_view header = line;
        constexpr std::string_view kMagic = "wmdb v1 ";
        if (!header.starts_with(kMagic)) {
            throw CodebookParseError(ParseKind::MalformedHeader, 1, "expected 'wmdb v1' header");
        }
        header.remove_prefix(kMagic.size());
        const auto space = header.find(' ');
        if (space == std::string_view::npos || !parse_field(header.substr(0, space), "n=", n) ||
            !parse_field(header.substr(space + 1), "count=", count) || n == 0) {
            throw CodebookParseError(ParseKind::MalformedHeader, 1, "expected 'n=<int> count=<int>'");
        }
    }

    Codebook book(n);
    std::size_t line_no = 1;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || line.find('\t', tab + 1) != std::string::npos) {
            throw CodebookParseError(ParseKind::MalformedRecord, line_no, "expected '<user_id>\\t<hex>'");
        }
        const std::string_view hex = std::string_view(line).substr(tab + 1);
        if (hex.size() != 2 * ((n + 7) / 8)) {
            throw CodebookParseError(ParseKind::LengthMismatch, line_no,
                                     "hex watermark has " + std::to_string(hex.size()) + " digits, expected " +
                                         std::to_string(2 * ((n + 7) / 8)));
        }
        Watermark w;
        try {
            w = Watermark::from_hex(hex, n);
        } catch (const std::invalid_argument& e) {
            throw CodebookParseError(ParseKind::MalformedRecord, line_no, e.what());
        }
        try {
            book.append(line.substr(0, tab), w);
        } catch (const CodebookError& e) {
            const auto kind = e.kind() == CodebookError::Kind::DuplicateUserId      ? ParseKind::DuplicateUserId
                              : e.kind() == CodebookError::Kind::DuplicateWatermark ? ParseKind::DuplicateWatermark
                                                                                    : ParseKind::MalformedRecord;
            throw CodebookParseError(kind, line_no, e.what());
        }
    }
    if (book.size() != count) {
        throw CodebookParseError(ParseKind::CountMismatch, line_no,
                                 "header declares " + std::to_string(count) + " records, found " +
                                     std::to_string(book.size()));
    }
    return book;
}

void save_codebook_file(const Codebook& book, const std::string& path) {
    // Write a sibling file and rename it over the target so readers never see
    // a half-written codebook.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open '" + tmp + "' for writing");
        }
        save_codebook(book, out);
        out.flush();
        if (!out) {
            throw std::runtime_error("failed writing codebook to '" + tmp + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot replace '" + path + "': " + ec.message());
    }
}

Codebook load_codebook_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open codebook '" + path + "'");
    }
    return load_codebook(in);
}

} // namespace wmattr
