#include "wmattr/detect.hpp"

#include "wmattr/errors.hpp"

namespace wmattr {

DetectionThreshold::DetectionThreshold(Rational tau, std::size_t n) : tau_(tau), n_(n) {
    if (!(tau_ > Rational(1, 2) && tau_ <= Rational(1))) {
        throw DomainError("detection threshold must satisfy 0.5 < tau <= 1, got " + tau_.to_string());
    }
    if (n_ == 0) {
        throw std::invalid_argument("watermark length must be positive");
    }
    k_min_ = static_cast<std::size_t>((tau_ * static_cast<std::int64_t>(n_)).ceil());
}

namespace {

void check_inputs(const Watermark& decoded, const Codebook& book, const DetectionThreshold& thr) {
    if (book.empty()) {
        throw std::invalid_argument("detection against an empty codebook");
    }
    if (decoded.size() != book.n()) {
        throw LengthMismatch(book.n(), decoded.size());
    }
    if (thr.n() != book.n()) {
        throw LengthMismatch(book.n(), thr.n());
    }
}

} // namespace

bool detect(const Watermark& decoded, const Codebook& book, const DetectionThreshold& thr) {
    check_inputs(decoded, book, thr);
    for (std::size_t i = 0; i < book.size(); ++i) {
        if (book.matched_with(i, decoded.words()) >= thr.k_min()) return true;
    }
    return false;
}

AttributionResult attribute(const Watermark& decoded, const Codebook& book, const DetectionThreshold& thr) {
    check_inputs(decoded, book, thr);
    std::size_t best = 0;
    std::size_t best_i = 0;
    std::size_t second = 0;
    for (std::size_t i = 0; i < book.size(); ++i) {
        const std::size_t c = book.matched_with(i, decoded.words());
        if (i == 0) {
            best = c;
        } else if (c > best) {
            second = best;
            best = c;
            best_i = i;
        } else if (c > second) {
            second = c;
        }
    }

    AttributionResult r;
    r.best_ba = {best, book.n()};
    r.runner_up_ba = {second, book.n()};
    r.tied = book.size() > 1 && second == best;
    r.detected = best >= thr.k_min();
    if (r.detected) {
        r.user_index = best_i;
        r.attributed_user = book.user_id(best_i);
    }
    return r;
}

std::string_view to_string(Outcome outcome) {
    switch (outcome) {
    case Outcome::CorrectRejection: return "correct_rejection";
    case Outcome::FalseDetection: return "false_detection";
    case Outcome::MissedDetection: return "missed_detection";
    case Outcome::CorrectAttribution: return "correct_attribution";
    case Outcome::WrongAttribution: return "wrong_attribution";
    }
    return "?";
}

Outcome classify_outcome(const GroundTruth& truth, const AttributionResult& result) {
    if (!truth.user_index) {
        return result.detected ? Outcome::FalseDetection : Outcome::CorrectRejection;
    }
    if (!result.detected) return Outcome::MissedDetection;
    if (!result.tied && result.user_index == truth.user_index) return Outcome::CorrectAttribution;
    return Outcome::WrongAttribution;
}

} // namespace wmattr
