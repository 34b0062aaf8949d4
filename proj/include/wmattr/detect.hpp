#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "wmattr/codebook.hpp"
#include "wmattr/rational.hpp"
#include "wmattr/watermark.hpp"

namespace wmattr {

/// Detection threshold tau in (0.5, 1] bound to a watermark length n.
/// Content is detected when some watermark shares at least k_min bits with the
/// decoded one, k_min = ceil(tau * n) computed exactly.
class DetectionThreshold {
public:
    DetectionThreshold(Rational tau, std::size_t n);

    const Rational& tau() const { return tau_; }
    std::size_t n() const { return n_; }
    std::size_t k_min() const { return k_min_; }

private:
    Rational tau_;
    std::size_t n_;
    std::size_t k_min_;
};

struct AttributionResult {
    bool detected = false;
    /// Registration index of the attributed user; lowest index on ties.
    std::optional<std::size_t> user_index;
    std::optional<std::string> attributed_user;
    /// Another user shares the best bitwise accuracy.
    bool tied = false;
    BitwiseAccuracy best_ba;
    /// Best accuracy among users other than the top one (0 for a single-user book).
    BitwiseAccuracy runner_up_ba;
};

/// True iff max_i matched(decoded, w_i) >= k_min.
bool detect(const Watermark& decoded, const Codebook& book, const DetectionThreshold& thr);

/// Detection followed by nearest-watermark attribution.
AttributionResult attribute(const Watermark& decoded, const Codebook& book, const DetectionThreshold& thr);

/// Detection/attribution outcome branches, numbered as in the usual
/// taxonomy: non-AI content is either correctly rejected (1) or falsely
/// detected (2); AI content from user i is missed (3), attributed to i (4), or
/// detected but attributed elsewhere or tied (5).
enum class Outcome {
    CorrectRejection = 1,
    FalseDetection = 2,
    MissedDetection = 3,
    CorrectAttribution = 4,
    WrongAttribution = 5,
};

std::string_view to_string(Outcome outcome);

/// Ground truth of a piece of content: empty for non-AI content, else the
/// registration index of the generating user.
struct GroundTruth {
    std::optional<std::size_t> user_index;

    static GroundTruth non_ai() { return {}; }
    static GroundTruth ai(std::size_t i) { return {i}; }
};

Outcome classify_outcome(const GroundTruth& truth, const AttributionResult& result);

} // namespace wmattr
