#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wmattr/rng.hpp"
#include "wmattr/watermark.hpp"

namespace wmattr {

// Abstract stand-in for a watermark encoder/decoder pair. Watermarked content
// from user i decodes to a string whose bits independently match w_i with
// probability beta_i. Unwatermarked content decodes to independent bits, each
// 1 with probability within gamma of one half.

enum class GammaMode {
    /// Every bit is 1 with probability exactly 0.5 + gamma.
    WorstCase,
    /// Bit k is 1 with probability p_k ~ U[0.5 - gamma, 0.5 + gamma], drawn once.
    PerBitUniform,
};

std::string_view to_string(GammaMode mode);
GammaMode parse_gamma_mode(std::string_view name);

struct ChannelParams {
    /// beta_i per user, in registration order. Each in (0, 1].
    std::vector<double> beta;
    double gamma = 0.0;
    GammaMode gamma_mode = GammaMode::WorstCase;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct DecodeSample {
    /// Generating user, empty for non-AI content.
    std::string user_id;
    Watermark decoded;
};

/// Flips each bit of w independently with probability 1 - beta.
Watermark simulate_watermarked_decode(const Watermark& w, double beta, Rng& rng);

/// Probability that each decoded bit of unwatermarked content is 1.
struct BitProbabilities {
    std::vector<double> p_one;
};

BitProbabilities make_bit_probabilities(std::size_t n, double gamma, GammaMode mode, Rng& rng);

Watermark simulate_unwatermarked_decode(const BitProbabilities& probs, Rng& rng);

/// Convenience: draws fresh per-bit probabilities, then one sample.
Watermark simulate_unwatermarked_decode(std::size_t n, double gamma, GammaMode mode, Rng& rng);

/// Mean bitwise accuracy between the decoded samples and w.
double estimate_beta(std::span<const DecodeSample> samples, const Watermark& w);

/// |f - 0.5| where f is the fraction of 1 bits over all samples and positions.
double estimate_gamma(std::span<const DecodeSample> samples);

/// Post-processing modeled only as a loss of decoding accuracy.
struct PostprocessProfile {
    enum class Kind { Identity, Absolute, Multiplicative };

    std::string name = "identity";
    Kind kind = Kind::Identity;
    /// Absolute: subtracted from beta. Multiplicative: factor applied to beta.
    double amount = 0.0;

    void validate() const;
};

/// beta after post-processing, clamped to (0, 1] and never above beta.
double degrade_beta(double beta, const PostprocessProfile& profile);

/// Named profiles, read from and written to the config file as
/// [postprocess:<name>] sections with "mode" and "amount" keys.
class ProfileTable {
public:
    ProfileTable();

    void add(PostprocessProfile profile);
    /// Throws ConfigError for unknown names.
    const PostprocessProfile& get(std::string_view name) const;
    const std::map<std::string, PostprocessProfile, std::less<>>& profiles() const { return profiles_; }

    static ProfileTable read_ini(std::istream& in);
    void write_ini(std::ostream& out) const;

    friend bool operator==(const ProfileTable& a, const ProfileTable& b);

private:
    std::map<std::string, PostprocessProfile, std::less<>> profiles_;
};

} // namespace wmattr
