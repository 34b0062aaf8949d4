#include "wmattr/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "wmattr/errors.hpp"

namespace wmattr {

std::string_view to_string(GammaMode mode) {
    return mode == GammaMode::WorstCase ? "worst_case" : "per_bit_uniform";
}

GammaMode parse_gamma_mode(std::string_view name) {
    if (name == "worst_case" || name == "worstcase") return GammaMode::WorstCase;
    if (name == "per_bit_uniform" || name == "perbituniform") return GammaMode::PerBitUniform;
    throw ConfigError("unknown gamma mode '" + std::string(name) + "'");
}

namespace {

void check_beta(double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) {
        throw DomainError("beta must lie in (0, 1], got " + std::to_string(beta));
    }
}

void check_gamma(double gamma) {
    if (!(gamma >= 0.0 && gamma <= 0.5)) {
        throw DomainError("gamma must lie in [0, 0.5], got " + std::to_string(gamma));
    }
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void ChannelParams::validate() const {
    for (double b : beta) check_beta(b);
    check_gamma(gamma);
}

Watermark simulate_watermarked_decode(const Watermark& w, double beta, Rng& rng) {
    check_beta(beta);
    Watermark out = w;
    const double flip = 1.0 - beta;
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (bernoulli(rng, flip)) out.flip(k);
    }
    return out;
}

BitProbabilities make_bit_probabilities(std::size_t n, double gamma, GammaMode mode, Rng& rng) {
    check_gamma(gamma);
    BitProbabilities probs;
    probs.p_one.resize(n, 0.5 + gamma);
    if (mode == GammaMode::PerBitUniform) {
        for (double& p : probs.p_one) p = 0.5 - gamma + 2.0 * gamma * uniform01(rng);
    }
    return probs;
}

Watermark simulate_unwatermarked_decode(const BitProbabilities& probs, Rng& rng) {
    Watermark out(probs.p_one.size());
    for (std::size_t k = 0; k < probs.p_one.size(); ++k) {
        if (bernoulli(rng, probs.p_one[k])) out.set(k, true);
    }
    return out;
}

Watermark simulate_unwatermarked_decode(std::size_t n, double gamma, GammaMode mode, Rng& rng) {
    const BitProbabilities probs = make_bit_probabilities(n, gamma, mode, rng);
    return simulate_unwatermarked_decode(probs, rng);
}

double estimate_beta(std::span<const DecodeSample> samples, const Watermark& w) {
    if (samples.empty()) {
        throw std::invalid_argument("estimate_beta needs at least one sample");
    }
    std::size_t matched = 0;
    for (const auto& sample : samples) matched += matched_bits(sample.decoded, w);
    return static_cast<double>(matched) / static_cast<double>(samples.size() * w.size());
}

double estimate_gamma(std::span<const DecodeSample> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("estimate_gamma needs at least one sample");
    }
    std::size_t ones = 0;
    std::size_t bits = 0;
    for (const auto& sample : samples) {
        ones += sample.decoded.count();
        bits += sample.decoded.size();
    }
    if (bits == 0) {
        throw std::invalid_argument("estimate_gamma needs non-empty samples");
    }
    return std::fabs(static_cast<double>(ones) / static_cast<double>(bits) - 0.5);
}

void PostprocessProfile::validate() const {
    if (name.empty()) {
        throw ConfigError("post-processing profile needs a name");
    }
    if (kind == Kind::Absolute && !(amount >= 0.0 && amount <= 1.0)) {
        throw ConfigError("absolute reduction of profile '" + name + "' must lie in [0, 1]");
    }
    if (kind == Kind::Multiplicative && !(amount > 0.0 && amount <= 1.0)) {
        throw ConfigError("multiplicative factor of profile '" + name + "' must lie in (0, 1]");
    }
}

double degrade_beta(double beta, const PostprocessProfile& profile) {
    check_beta(beta);
    profile.validate();
    double out = beta;
    switch (profile.kind) {
    case PostprocessProfile::Kind::Identity: break;
    case PostprocessProfile::Kind::Absolute: out = beta - profile.amount; break;
    case PostprocessProfile::Kind::Multiplicative: out = beta * profile.amount; break;
    }
    return std::clamp(out, std::numeric_limits<double>::min(), beta);
}

ProfileTable::ProfileTable() { add({}); }

void ProfileTable::add(PostprocessProfile profile) {
    profile.validate();
    profiles_.insert_or_assign(profile.name, std::move(profile));
}

const PostprocessProfile& ProfileTable::get(std::string_view name) const {
    if (auto it = profiles_.find(name); it != profiles_.end()) return it->second;
    throw ConfigError("unknown post-processing profile '" + std::string(name) + "'");
}

ProfileTable ProfileTable::read_ini(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    constexpr std::string_view kPrefix = "postprocess:";
    ProfileTable table;
    for (const auto& [section, body] : tree) {
        if (!std::string_view(section).starts_with(kPrefix)) continue;
        PostprocessProfile profile;
        profile.name = section.substr(kPrefix.size());
        const auto mode = body.get<std::string>("mode", "identity");
        if (mode == "identity") {
            profile.kind = PostprocessProfile::Kind::Identity;
        } else if (mode == "absolute") {
            profile.kind = PostprocessProfile::Kind::Absolute;
        } else if (mode == "multiplicative") {
            profile.kind = PostprocessProfile::Kind::Multiplicative;
        } else {
            throw ConfigError("unknown post-processing mode '" + mode + "' in [" + section + "]");
        }
        if (const auto text = body.get_optional<std::string>("amount")) {
            std::size_t used = 0;
            try {
                profile.amount = std::stod(*text, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != text->size()) {
                throw ConfigError("amount in [" + section + "] is not a number");
            }
        }
        table.add(std::move(profile));
    }
    return table;
}

void ProfileTable::write_ini(std::ostream& out) const {
    for (const auto& [name, profile] : profiles_) {
        if (name == "identity" && profile.kind == PostprocessProfile::Kind::Identity) continue;
        out << "[postprocess:" << name << "]\n";
        switch (profile.kind) {
        case PostprocessProfile::Kind::Identity: out << "mode = identity\n"; break;
        case PostprocessProfile::Kind::Absolute: out << "mode = absolute\n"; break;
        case PostprocessProfile::Kind::Multiplicative: out << "mode = multiplicative\n"; break;
        }
        out << "amount = " << format_double(profile.amount) << "\n\n";
    }
}

bool operator==(const ProfileTable& a, const ProfileTable& b) {
    if (a.profiles_.size() != b.profiles_.size()) return false;
    return std::equal(a.profiles_.begin(), a.profiles_.end(), b.profiles_.begin(), [](const auto& x, const auto& y) {
        return x.first == y.first && x.second.kind == y.second.kind && x.second.amount == y.second.amount;
    });
}

} // namespace wmattr
