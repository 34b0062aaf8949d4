#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmattr/channel.hpp"
#include "wmattr/codebook.hpp"
#include "wmattr/rational.hpp"
#include "wmattr/selection.hpp"

namespace wmattr {

/// Per-user beta: constant when lo == hi, otherwise drawn uniformly from
/// [lo, hi] once per user.
struct BetaSpec {
    double lo = 1.0;
    double hi = 1.0;
};

/// Whether the per-user bounds use the configured channel parameters or the
/// beta/gamma estimated from the simulated samples.
enum class BoundSource { Configured, Estimated };

struct ExperimentConfig {
    std::size_t n = 64;
    Rational tau{9, 10};
    std::size_t s = 1000;
    std::size_t samples_per_user = 100;
    std::size_t fdr_samples = 1000;
    SelectionStrategy strategy;
    BetaSpec beta;
    double gamma = 0.0;
    GammaMode gamma_mode = GammaMode::WorstCase;
    std::optional<PostprocessProfile> postprocess;
    BoundSource bound_source = BoundSource::Configured;
    std::uint64_t seed = 0;
    /// Load this codebook instead of generating one.
    std::string codebook_path;

    void validate() const;
};

struct UserMetrics {
    std::string user_id;
    /// beta_i after post-processing.
    double beta = 1.0;
    double beta_hat = 0.0;
    std::size_t samples = 0;
    std::size_t missed = 0;
    std::size_t correct = 0;
    std::size_t wrong = 0;
    double tdr = 0.0;
    double tar = 0.0;
    /// Absent for a single-user codebook.
    std::optional<BitwiseAccuracy> alpha_min;
    std::optional<BitwiseAccuracy> alpha_max;
    /// Absent when tau >= beta_i, outside the bound's hypothesis.
    std::optional<double> tdr_bound;
    double tar_bound = 0.0;
    bool coincide = false;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<UserMetrics> per_user;
    std::optional<BitwiseAccuracy> max_pairwise;
    std::size_t false_detections = 0;
    double fdr = 0.0;
    double avg_tdr = 0.0;
    double avg_tar = 0.0;
    double worst1_tdr = 0.0;
    double worst1_tar = 0.0;
    /// Counts of outcome branches 1..5 (index 0 is branch 1).
    std::array<std::size_t, 5> branch_counts{};
    double gamma_hat = 0.0;
    /// FDR bound for independently chosen watermarks.
    double fdr_bound = 0.0;
    /// General FDR bound using user 1's alpha_max; usually clamped to 1.
    double fdr_bound_general = 0.0;
    bool fdr_bound_general_clamped = false;
};

/// Number of users in the worst-1% aggregate: max(1, floor(s / 100)).
std::size_t worst_fraction_count(std::size_t s);

/// Mean of the `count` smallest values.
double mean_of_lowest(std::span<const double> values, std::size_t count);

/// Generates (or loads) the codebook, then simulates detection and
/// attribution. Deterministic given config.seed.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Same, against a given codebook. cfg.n and cfg.s are taken from the book.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const Codebook& book);

enum class SweepAxis { S, N, Tau, Strategy, Postprocess };

SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

/// One report per value; every run shares cfg.seed so runs differ only along
/// the axis. Postprocess values name profiles in `profiles`.
std::vector<ExperimentReport> sweep(const ExperimentConfig& cfg, SweepAxis axis, std::span<const std::string> values,
                                    const ProfileTable& profiles = {});

/// Two-sided Wilson score interval for successes out of trials.
struct WilsonInterval {
    double lower = 0.0;
    double upper = 1.0;

    double width() const { return upper - lower; }
};

inline constexpr double kZ99 = 2.5758293035489004;

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z = kZ99);

struct BoundCheck {
    std::string subject;
    std::string metric;
    double empirical = 0.0;
    double bound = 0.0;
    /// Width of the 99% Wilson interval of the empirical rate.
    double tolerance = 0.0;
    /// empirical - bound for lower bounds, bound - empirical for upper bounds.
    double margin = 0.0;
    bool violated = false;
};

struct BoundComparison {
    std::vector<BoundCheck> rows;
    std::size_t violations = 0;
};

/// Checks every per-user TDR/TAR lower bound and the FDR upper bound against
/// the empirical rates; a row is violated when it misses its bound by more
/// than the Wilson interval width.
BoundComparison compare_bounds(const ExperimentReport& report);

// CSV emission. Fields are quoted when they contain a comma, quote, or newline.

/// user_id,beta_hat,tdr,tar,tdr_bound,tar_bound,alpha_min,alpha_max
void write_per_user_csv(const ExperimentReport& report, std::ostream& out);
/// metric,value
void write_summary_csv(const ExperimentReport& report, const BoundComparison& comparison, std::ostream& out);
/// subject,metric,empirical,bound,tolerance,margin,violated
void write_comparison_csv(const BoundComparison& comparison, std::ostream& out);
/// One summary row per sweep point.
void write_sweep_csv(SweepAxis axis, std::span<const std::string> values, std::span<const ExperimentReport> reports,
                     std::ostream& out);

std::string csv_field(std::string_view text);

} // namespace wmattr
