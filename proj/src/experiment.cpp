#include "wmattr/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "wmattr/bounds.hpp"
#include "wmattr/detect.hpp"
#include "wmattr/errors.hpp"

namespace wmattr {

void ExperimentConfig::validate() const {
    if (n == 0 || n > static_cast<std::size_t>(kMaxTailTrials)) {
        throw ConfigError("n must lie in [1, " + std::to_string(kMaxTailTrials) + "]");
    }
    if (s == 0) throw ConfigError("s must be at least 1");
    if (samples_per_user == 0) throw ConfigError("samples_per_user must be at least 1");
    if (!(tau > Rational(1, 2) && tau <= Rational(1))) throw ConfigError("tau must satisfy 0.5 < tau <= 1");
    if (!(beta.lo > 0.0 && beta.lo <= beta.hi && beta.hi <= 1.0)) {
        throw ConfigError("beta range must satisfy 0 < lo <= hi <= 1");
    }
    if (!(gamma >= 0.0 && gamma <= 0.5)) throw ConfigError("gamma must lie in [0, 0.5]");
    if (strategy.kind == SelectionKind::ABSTA && strategy.depth < 1) throw ConfigError("depth must be at least 1");
    if (postprocess) postprocess->validate();
}

std::size_t worst_fraction_count(std::size_t s) { return std::max<std::size_t>(1, s / 100); }

double mean_of_lowest(std::span<const double> values, std::size_t count) {
    if (values.empty()) return 0.0;
    count = std::min(count, values.size());
    std::vector<double> sorted(values.begin(), values.end());
    std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(count), sorted.end());
    return std::accumulate(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(count), 0.0) /
           static_cast<double>(count);
}

namespace {

double draw_beta(const ExperimentConfig& cfg, std::size_t user) {
    double beta = cfg.beta.lo;
    if (cfg.beta.hi > cfg.beta.lo) {
        Rng rng = make_rng(cfg.seed, Stream::BetaDraw, user);
        beta = cfg.beta.lo + (cfg.beta.hi - cfg.beta.lo) * uniform01(rng);
    }
    return cfg.postprocess ? degrade_beta(beta, *cfg.postprocess) : beta;
}

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

} // namespace

namespace {

Codebook experiment_codebook(const ExperimentConfig& cfg) {
    cfg.validate();
    if (!cfg.codebook_path.empty()) {
        Codebook book = load_codebook_file(cfg.codebook_path);
        if (book.n() != cfg.n) {
            throw ConfigError("codebook has n=" + std::to_string(book.n()) + " but the config says n=" +
                              std::to_string(cfg.n));
        }
        return book;
    }
    SelectionStrategy strategy = cfg.strategy;
    strategy.rng_seed = cfg.seed;
    return generate_codebook(cfg.n, cfg.s, strategy);
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    return run_experiment(cfg, experiment_codebook(cfg));
}

ExperimentReport run_experiment(const ExperimentConfig& base, const Codebook& book) {
    if (book.empty()) {
        throw ConfigError("experiment needs a non-empty codebook");
    }
    ExperimentReport report;
    report.config = base;
    report.config.n = book.n();
    report.config.s = book.size();
    const ExperimentConfig& cfg = report.config;
    cfg.validate();

    const std::size_t n = cfg.n;
    const std::size_t s = cfg.s;
    const DetectionThreshold thr(cfg.tau, n);

    std::vector<AlphaRange> alphas;
    if (s >= 2) {
        alphas = alpha_ranges(book);
        report.max_pairwise = max_pairwise_ba(book);
    }

    // Watermarked content, one substream per user.
    report.per_user.resize(s);
    std::vector<DecodeSample> samples(cfg.samples_per_user);
    for (std::size_t i = 0; i < s; ++i) {
        UserMetrics& u = report.per_user[i];
        u.user_id = book.user_id(i);
        u.beta = draw_beta(cfg, i);
        u.samples = cfg.samples_per_user;
        const Watermark own = book.watermark(i);
        Rng rng = make_rng(cfg.seed, Stream::Watermarked, i);
        for (auto& sample : samples) {
            sample.user_id = u.user_id;
            sample.decoded = simulate_watermarked_decode(own, u.beta, rng);
            const Outcome outcome = classify_outcome(GroundTruth::ai(i), attribute(sample.decoded, book, thr));
            ++report.branch_counts[static_cast<std::size_t>(outcome) - 1];
            if (outcome == Outcome::MissedDetection) ++u.missed;
            if (outcome == Outcome::CorrectAttribution) ++u.correct;
            if (outcome == Outcome::WrongAttribution) ++u.wrong;
        }
        u.beta_hat = estimate_beta(samples, own);
        u.tdr = static_cast<double>(u.correct + u.wrong) / static_cast<double>(u.samples);
        u.tar = static_cast<double>(u.correct) / static_cast<double>(u.samples);
        if (s >= 2) {
            u.alpha_min = alphas[i].min;
            u.alpha_max = alphas[i].max;
        }
    }

    // Unwatermarked content. Per-bit probabilities are fixed for the whole run.
    Rng prob_rng = make_rng(cfg.seed, Stream::BitProbabilities, 0);
    const BitProbabilities probs = make_bit_probabilities(n, cfg.gamma, cfg.gamma_mode, prob_rng);
    std::vector<DecodeSample> clean(cfg.fdr_samples);
    for (std::size_t j = 0; j < cfg.fdr_samples; ++j) {
        Rng rng = make_rng(cfg.seed, Stream::Unwatermarked, j);
        clean[j].decoded = simulate_unwatermarked_decode(probs, rng);
        const Outcome outcome = classify_outcome(GroundTruth::non_ai(), attribute(clean[j].decoded, book, thr));
        ++report.branch_counts[static_cast<std::size_t>(outcome) - 1];
        if (outcome == Outcome::FalseDetection) ++report.false_detections;
    }
    if (cfg.fdr_samples > 0) {
        report.fdr = static_cast<double>(report.false_detections) / static_cast<double>(cfg.fdr_samples);
        report.gamma_hat = estimate_gamma(clean);
    }

    // Bounds.
    const bool estimated = cfg.bound_source == BoundSource::Estimated;
    const double bound_gamma = std::min(0.5, estimated ? report.gamma_hat : cfg.gamma);
    BoundInputs common;
    common.n = static_cast<std::int64_t>(n);
    common.tau = cfg.tau;
    common.gamma = bound_gamma;
    common.s = s;
    for (std::size_t i = 0; i < s; ++i) {
        UserMetrics& u = report.per_user[i];
        BoundInputs in = common;
        in.beta = std::max(estimated ? u.beta_hat : u.beta, std::numeric_limits<double>::min());
        if (s >= 2) {
            in.alpha_min = u.alpha_min->as_rational();
            in.alpha_max = u.alpha_max->as_rational();
        } else {
            // No other user: the far-watermark term of the TDR bound vanishes and
            // attribution is implied by detection.
            in.alpha_min = Rational(1);
            in.alpha_max = Rational(0);
        }
        if (cfg.tau.to_double() < in.beta) u.tdr_bound = tdr_lower_bound(in).value;
        u.tar_bound = tar_lower_bound(in).value;
        u.coincide = detection_implies_attribution(common.n, cfg.tau, in.alpha_max);
    }
    report.fdr_bound = fdr_upper_bound_independent(common).value;
    BoundInputs general = common;
    if (s >= 2) general.alpha_max = report.per_user.front().alpha_max->as_rational();
    const BoundResult general_bound = fdr_upper_bound_general(general);
    report.fdr_bound_general = general_bound.value;
    report.fdr_bound_general_clamped = general_bound.clamped;

    // Aggregates.
    std::vector<double> tdr(s);
    std::vector<double> tar(s);
    for (std::size_t i = 0; i < s; ++i) {
        tdr[i] = report.per_user[i].tdr;
        tar[i] = report.per_user[i].tar;
    }
    report.avg_tdr = mean(tdr);
    report.avg_tar = mean(tar);
    report.worst1_tdr = mean_of_lowest(tdr, worst_fraction_count(s));
    report.worst1_tar = mean_of_lowest(tar, worst_fraction_count(s));
    return report;
}

SweepAxis parse_sweep_axis(std::string_view name) {
    if (name == "s") return SweepAxis::S;
    if (name == "n") return SweepAxis::N;
    if (name == "tau") return SweepAxis::Tau;
    if (name == "strategy") return SweepAxis::Strategy;
    if (name == "postprocess") return SweepAxis::Postprocess;
    throw ConfigError("unknown sweep axis '" + std::string(name) + "'");
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::S: return "s";
    case SweepAxis::N: return "n";
    case SweepAxis::Tau: return "tau";
    case SweepAxis::Strategy: return "strategy";
    case SweepAxis::Postprocess: return "postprocess";
    }
    return "?";
}

std::vector<ExperimentReport> sweep(const ExperimentConfig& cfg, SweepAxis axis, std::span<const std::string> values,
                                    const ProfileTable& profiles) {
    std::vector<ExperimentConfig> points;
    for (const std::string& value : values) {
        ExperimentConfig point = cfg;
        try {
            switch (axis) {
            case SweepAxis::S: point.s = std::stoul(value); break;
            case SweepAxis::N: point.n = std::stoul(value); break;
            case SweepAxis::Tau: point.tau = Rational::parse(value); break;
            case SweepAxis::Strategy: point.strategy.kind = parse_selection_kind(value); break;
            case SweepAxis::Postprocess:
                if (value == "none") {
                    point.postprocess.reset();
                } else {
                    point.postprocess = profiles.get(value);
                }
                break;
            }
        } catch (const std::logic_error&) {
            throw ConfigError("invalid " + std::string(to_string(axis)) + " sweep value '" + value + "'");
        }
        point.validate();
        points.push_back(std::move(point));
    }
    std::vector<ExperimentReport> reports;
    reports.reserve(points.size());
    if (axis == SweepAxis::Tau || axis == SweepAxis::Postprocess) {
        // The codebook does not depend on these axes.
        const Codebook book = experiment_codebook(cfg);
        for (const auto& point : points) reports.push_back(run_experiment(point, book));
    } else {
        for (const auto& point : points) reports.push_back(run_experiment(point));
    }
    return reports;
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    // At 0 or all successes the matching end is exactly 0 or 1 analytically.
    const double lower = successes == 0 ? 0.0 : std::max(0.0, center - half);
    const double upper = successes == trials ? 1.0 : std::min(1.0, center + half);
    return {lower, upper};
}

BoundComparison compare_bounds(const ExperimentReport& report) {
    BoundComparison cmp;
    auto add_lower = [&](const std::string& subject, const char* metric, std::size_t hits, std::size_t trials,
                         double bound) {
        BoundCheck row;
        row.subject = subject;
        row.metric = metric;
        row.empirical = static_cast<double>(hits) / static_cast<double>(trials);
        row.bound = bound;
        row.tolerance = wilson_interval(hits, trials).width();
        row.margin = row.empirical - bound;
        row.violated = row.empirical < bound - row.tolerance;
        cmp.violations += row.violated ? 1 : 0;
        cmp.rows.push_back(std::move(row));
    };
    for (const UserMetrics& u : report.per_user) {
        if (u.tdr_bound) add_lower(u.user_id, "tdr", u.correct + u.wrong, u.samples, *u.tdr_bound);
        add_lower(u.user_id, "tar", u.correct, u.samples, u.tar_bound);
    }
    if (report.config.fdr_samples > 0) {
        BoundCheck row;
        row.subject = "all";
        row.metric = "fdr";
        row.empirical = report.fdr;
        row.bound = report.fdr_bound;
        row.tolerance = wilson_interval(report.false_detections, report.config.fdr_samples).width();
        row.margin = report.fdr_bound - report.fdr;
        row.violated = report.fdr > report.fdr_bound + row.tolerance;
        cmp.violations += row.violated ? 1 : 0;
        cmp.rows.push_back(std::move(row));
    }
    return cmp;
}

// ---------------------------------------------------------------------------
// CSV

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string fmt_bound(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string fmt_ba(const std::optional<BitwiseAccuracy>& ba) { return ba ? fmt(ba->value()) : std::string(); }

struct SummaryRow {
    std::string metric;
    std::string value;
};

std::vector<SummaryRow> summary_rows(const ExperimentReport& r) {
    const ExperimentConfig& c = r.config;
    std::vector<SummaryRow> rows = {
        {"n", std::to_string(c.n)},
        {"tau", fmt_bound(c.tau.to_double())},
        {"s", std::to_string(c.s)},
        {"samples_per_user", std::to_string(c.samples_per_user)},
        {"fdr_samples", std::to_string(c.fdr_samples)},
        {"strategy", std::string(to_string(c.strategy.kind))},
        {"gamma_mode", std::string(to_string(c.gamma_mode))},
        {"postprocess", c.postprocess ? c.postprocess->name : "none"},
        {"seed", std::to_string(c.seed)},
        {"max_pairwise_ba", fmt_ba(r.max_pairwise)},
        {"avg_tdr", fmt(r.avg_tdr)},
        {"avg_tar", fmt(r.avg_tar)},
        {"worst1_tdr", fmt(r.worst1_tdr)},
        {"worst1_tar", fmt(r.worst1_tar)},
        {"fdr", fmt(r.fdr)},
        {"fdr_bound", fmt_bound(r.fdr_bound)},
        {"fdr_bound_general", fmt_bound(r.fdr_bound_general)},
        {"gamma_hat", fmt(r.gamma_hat)},
    };
    for (std::size_t b = 0; b < r.branch_counts.size(); ++b) {
        rows.push_back({"branch_" + std::to_string(b + 1), std::to_string(r.branch_counts[b])});
    }
    return rows;
}

} // namespace

void write_per_user_csv(const ExperimentReport& report, std::ostream& out) {
    out << "user_id,beta_hat,tdr,tar,tdr_bound,tar_bound,alpha_min,alpha_max\n";
    for (const UserMetrics& u : report.per_user) {
        out << csv_field(u.user_id) << ',' << fmt(u.beta_hat) << ',' << fmt(u.tdr) << ',' << fmt(u.tar) << ','
            << (u.tdr_bound ? fmt_bound(*u.tdr_bound) : std::string()) << ',' << fmt_bound(u.tar_bound) << ','
            << fmt_ba(u.alpha_min) << ',' << fmt_ba(u.alpha_max) << '\n';
    }
}

void write_summary_csv(const ExperimentReport& report, const BoundComparison& comparison, std::ostream& out) {
    out << "metric,value\n";
    for (const auto& row : summary_rows(report)) out << row.metric << ',' << csv_field(row.value) << '\n';
    out << "bound_violations," << comparison.violations << '\n';
}

void write_comparison_csv(const BoundComparison& comparison, std::ostream& out) {
    out << "subject,metric,empirical,bound,tolerance,margin,violated\n";
    for (const BoundCheck& row : comparison.rows) {
        out << csv_field(row.subject) << ',' << row.metric << ',' << fmt(row.empirical) << ',' << fmt_bound(row.bound)
            << ',' << fmt(row.tolerance) << ',' << fmt_bound(row.margin) << ',' << (row.violated ? 1 : 0) << '\n';
    }
}

void write_sweep_csv(SweepAxis axis, std::span<const std::string> values, std::span<const ExperimentReport> reports,
                     std::ostream& out) {
    out << to_string(axis) << ",max_pairwise_ba,avg_tdr,avg_tar,worst1_tdr,worst1_tar,fdr,fdr_bound\n";
    for (std::size_t i = 0; i < reports.size() && i < values.size(); ++i) {
        const ExperimentReport& r = reports[i];
        out << csv_field(values[i]) << ',' << fmt_ba(r.max_pairwise) << ',' << fmt(r.avg_tdr) << ','
            << fmt(r.avg_tar) << ',' << fmt(r.worst1_tdr) << ',' << fmt(r.worst1_tar) << ',' << fmt(r.fdr) << ','
            << fmt_bound(r.fdr_bound) << '\n';
    }
}

} // namespace wmattr
