// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Criteria can be selected by number on the command line, e.g. `acceptance 1 9`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "wmattr/bounds.hpp"
#include "wmattr/codebook.hpp"
#include "wmattr/errors.hpp"
#include "wmattr/experiment.hpp"
#include "wmattr/reference.hpp"
#include "wmattr/selection.hpp"

using namespace wmattr;

namespace {

constexpr std::uint64_t kSeed = 7;

struct Verdict {
    bool pass = false;
    std::string detail;
    std::vector<std::string> notes;
};

struct Criterion {
    int id;
    const char* title;
    double time_limit_s;  // 0 = no limit
    std::function<Verdict()> check;
};

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

bool non_increasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[i - 1]) return false;
    }
    return true;
}

std::string join(const std::vector<double>& v, const char* format) {
    std::string out;
    for (double x : v) out += (out.empty() ? "" : " ") + fmt(format, x);
    return out;
}

// ---------------------------------------------------------------------------

Verdict table_at_hundred_million() {
    BoundInputs in;
    in.n = 64;
    in.tau = Rational(9, 10);
    in.beta = 0.99;
    in.gamma = 0.05;
    in.s = 100'000'000;
    in.alpha_min = Rational(1, 5);
    in.alpha_max = Rational(4, 5);
    const double tdr = tdr_lower_bound(in).value;
    const double tar = tar_lower_bound(in).value;
    const double fdr = fdr_upper_bound_independent(in).value;
    Verdict v;
    v.pass = tdr >= 0.9999 && tar >= 0.9999 && std::fabs(fdr - 0.06) <= 0.01;
    v.detail = "tdr>=" + fmt("%.8f", tdr) + " tar>=" + fmt("%.8f", tar) + " fdr<=" + fmt("%.6f", fdr);
    return v;
}

Verdict bsta_exactness() {
    Rng rng = make_rng(kSeed, Stream::Verify, 2);
    std::size_t instances = 0;
    std::size_t decisions = 0;
    std::size_t mismatches = 0;

    // Decision agreement on arbitrary books, every m.
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 4 + uniform_index(rng, 9);
        const std::size_t s = 1 + uniform_index(rng, 8);
        const Codebook book = testing::random_book(n, s, rng);
        const std::size_t m_opt = brute_force_farthest(book).m_opt;
        for (std::size_t m = 0; m <= n; ++m) {
            const DecisionOutcome found = bsta_decision(book, ~book.watermark(0), static_cast<int>(m), m);
            ++decisions;
            if (found.has_value() != (m >= m_opt)) ++mismatches;
            if (found && reference::max_matched(book, *found) > m) ++mismatches;
        }
        ++instances;
    }

    // The selection loop, applied user by user, reaches the optimum each time.
    std::size_t steps = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 4 + uniform_index(rng, 9);
        const std::size_t s = 2 + uniform_index(rng, 7);
        SelectionStrategy strategy;
        strategy.kind = SelectionKind::BSTA;
        Codebook book(n);
        for (std::size_t i = 0; i < s; ++i) {
            strategy.rng_seed = registration_seed(kSeed + trial, i);
            const Selection sel = select_watermark(book, strategy);
            if (!book.empty()) {
                ++steps;
                if (sel.achieved_m != brute_force_farthest(book).m_opt) ++mismatches;
            }
            book.append("u" + std::to_string(i + 1), sel.watermark);
        }
        ++instances;
    }

    Verdict v;
    v.pass = mismatches == 0 && instances >= 200;
    v.detail = std::to_string(instances) + " instances, " + std::to_string(decisions) + " decisions, " +
               std::to_string(steps) + " selection steps, " + std::to_string(mismatches) + " mismatches";
    return v;
}

Verdict solver_soundness() {
    Rng rng = make_rng(kSeed, Stream::Verify, 3);
    const std::size_t cases = 100'000;
    std::size_t found = 0;
    std::size_t violations = 0;
    std::size_t budget_hits = 0;
    Codebook book(8);
    for (std::size_t c = 0; c < cases; ++c) {
        if (c % 50 == 0) {
            // n >= 5 leaves room for 20 distinct watermarks.
            const std::size_t n = 5 + uniform_index(rng, 60);
            const std::size_t s = 1 + uniform_index(rng, 20);
            book = testing::random_book(n, s, rng);
        }
        const std::size_t n = book.n();
        const std::size_t m = uniform_index(rng, n + 1);
        DecisionOutcome out;
        switch (c % 3) {
        case 0: {
            SearchBudget budget{20'000, 0};
            const int depth = static_cast<int>(uniform_index(rng, std::min<std::size_t>(m, 10) + 1));
            const Watermark init = c % 2 == 0 ? ~book.watermark(0) : random_select(n, rng);
            try {
                out = bsta_decision(book, init, depth, m, &budget);
            } catch (const ResourceLimit&) {
                ++budget_hits;
            }
            break;
        }
        case 1: out = nrg_decision(book, ~book.watermark(0), m, rng); break;
        default: out = absta_decision(book, 1 + static_cast<int>(uniform_index(rng, 8)), m, rng); break;
        }
        if (out) {
            ++found;
            if (out->size() != n || reference::max_matched(book, *out) > m) ++violations;
        }
    }
    Verdict v;
    v.pass = violations == 0;
    v.detail = std::to_string(cases) + " cases, " + std::to_string(found) + " found, " + std::to_string(violations) +
               " violations, " + std::to_string(budget_hits) + " budget stops";
    return v;
}

Verdict absta_desk_scale() {
    SelectionStrategy strategy;
    strategy.kind = SelectionKind::ABSTA;
    strategy.depth = 8;
    strategy.rng_seed = kSeed;
    const Codebook book = generate_codebook(64, 10'000, strategy);
    const BitwiseAccuracy worst = max_pairwise_ba(book);
    Verdict v;
    v.pass = worst.value() <= 0.75;
    v.detail = "s=10000 max_pairwise_ba=" + fmt("%.6f", worst.value()) + " (" + std::to_string(worst.matched) + "/64)";
    return v;
}

ExperimentConfig desk_config() {
    ExperimentConfig cfg;
    cfg.n = 64;
    cfg.tau = Rational(9, 10);
    cfg.s = 1000;
    cfg.samples_per_user = 100;
    cfg.fdr_samples = 1000;
    cfg.beta = {0.99, 0.99};
    cfg.gamma = 0.05;
    cfg.gamma_mode = GammaMode::WorstCase;
    cfg.strategy.kind = SelectionKind::ABSTA;
    cfg.strategy.depth = 8;
    cfg.seed = kSeed;
    return cfg;
}

Verdict method_ordering() {
    const SelectionKind kinds[] = {SelectionKind::ABSTA, SelectionKind::NRG, SelectionKind::Random};
    std::vector<Codebook> books;
    std::vector<double> max_ba;
    for (SelectionKind kind : kinds) {
        SelectionStrategy strategy;
        strategy.kind = kind;
        strategy.rng_seed = kSeed;
        books.push_back(generate_codebook(64, 1000, strategy));
        max_ba.push_back(max_pairwise_ba(books.back()).value());
    }
    const bool ba_order = max_ba[0] < max_ba[1] && max_ba[1] < max_ba[2];

    auto worst_tar = [&](const char* tau) {
        ExperimentConfig cfg = desk_config();
        cfg.tau = Rational::parse(tau);
        cfg.beta = {0.85, 0.85};
        std::vector<double> out;
        for (const Codebook& book : books) out.push_back(run_experiment(cfg, book).worst1_tar);
        return out;
    };
    const std::vector<double> tar = worst_tar("0.9");
    const bool tar_order = tar[0] >= tar[1] && tar[1] >= tar[2];
    const std::vector<double> tar_low = worst_tar("0.7");

    Verdict v;
    v.pass = ba_order && tar_order;
    v.detail = "max_pairwise_ba absta/nrg/random = " + join(max_ba, "%.6f") +
               "; worst1 TAR at beta=0.85 tau=0.9 = " + join(tar, "%.4f");
    v.notes.push_back("worst1 TAR at beta=0.85 tau=0.7 (absta/nrg/random) = " + join(tar_low, "%.4f"));
    return v;
}

ExperimentReport containment_report() {
    ExperimentConfig cfg = desk_config();
    cfg.fdr_samples = 10'000;
    return run_experiment(cfg);
}

Verdict bound_containment(const ExperimentReport& report) {
    const BoundComparison cmp = compare_bounds(report);
    double min_margin = 1.0;
    for (const BoundCheck& row : cmp.rows) min_margin = std::min(min_margin, row.margin);
    Verdict v;
    v.pass = cmp.violations == 0 && report.fdr <= report.fdr_bound;
    v.detail = std::to_string(cmp.rows.size()) + " comparisons, " + std::to_string(cmp.violations) +
               " violations, min margin " + fmt("%.5f", min_margin) + ", fdr " + fmt("%.6f", report.fdr) +
               " <= " + fmt("%.3g", report.fdr_bound);
    return v;
}

Verdict detection_implies_attribution(const ExperimentReport& report) {
    bool all_separated = true;
    bool all_coincide = true;
    double widest = 0;
    for (const UserMetrics& u : report.per_user) {
        all_separated = all_separated && u.alpha_max && u.alpha_max->value() <= 0.75;
        all_coincide = all_coincide && u.coincide;
        if (u.alpha_max) widest = std::max(widest, u.alpha_max->value());
    }
    const double gap = std::fabs(report.avg_tdr - report.avg_tar);
    Verdict v;
    v.pass = all_separated && all_coincide && gap <= 0.002;
    v.detail = "max alpha " + fmt("%.6f", widest) + ", coincide " + (all_coincide ? "all" : "not all") +
               ", |avg TDR - avg TAR| = " + fmt("%.6f", gap);
    return v;
}

Verdict sweep_trends() {
    ExperimentConfig cfg = desk_config();
    cfg.gamma = 0.1;
    const std::vector<std::string> taus = {"0.7", "0.75", "0.8", "0.85", "0.9", "0.95"};
    const std::vector<ExperimentReport> by_tau = sweep(cfg, SweepAxis::Tau, taus);
    std::vector<double> fdr, tdr, tar;
    for (const auto& r : by_tau) {
        fdr.push_back(r.fdr);
        tdr.push_back(r.avg_tdr);
        tar.push_back(r.avg_tar);
    }
    const std::vector<std::string> sizes = {"10", "100", "1000"};
    const std::vector<ExperimentReport> by_s = sweep(cfg, SweepAxis::S, sizes);
    std::vector<double> worst;
    for (const auto& r : by_s) worst.push_back(r.worst1_tar);

    Verdict v;
    v.pass = non_increasing(fdr) && non_increasing(tdr) && non_increasing(tar) && non_increasing(worst);
    v.detail = "tau sweep fdr [" + join(fdr, "%.4f") + "] avg_tdr [" + join(tdr, "%.5f") + "] avg_tar [" +
               join(tar, "%.5f") + "]; s sweep worst1 TAR [" + join(worst, "%.4f") + "]";
    return v;
}

Verdict numerical_tails() {
    double worst = 0;
    std::size_t compared = 0;
    for (std::int64_t n = 1; n <= 64; ++n) {
        for (int pct = 1; pct <= 99; ++pct) {
            const double p = pct / 100.0;
            const std::vector<double> ge = reference::tail_ge_all(n, Rational(pct, 100));
            for (std::int64_t k = -1; k <= n + 1; ++k) {
                const double exact_ge = k <= 0 ? 1.0 : ge[static_cast<std::size_t>(k)];
                const double exact_le = k < 0 ? 0.0 : k >= n ? 1.0 : 1.0 - ge[static_cast<std::size_t>(k + 1)];
                worst = std::max(worst, std::fabs(binom_tail_ge(n, p, k) - exact_ge));
                worst = std::max(worst, std::fabs(binom_tail_le(n, p, k) - exact_le));
                compared += 2;
            }
        }
        // Direct lower-tail oracle on a few points, not derived from the upper one.
        for (std::int64_t k = 0; k < n; k += 7) {
            const double exact = reference::tail_le(n, Rational(37, 100), k);
            worst = std::max(worst, std::fabs(binom_tail_le(n, 0.37, k) - exact));
            ++compared;
        }
    }
    Verdict v;
    v.pass = worst <= 1e-12;
    v.detail = std::to_string(compared) + " values, max abs error " + fmt("%.3g", worst);
    return v;
}

Verdict bound_monotonicity() {
    std::size_t checks = 0;
    std::size_t violations = 0;
    auto expect_le = [&](double a, double b) {
        ++checks;
        if (a > b) ++violations;
    };

    // Lower bounds of TDR and TAR against beta, for 20 thresholds.
    for (int t = 0; t < 20; ++t) {
        BoundInputs in;
        in.n = 64;
        in.tau = Rational(33 + t, 64);
        in.alpha_min = Rational(1, 4);
        in.alpha_max = Rational(3, 4);
        double prev_tdr = -1;
        double prev_tar = -1;
        for (int b = 0; b < 20; ++b) {
            in.beta = 0.525 + 0.025 * b;
            if (Rational::parse(fmt("%.3f", in.beta)) > in.tau) {
                const double v = tdr_lower_bound(in).value;
                if (prev_tdr >= 0) expect_le(prev_tdr, v);
                prev_tdr = v;
            }
            const double v = tar_lower_bound(in).value;
            if (prev_tar >= 0) expect_le(prev_tar, v);
            prev_tar = v;
        }
    }

    // FDR upper bound against gamma and s on a 20x20 grid.
    std::vector<std::vector<double>> grid(20, std::vector<double>(20));
    for (int g = 0; g < 20; ++g) {
        for (int e = 0; e < 20; ++e) {
            BoundInputs in;
            in.n = 64;
            in.tau = Rational(9, 10);
            in.gamma = 0.025 * g;
            in.s = static_cast<std::uint64_t>(std::llround(std::pow(10.0, 0.5 * e)));
            grid[g][e] = fdr_upper_bound_independent(in).value;
        }
    }
    for (int g = 0; g < 20; ++g) {
        for (int e = 0; e < 20; ++e) {
            if (g > 0) expect_le(grid[g - 1][e], grid[g][e]);
            if (e > 0) expect_le(grid[g][e - 1], grid[g][e]);
        }
    }

    Verdict v;
    v.pass = violations == 0;
    v.detail = std::to_string(checks) + " ordered pairs, " + std::to_string(violations) + " violations";
    return v;
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    // Criteria 6 and 7 share one simulation run.
    std::optional<ExperimentReport> shared;
    auto containment = [&]() -> const ExperimentReport& {
        if (!shared) shared = containment_report();
        return *shared;
    };

    const std::vector<Criterion> criteria = {
        {1, "bounds at 100 million users", 1, table_at_hundred_million},
        {2, "exact BSTA agrees with brute force", 120, bsta_exactness},
        {3, "solver soundness", 0, solver_soundness},
        {4, "A-BSTA codebook at s=10000", 600, absta_desk_scale},
        {5, "selection method ordering", 0, method_ordering},
        {6, "empirical rates within theoretical bounds", 300, [&] { return bound_containment(containment()); }},
        {7, "detection implies attribution", 0, [&] { return detection_implies_attribution(containment()); }},
        {8, "threshold and user-count trends", 0, sweep_trends},
        {9, "binomial tails vs exact rationals", 0, numerical_tails},
        {10, "bound monotonicity", 0, bound_monotonicity},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (!selected.empty() && !selected.contains(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
            v.pass = false;
            v.detail += "; over the " + fmt("%.0f", c.time_limit_s) + " s limit";
        }
        std::printf("%s %d %s: %s [%.2f s]\n", v.pass ? "PASS" : "FAIL", c.id, c.title, v.detail.c_str(), secs);
        for (const std::string& note : v.notes) std::printf("     note: %s\n", note.c_str());
        std::fflush(stdout);
        failures += v.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
