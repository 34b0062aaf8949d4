#include "cli.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wmattr/bounds.hpp"
#include "wmattr/codebook.hpp"
#include "wmattr/config.hpp"
#include "wmattr/detect.hpp"
#include "wmattr/errors.hpp"
#include "wmattr/experiment.hpp"
#include "wmattr/reference.hpp"
#include "wmattr/selection.hpp"

namespace wmattr::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string general(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

Rational parse_fraction(const std::string& flag, const std::string& text) {
    try {
        return Rational::parse(text);
    } catch (const std::exception&) {
        throw UsageError(flag + ": expected a decimal or fraction, got '" + text + "'");
    }
}

/// Accepts plain integers and scientific notation such as 1e8.
std::uint64_t parse_count(const std::string& flag, const std::string& text) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || !(v >= 1) || v != std::floor(v) || v > 1.8e19) {
        throw UsageError(flag + ": expected a positive integer, got '" + text + "'");
    }
    return static_cast<std::uint64_t>(v);
}

void refuse_overwrite(const fs::path& path, bool force) {
    if (!force && fs::exists(path)) {
        throw UsageError(path.string() + " already exists (use --force to overwrite)");
    }
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

/// Single-writer guard for a codebook file: holds "<path>.lock" while alive.
class CodebookLock {
public:
    explicit CodebookLock(const std::string& codebook) : path_(codebook + ".lock") {
        const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0) {
            throw std::runtime_error("codebook is locked by another writer (" + path_ +
                                     " exists; remove it if no writer is running)");
        }
        const std::string pid = std::to_string(::getpid()) + "\n";
        [[maybe_unused]] const auto written = ::write(fd, pid.data(), pid.size());
        ::close(fd);
    }
    ~CodebookLock() { ::unlink(path_.c_str()); }
    CodebookLock(const CodebookLock&) = delete;
    CodebookLock& operator=(const CodebookLock&) = delete;

private:
    std::string path_;
};

// ---------------------------------------------------------------------------
// Option bundles shared between subcommands.

struct StrategyFlags {
    std::string strategy = "absta";
    int depth = 8;
    std::uint64_t node_budget = 10'000'000;

    void attach(CLI::App* cmd) {
        cmd->add_option("--strategy", strategy, "random | bsta | nrg | absta")->capture_default_str();
        cmd->add_option("--depth", depth, "A-BSTA search depth")->capture_default_str();
        cmd->add_option("--bsta-budget", node_budget, "node cap for exact BSTA, 0 = unlimited")->capture_default_str();
    }

    SelectionStrategy resolve(std::uint64_t seed) const {
        SelectionStrategy s;
        s.kind = parse_selection_kind(strategy);
        s.depth = depth;
        s.node_budget = node_budget;
        s.rng_seed = seed;
        return s;
    }
};

/// --config plus the flags that override it.
struct ExperimentFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
    std::optional<std::string> tau;
    std::optional<std::string> s;
    std::optional<std::string> strategy;
    std::optional<int> depth;
    std::optional<std::size_t> samples;
    std::optional<std::size_t> fdr_samples;
    std::string codebook;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config, "experiment config (INI)");
        cmd->add_option("--seed", seed, "master seed (overrides the config)");
        cmd->add_option("--n", n, "watermark length");
        cmd->add_option("--tau", tau, "detection threshold");
        cmd->add_option("--s", s, "number of users");
        cmd->add_option("--strategy", strategy, "random | bsta | nrg | absta");
        cmd->add_option("--depth", depth, "A-BSTA search depth");
        cmd->add_option("--samples", samples, "watermarked samples per user");
        cmd->add_option("--fdr-samples", fdr_samples, "unwatermarked samples");
        cmd->add_option("--codebook", codebook, "use this codebook instead of generating one");
    }

    LoadedConfig resolve() const {
        LoadedConfig loaded;
        if (!config.empty()) loaded = read_config_file(config);
        ExperimentConfig& cfg = loaded.experiment;
        if (seed) {
            cfg.seed = *seed;
            loaded.seed_set = true;
        }
        if (!loaded.seed_set) {
            throw UsageError("a seed is required: pass --seed or set [experiment] seed in the config");
        }
        if (n) cfg.n = *n;
        if (tau) cfg.tau = parse_fraction("--tau", *tau);
        if (s) cfg.s = parse_count("--s", *s);
        if (strategy) cfg.strategy.kind = parse_selection_kind(*strategy);
        if (depth) cfg.strategy.depth = *depth;
        if (samples) cfg.samples_per_user = *samples;
        if (fdr_samples) cfg.fdr_samples = *fdr_samples;
        if (!codebook.empty()) cfg.codebook_path = codebook;
        cfg.validate();
        return loaded;
    }
};

// ---------------------------------------------------------------------------
// register / gen-codebook

int cmd_register(const std::string& path, const std::string& user, std::size_t n, std::uint64_t seed,
                 const StrategyFlags& flags, std::ostream& out) {
    CodebookLock lock(path);
    Codebook book = fs::exists(path) ? load_codebook_file(path) : Codebook(n);
    if (book.find_user(user)) throw UsageError("user '" + user + "' is already registered");
    const SelectionStrategy strategy = flags.resolve(registration_seed(seed, book.size()));
    const Selection sel = select_watermark(book, strategy);
    std::string max_ba = "n/a";
    if (!book.empty()) {
        const Nearest nearest = most_similar(book, sel.watermark.words());
        max_ba = fixed(BitwiseAccuracy{nearest.matched, book.n()}.value());
    }
    book.append(user, sel.watermark);
    save_codebook_file(book, path);
    out << "user " << user << '\n'
        << "watermark " << sel.watermark.to_hex() << '\n'
        << "achieved_m " << sel.achieved_m << '\n'
        << "max_ba_to_existing " << max_ba << '\n'
        << "codebook_size " << book.size() << '\n';
    return kOk;
}

int cmd_gen_codebook(const std::string& path, std::size_t n, const std::string& s_text, std::uint64_t seed,
                     const StrategyFlags& flags, bool force, std::ostream& out) {
    const std::uint64_t s = parse_count("--s", s_text);
    refuse_overwrite(path, force);
    CodebookLock lock(path);
    const auto start = std::chrono::steady_clock::now();
    const Codebook book = generate_codebook(n, s, flags.resolve(seed));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    save_codebook_file(book, path);
    out << "users " << book.size() << '\n';
    if (book.size() >= 2) out << "max_pairwise_ba " << fixed(max_pairwise_ba(book).value()) << '\n';
    out << "seconds " << fixed(secs, 3) << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------
// detect / attribute

std::vector<std::string> read_batch(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open batch file " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

nlohmann::json to_json(const AttributionResult& r, bool with_user) {
    nlohmann::json j;
    j["detected"] = r.detected;
    if (with_user) {
        j["user_id"] = r.attributed_user ? nlohmann::json(*r.attributed_user) : nlohmann::json(nullptr);
        j["tied"] = r.tied;
        j["runner_up_ba"] = r.runner_up_ba.value();
    }
    j["best_ba"] = r.best_ba.value();
    j["best_matched"] = r.best_ba.matched;
    j["n"] = r.best_ba.n;
    return j;
}

int cmd_scan(bool attribution, const std::string& codebook, const std::string& tau_text, const std::string& decoded,
             const std::string& batch, const std::string& out_path, bool force, bool json, std::ostream& out) {
    if (decoded.empty() == batch.empty()) throw UsageError("pass exactly one of --decoded or --batch");
    const Codebook book = load_codebook_file(codebook);
    const DetectionThreshold thr(parse_fraction("--tau", tau_text), book.n());

    if (!decoded.empty()) {
        const AttributionResult r = attribute(Watermark::from_hex(decoded, book.n()), book, thr);
        if (json) {
            out << to_json(r, attribution).dump() << '\n';
        } else {
            out << "detected " << (r.detected ? "yes" : "no") << '\n';
            if (attribution) out << "user " << r.attributed_user.value_or("-") << '\n';
            out << "best_ba " << fixed(r.best_ba.value()) << " (" << r.best_ba.matched << '/' << r.best_ba.n
                << ")\n";
            if (attribution) {
                out << "runner_up_ba " << fixed(r.runner_up_ba.value()) << " (" << r.runner_up_ba.matched << '/'
                    << r.runner_up_ba.n << ")\n"
                    << "tied " << (r.tied ? "yes" : "no") << '\n';
            }
        }
        return r.detected ? kOk : kNegative;
    }

    const std::vector<std::string> lines = read_batch(batch);
    std::ofstream file;
    std::ostream* sink = &out;
    if (!out_path.empty()) {
        refuse_overwrite(out_path, force);
        file = open_output(out_path);
        sink = &file;
    }
    *sink << (attribution ? "index,detected,user_id,tied,best_ba,runner_up_ba\n" : "index,detected,best_ba\n");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        Watermark w(book.n());
        try {
            w = Watermark::from_hex(lines[i], book.n());
        } catch (const std::exception& e) {
            throw std::runtime_error(batch + " line " + std::to_string(i + 1) + ": " + e.what());
        }
        const AttributionResult r = attribute(w, book, thr);
        hits += r.detected ? 1 : 0;
        *sink << i << ',' << (r.detected ? 1 : 0) << ',';
        if (attribution) {
            *sink << csv_field(r.attributed_user.value_or("")) << ',' << (r.tied ? 1 : 0) << ','
                  << fixed(r.best_ba.value()) << ',' << fixed(r.runner_up_ba.value()) << '\n';
        } else {
            *sink << fixed(r.best_ba.value()) << '\n';
        }
    }
    return hits > 0 ? kOk : kNegative;
}

// ---------------------------------------------------------------------------
// bounds

struct BoundFlags {
    std::size_t n = 64;
    std::string tau = "0.9";
    double beta = 1.0;
    double gamma = 0.0;
    std::string s = "1";
    std::string alpha_min = "0";
    std::string alpha_max = "0";
    bool json = false;
};

int cmd_bounds(const BoundFlags& f, std::ostream& out, std::ostream& err) {
    BoundInputs in;
    in.n = static_cast<std::int64_t>(f.n);
    in.tau = parse_fraction("--tau", f.tau);
    in.beta = f.beta;
    in.gamma = f.gamma;
    in.s = parse_count("--s", f.s);
    in.alpha_min = parse_fraction("--alpha-min", f.alpha_min);
    in.alpha_max = parse_fraction("--alpha-max", f.alpha_max);

    std::optional<BoundResult> tdr;
    if (in.tau.to_double() < in.beta) {
        tdr = tdr_lower_bound(in);
    } else {
        err << "note: the TDR lower bound needs tau < beta; omitted\n";
    }
    const BoundResult tar = tar_lower_bound(in);
    const BoundResult fdr_general = fdr_upper_bound_general(in);
    const BoundResult fdr_indep = fdr_upper_bound_independent(in);
    const bool coincide = detection_implies_attribution(in.n, in.tau, in.alpha_max);

    if (f.json) {
        auto row = [](const BoundResult& r) { return nlohmann::json{{"value", r.value}, {"clamped", r.clamped}}; };
        nlohmann::json j;
        j["tdr_lower"] = tdr ? row(*tdr) : nlohmann::json(nullptr);
        j["tar_lower"] = row(tar);
        j["fdr_upper_general"] = row(fdr_general);
        j["fdr_upper_independent"] = row(fdr_indep);
        j["detection_implies_attribution"] = coincide;
        out << j.dump(2) << '\n';
        return kOk;
    }
    out << "bound,value,clamped\n";
    if (tdr) {
        out << "tdr_lower," << general(tdr->value) << ',' << tdr->clamped << '\n';
    } else {
        out << "tdr_lower,,\n";
    }
    out << "tar_lower," << general(tar.value) << ',' << tar.clamped << '\n'
        << "fdr_upper_general," << general(fdr_general.value) << ',' << fdr_general.clamped << '\n'
        << "fdr_upper_independent," << general(fdr_indep.value) << ',' << fdr_indep.clamped << '\n'
        << "detection_implies_attribution," << coincide << ",\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// simulate / sweep

int cmd_simulate(const ExperimentFlags& flags, const std::string& out_dir, bool force, std::ostream& out,
                 std::ostream& err) {
    const LoadedConfig loaded = flags.resolve();
    std::vector<fs::path> targets;
    if (!out_dir.empty()) {
        const fs::path dir(out_dir);
        targets = {dir / "per_user.csv", dir / "summary.csv", dir / "comparison.csv"};
        for (const auto& t : targets) refuse_overwrite(t, force);
        fs::create_directories(dir);
    }
    const ExperimentReport report = run_experiment(loaded.experiment);
    const BoundComparison cmp = compare_bounds(report);
    write_summary_csv(report, cmp, out);
    if (!targets.empty()) {
        auto per_user = open_output(targets[0]);
        write_per_user_csv(report, per_user);
        auto summary = open_output(targets[1]);
        write_summary_csv(report, cmp, summary);
        auto comparison = open_output(targets[2]);
        write_comparison_csv(cmp, comparison);
    }
    if (cmp.violations > 0) {
        err << "error: " << cmp.violations << " empirical rate(s) missed their theoretical bound\n";
        for (const BoundCheck& row : cmp.rows) {
            if (row.violated) {
                err << "  " << row.subject << ' ' << row.metric << ": empirical " << fixed(row.empirical)
                    << " bound " << general(row.bound) << " tolerance " << fixed(row.tolerance) << '\n';
            }
        }
        return kBoundViolation;
    }
    return kOk;
}

std::vector<std::string> split_values(const std::string& text) {
    std::vector<std::string> values;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) values.push_back(item);
    }
    if (values.empty()) throw UsageError("--values: expected a comma-separated list");
    return values;
}

int cmd_sweep(const ExperimentFlags& flags, const std::string& axis_name, const std::string& values_text,
              const std::string& out_path, bool force, std::ostream& out) {
    const LoadedConfig loaded = flags.resolve();
    const SweepAxis axis = parse_sweep_axis(axis_name);
    const std::vector<std::string> values = split_values(values_text);
    if (!out_path.empty()) refuse_overwrite(out_path, force);
    const std::vector<ExperimentReport> reports = sweep(loaded.experiment, axis, values, loaded.profiles);
    write_sweep_csv(axis, values, reports, out);
    if (!out_path.empty()) {
        auto file = open_output(out_path);
        write_sweep_csv(axis, values, reports, file);
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// bench

int cmd_bench(std::size_t n, const std::string& s_text, std::uint64_t seed, const StrategyFlags& flags,
              std::ostream& out) {
    const std::uint64_t s = parse_count("--s", s_text);
    Codebook book(n);
    std::vector<double> ms;
    ms.reserve(s);
    std::size_t decisions = 0;
    for (std::uint64_t i = 0; i < s; ++i) {
        const SelectionStrategy strategy = flags.resolve(registration_seed(seed, i));
        const auto start = std::chrono::steady_clock::now();
        Selection sel = select_watermark(book, strategy);
        ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
        decisions += sel.decisions;
        book.append("u" + std::to_string(i + 1), sel.watermark);
    }
    std::vector<double> sorted = ms;
    std::sort(sorted.begin(), sorted.end());
    const double total = std::accumulate(ms.begin(), ms.end(), 0.0);
    const double median = sorted.size() % 2 == 1 ? sorted[sorted.size() / 2]
                                                 : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
    out << "metric,value\n"
        << "strategy," << to_string(parse_selection_kind(flags.strategy)) << '\n'
        << "n," << n << '\n'
        << "s," << s << '\n'
        << "mean_ms," << fixed(total / static_cast<double>(s), 4) << '\n'
        << "median_ms," << fixed(median, 4) << '\n'
        << "max_ms," << fixed(sorted.back(), 4) << '\n'
        << "total_s," << fixed(total / 1000.0, 3) << '\n'
        << "decisions," << decisions << '\n';
    if (book.size() >= 2) out << "max_pairwise_ba," << fixed(max_pairwise_ba(book).value()) << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------
// verify: quick oracle cross-checks against the reference implementations.

int cmd_verify(std::uint64_t seed, std::ostream& out) {
    std::size_t failed = 0;
    auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        out << (ok ? "PASS " : "FAIL ") << name << " (" << detail << ")\n";
        failed += ok ? 0 : 1;
    };
    Rng rng = make_rng(seed, Stream::Verify, 0);

    {
        double worst = 0.0;
        std::size_t cases = 0;
        for (std::int64_t n : {1, 7, 16, 33, 64}) {
            for (std::int64_t pct = 5; pct <= 95; pct += 15) {
                const Rational p(pct, 100);
                const std::vector<double> exact = reference::tail_ge_all(n, p);
                for (std::int64_t k = 0; k <= n + 1; ++k) {
                    worst = std::max(worst, std::fabs(binom_tail_ge(n, p.to_double(), k) - exact[k]));
                    ++cases;
                }
            }
        }
        report("binomial tails vs exact rationals", worst <= 1e-12,
               std::to_string(cases) + " cases, max error " + general(worst));
    }

    {
        std::size_t agree = 0;
        std::size_t total = 0;
        for (int inst = 0; inst < 40; ++inst) {
            const std::size_t n = 4 + uniform_index(rng, 7);
            const std::size_t s = 1 + uniform_index(rng, 5);
            Codebook book(n);
            while (book.size() < s) {
                Watermark w = random_select(n, rng);
                if (!book.contains(w)) book.append("u" + std::to_string(book.size() + 1), w);
            }
            const FarthestString brute = brute_force_farthest(book);
            const Watermark init = ~book.watermark(0);
            for (std::size_t m = 0; m <= n; ++m) {
                const bool found = bsta_decision(book, init, static_cast<int>(m), m).has_value();
                agree += found == (m >= brute.m_opt) ? 1 : 0;
                ++total;
            }
        }
        report("BSTA decisions vs brute force", agree == total, std::to_string(agree) + "/" + std::to_string(total));
    }

    {
        std::size_t bad = 0;
        std::size_t found = 0;
        for (int c = 0; c < 2000; ++c) {
            const std::size_t n = 6 + uniform_index(rng, 27);
            Codebook book(n);
            const std::size_t s = 1 + uniform_index(rng, 12);
            while (book.size() < s) {
                Watermark w = random_select(n, rng);
                if (!book.contains(w)) book.append("u" + std::to_string(book.size() + 1), w);
            }
            const std::size_t m = uniform_index(rng, n + 1);
            DecisionOutcome outcome;
            switch (c % 3) {
            case 0: outcome = bsta_decision(book, ~book.watermark(0), static_cast<int>(m), m); break;
            case 1: outcome = nrg_decision(book, ~book.watermark(0), m, rng); break;
            default: outcome = absta_decision(book, 8, m, rng); break;
            }
            if (outcome) {
                ++found;
                bad += reference::max_matched(book, *outcome) > m ? 1 : 0;
            }
        }
        report("solver soundness", bad == 0, std::to_string(found) + " found, " + std::to_string(bad) + " unsound");
    }

    {
        SelectionStrategy strategy;
        strategy.rng_seed = seed;
        const Codebook book = generate_codebook(32, 60, strategy);
        const Rational tau(3, 4);
        const DetectionThreshold thr(tau, 32);
        std::size_t mismatches = 0;
        for (int c = 0; c < 2000; ++c) {
            Watermark w = simulate_watermarked_decode(book.watermark(uniform_index(rng, book.size())), 0.8, rng);
            const AttributionResult fast = attribute(w, book, thr);
            const AttributionResult slow = reference::attribute(w, book, tau);
            const bool same = fast.detected == slow.detected && fast.user_index == slow.user_index &&
                              fast.tied == slow.tied && fast.best_ba == slow.best_ba &&
                              fast.runner_up_ba == slow.runner_up_ba;
            mismatches += same ? 0 : 1;
        }
        const bool pairwise = max_pairwise_ba(book).matched == reference::max_pairwise_matched(book);
        report("attribution vs naive scan", mismatches == 0 && pairwise,
               std::to_string(mismatches) + " mismatches of 2000");
    }

    {
        SelectionStrategy strategy;
        strategy.kind = SelectionKind::Random;
        strategy.rng_seed = seed;
        const Codebook book = generate_codebook(77, 50, strategy);
        std::stringstream buf;
        save_codebook(book, buf);
        report("codebook round trip", load_codebook(buf) == book, "n=77, 50 users");
    }

    return failed == 0 ? kOk : kNegative;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Watermark codebook selection, detection, attribution and bound checks"};
    app.name("wmattr");
    app.require_subcommand(1);

    bool force = false;

    // register
    auto* reg = app.add_subcommand("register", "assign a watermark to a new user");
    std::string reg_codebook;
    std::string reg_user;
    std::size_t reg_n = 64;
    std::uint64_t reg_seed = 0;
    StrategyFlags reg_strategy;
    reg->add_option("--codebook", reg_codebook, "codebook file (created if missing)")->required();
    reg->add_option("--user", reg_user, "new user id")->required();
    reg->add_option("--n", reg_n, "watermark length for a new codebook")->capture_default_str();
    reg->add_option("--seed", reg_seed, "master seed")->required();
    reg_strategy.attach(reg);

    // gen-codebook
    auto* gen = app.add_subcommand("gen-codebook", "register s users u1..us in one go");
    std::string gen_out;
    std::size_t gen_n = 64;
    std::string gen_s = "1000";
    std::uint64_t gen_seed = 0;
    StrategyFlags gen_strategy;
    gen->add_option("--out,--codebook", gen_out, "codebook file to write")->required();
    gen->add_option("--n", gen_n, "watermark length")->capture_default_str();
    gen->add_option("--s", gen_s, "number of users")->capture_default_str();
    gen->add_option("--seed", gen_seed, "master seed")->required();
    gen->add_flag("--force", force, "overwrite an existing codebook");
    gen_strategy.attach(gen);

    // detect / attribute
    struct ScanFlags {
        std::string codebook;
        std::string tau = "0.9";
        std::string decoded;
        std::string batch;
        std::string out;
        bool json = false;
    };
    ScanFlags det;
    ScanFlags att;
    auto add_scan = [&](const char* name, const char* help, ScanFlags& f) {
        auto* cmd = app.add_subcommand(name, help);
        cmd->add_option("--codebook", f.codebook, "codebook file")->required();
        cmd->add_option("--tau", f.tau, "detection threshold")->capture_default_str();
        cmd->add_option("--decoded", f.decoded, "decoded watermark as hex");
        cmd->add_option("--batch", f.batch, "file with one hex-encoded decoded watermark per line");
        cmd->add_option("--out", f.out, "CSV output for --batch (default stdout)");
        cmd->add_flag("--json", f.json, "machine-readable verdict for --decoded");
        cmd->add_flag("--force", force, "overwrite --out");
        return cmd;
    };
    auto* detect_cmd = add_scan("detect", "is the content AI-generated?", det);
    auto* attribute_cmd = add_scan("attribute", "detect and name the generating user", att);

    // bounds
    auto* bounds_cmd = app.add_subcommand("bounds", "theoretical TDR/TAR lower and FDR upper bounds");
    BoundFlags bf;
    bounds_cmd->add_option("--n", bf.n, "watermark length")->capture_default_str();
    bounds_cmd->add_option("--tau", bf.tau, "detection threshold")->capture_default_str();
    bounds_cmd->add_option("--beta", bf.beta, "decoding accuracy of the user")->capture_default_str();
    bounds_cmd->add_option("--gamma", bf.gamma, "bias of unwatermarked bits")->capture_default_str();
    bounds_cmd->add_option("--s", bf.s, "number of users, e.g. 1e8")->capture_default_str();
    bounds_cmd->add_option("--alpha-min", bf.alpha_min, "smallest BA to another watermark")->capture_default_str();
    bounds_cmd->add_option("--alpha-max", bf.alpha_max, "largest BA to another watermark")->capture_default_str();
    bounds_cmd->add_flag("--json", bf.json, "JSON instead of CSV");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo experiment with bound comparison");
    ExperimentFlags sim_flags;
    std::string sim_out;
    sim_flags.attach(sim);
    sim->add_option("--out", sim_out, "directory for per_user.csv, summary.csv, comparison.csv");
    sim->add_flag("--force", force, "overwrite existing outputs");

    // sweep
    auto* swp = app.add_subcommand("sweep", "repeat the experiment along one axis");
    ExperimentFlags swp_flags;
    std::string swp_axis;
    std::string swp_values;
    std::string swp_out;
    swp_flags.attach(swp);
    swp->add_option("--axis", swp_axis, "s | n | tau | strategy | postprocess")->required();
    swp->add_option("--values", swp_values, "comma-separated values")->required();
    swp->add_option("--out", swp_out, "CSV file (also printed to stdout)");
    swp->add_flag("--force", force, "overwrite --out");

    // bench
    auto* bench = app.add_subcommand("bench", "time per-watermark selection");
    std::size_t bench_n = 64;
    std::string bench_s = "1000";
    std::uint64_t bench_seed = 0;
    StrategyFlags bench_strategy;
    bench->add_option("--n", bench_n, "watermark length")->capture_default_str();
    bench->add_option("--s", bench_s, "number of users")->capture_default_str();
    bench->add_option("--seed", bench_seed, "master seed")->required();
    bench_strategy.attach(bench);

    // verify
    auto* verify = app.add_subcommand("verify", "cross-check fast paths against reference implementations");
    std::uint64_t verify_seed = 1;
    verify->add_option("--seed", verify_seed, "seed for the random instances")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kError;
    }

    try {
        if (*reg) return cmd_register(reg_codebook, reg_user, reg_n, reg_seed, reg_strategy, out);
        if (*gen) return cmd_gen_codebook(gen_out, gen_n, gen_s, gen_seed, gen_strategy, force, out);
        if (*detect_cmd) {
            return cmd_scan(false, det.codebook, det.tau, det.decoded, det.batch, det.out, force, det.json, out);
        }
        if (*attribute_cmd) {
            return cmd_scan(true, att.codebook, att.tau, att.decoded, att.batch, att.out, force, att.json, out);
        }
        if (*bounds_cmd) return cmd_bounds(bf, out, err);
        if (*sim) return cmd_simulate(sim_flags, sim_out, force, out, err);
        if (*swp) return cmd_sweep(swp_flags, swp_axis, swp_values, swp_out, force, out);
        if (*bench) return cmd_bench(bench_n, bench_s, bench_seed, bench_strategy, out);
        if (*verify) return cmd_verify(verify_seed, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kError;
    }
    return kError;
}

} // namespace wmattr::cli
