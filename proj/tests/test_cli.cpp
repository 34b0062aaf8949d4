#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "helpers.hpp"
#include "wmattr/channel.hpp"
#include "wmattr/codebook.hpp"
#include "wmattr/reference.hpp"

using namespace wmattr;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "wmattr");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    Result r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

/// Fresh directory under the system temp dir, removed on scope exit.
struct TempDir {
    fs::path path;

    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("wmattr_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::map<std::string, std::string> metric_rows(const std::string& csv) {
    std::map<std::string, std::string> rows;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (comma != std::string::npos) rows[line.substr(0, comma)] = line.substr(comma + 1);
    }
    return rows;
}

std::string six(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

TEST_CASE("default config reproduces the golden summary") {
    const std::string root = WMATTR_SOURCE_DIR;
    const Result r = run({"simulate", "--config", root + "/configs/default.ini"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out == slurp(root + "/tests/golden/default_summary.csv"));
}

TEST_CASE("simulate writes its three csv files and refuses to overwrite them") {
    TempDir dir("simulate");
    const std::vector<std::string> args = {"simulate", "--n", "32", "--tau", "0.85", "--s", "20", "--samples", "10",
                                           "--fdr-samples", "100", "--seed", "5", "--out", dir / "run"};
    const Result first = run(args);
    REQUIRE(first.code == cli::kOk);
    for (const std::string file : {"per_user.csv", "summary.csv", "comparison.csv"}) {
        CHECK(fs::exists(dir / ("run/" + file)));
    }
    CHECK(slurp(dir / "run/summary.csv") == first.out);
    const std::string per_user = slurp(dir / "run/per_user.csv");
    CHECK(per_user.rfind("user_id,beta_hat,tdr,tar,tdr_bound,tar_bound,alpha_min,alpha_max\n", 0) == 0);

    CHECK(run(args).code == cli::kError);
    std::vector<std::string> forced = args;
    forced.push_back("--force");
    const Result again = run(forced);
    CHECK(again.code == cli::kOk);
    CHECK(again.out == first.out);
}

TEST_CASE("a seed is required") {
    const Result r = run({"simulate", "--s", "10"});
    CHECK(r.code == cli::kError);
    CHECK(r.err.find("seed") != std::string::npos);
    CHECK(run({"register", "--codebook", "x.wmdb", "--user", "a"}).code == cli::kError);
}

TEST_CASE("register grows a codebook") {
    TempDir dir("register");
    const std::string book = dir / "book.wmdb";
    const Result first = run({"register", "--codebook", book, "--user", "alice", "--n", "64", "--seed", "3"});
    REQUIRE(first.code == cli::kOk);
    CHECK(first.out.find("codebook_size 1\n") != std::string::npos);
    CHECK(first.out.find("max_ba_to_existing n/a\n") != std::string::npos);

    const Result second = run({"register", "--codebook", book, "--user", "bob", "--seed", "3"});
    REQUIRE(second.code == cli::kOk);
    CHECK(second.out.find("codebook_size 2\n") != std::string::npos);
    CHECK(load_codebook_file(book).size() == 2);

    CHECK(run({"register", "--codebook", book, "--user", "bob", "--seed", "3"}).code == cli::kError);
    CHECK(load_codebook_file(book).size() == 2);

    // Complement of the only watermark: 0000 -> 1111, which is f0 in hex.
    const std::string small = dir / "small.wmdb";
    save_codebook_file(testing::book_of({"0000"}), small);
    const Result comp = run({"register", "--codebook", small, "--user", "u2", "--seed", "1", "--strategy", "bsta"});
    REQUIRE(comp.code == cli::kOk);
    CHECK(comp.out.find("watermark f0\n") != std::string::npos);
    CHECK(comp.out.find("achieved_m 0\n") != std::string::npos);
}

TEST_CASE("sequential registration matches gen-codebook") {
    TempDir dir("sequential");
    const std::string one_by_one = dir / "seq.wmdb";
    for (int i = 1; i <= 5; ++i) {
        REQUIRE(run({"register", "--codebook", one_by_one, "--user", "u" + std::to_string(i), "--n", "32", "--seed",
                     "11"})
                    .code == cli::kOk);
    }
    const std::string batch = dir / "gen.wmdb";
    REQUIRE(run({"gen-codebook", "--out", batch, "--n", "32", "--s", "5", "--seed", "11"}).code == cli::kOk);
    CHECK(slurp(one_by_one) == slurp(batch));
    CHECK(run({"gen-codebook", "--out", batch, "--n", "32", "--s", "5", "--seed", "11"}).code == cli::kError);
}

TEST_CASE("a held lock blocks registration") {
    TempDir dir("lock");
    const std::string book = dir / "book.wmdb";
    { std::ofstream lock(book + ".lock"); }
    const Result r = run({"register", "--codebook", book, "--user", "a", "--seed", "1"});
    CHECK(r.code == cli::kError);
    CHECK(r.err.find("lock") != std::string::npos);
    CHECK_FALSE(fs::exists(book));
}

TEST_CASE("detect and attribute exit codes") {
    TempDir dir("detect");
    const std::string book = dir / "book.wmdb";
    REQUIRE(run({"register", "--codebook", book, "--user", "alice", "--n", "64", "--seed", "9"}).code == cli::kOk);
    const Watermark mine = load_codebook_file(book).watermark(0);

    const Result hit = run({"attribute", "--codebook", book, "--decoded", mine.to_hex()});
    CHECK(hit.code == cli::kOk);
    CHECK(hit.out.find("user alice\n") != std::string::npos);
    CHECK(run({"detect", "--codebook", book, "--decoded", mine.to_hex()}).code == cli::kOk);

    const Result miss = run({"attribute", "--codebook", book, "--decoded", (~mine).to_hex(), "--tau", "0.9"});
    CHECK(miss.code == cli::kNegative);
    CHECK(miss.out.find("detected no\n") != std::string::npos);

    CHECK(run({"detect", "--codebook", book, "--decoded", "zz"}).code == cli::kError);
    CHECK(run({"detect", "--codebook", book, "--decoded", "abcd"}).code == cli::kError);
    CHECK(run({"detect", "--codebook", book}).code == cli::kError);
    CHECK(run({"detect", "--codebook", book, "--decoded", mine.to_hex(), "--tau", "0.5"}).code == cli::kError);

    const Result js = run({"attribute", "--codebook", book, "--decoded", mine.to_hex(), "--json"});
    CHECK(js.out.find("\"user_id\":\"alice\"") != std::string::npos);
}

TEST_CASE("batch attribution matches the reference scan") {
    TempDir dir("batch");
    const std::string book_path = dir / "book.wmdb";
    REQUIRE(run({"gen-codebook", "--out", book_path, "--n", "64", "--s", "50", "--seed", "4", "--strategy", "random"})
                .code == cli::kOk);
    const Codebook book = load_codebook_file(book_path);

    Rng rng = make_rng(77, Stream::Verify, 0);
    std::ofstream batch(dir / "decoded.txt");
    std::string expected = "index,detected,user_id,tied,best_ba,runner_up_ba\n";
    for (int i = 0; i < 10'000; ++i) {
        const Watermark w = i % 3 == 0 ? random_select(64, rng)
                                       : simulate_watermarked_decode(book.watermark(uniform_index(rng, 50)), 0.9, rng);
        batch << w.to_hex() << '\n';
        const AttributionResult r = reference::attribute(w, book, Rational(9, 10));
        expected += std::to_string(i) + ',' + (r.detected ? "1" : "0") + ',' + r.attributed_user.value_or("") + ',' +
                    (r.tied ? "1" : "0") + ',' + six(r.best_ba.value()) + ',' + six(r.runner_up_ba.value()) + '\n';
    }
    batch.close();

    const Result r = run({"attribute", "--codebook", book_path, "--batch", dir / "decoded.txt"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out == expected);

    const std::vector<std::string> to_file = {"attribute", "--codebook", book_path, "--batch",
                                              dir / "decoded.txt", "--out", dir / "out.csv"};
    REQUIRE(run(to_file).code == cli::kOk);
    CHECK(slurp(dir / "out.csv") == expected);
    CHECK(run(to_file).code == cli::kError);
}

TEST_CASE("bounds at a hundred million users") {
    const Result r = run({"bounds", "--n", "64", "--tau", "0.9", "--beta", "0.99", "--gamma", "0.05", "--s", "1e8",
                          "--alpha-min", "0.2", "--alpha-max", "0.8"});
    REQUIRE(r.code == cli::kOk);
    const auto rows = metric_rows(r.out);
    CHECK(r.out.rfind("bound,value,clamped\n", 0) == 0);
    CHECK(std::stod(rows.at("tdr_lower")) >= 0.9999);
    CHECK(std::stod(rows.at("tar_lower")) >= 0.9999);
    const double fdr = std::stod(rows.at("fdr_upper_independent"));
    CHECK(fdr >= 0.055);
    CHECK(fdr <= 0.065);

    const Result no_tdr = run({"bounds", "--n", "64", "--tau", "0.9", "--beta", "0.85"});
    CHECK(no_tdr.code == cli::kOk);
    CHECK(no_tdr.out.find("tdr_lower,,\n") != std::string::npos);
    CHECK(no_tdr.err.find("tau < beta") != std::string::npos);
}

TEST_CASE("sweep output") {
    TempDir dir("sweep");
    const Result r = run({"sweep", "--axis", "tau", "--values", "0.8,0.9", "--n", "32", "--s", "10", "--samples", "5",
                          "--fdr-samples", "50", "--seed", "2", "--out", dir / "sweep.csv"});
    REQUIRE(r.code == cli::kOk);
    CHECK(r.out.rfind("tau,max_pairwise_ba", 0) == 0);
    CHECK(slurp(dir / "sweep.csv") == r.out);
    CHECK(run({"sweep", "--axis", "colour", "--values", "1", "--seed", "2"}).code == cli::kError);
}

TEST_CASE("bench ranks random selection cheapest") {
    const Result random = run({"bench", "--strategy", "random", "--n", "64", "--s", "200", "--seed", "1"});
    const Result absta = run({"bench", "--strategy", "absta", "--n", "64", "--s", "200", "--seed", "1"});
    REQUIRE(random.code == cli::kOk);
    REQUIRE(absta.code == cli::kOk);
    CHECK(std::stod(metric_rows(random.out).at("mean_ms")) < std::stod(metric_rows(absta.out).at("mean_ms")));
    CHECK(std::stod(metric_rows(absta.out).at("max_pairwise_ba")) <
          std::stod(metric_rows(random.out).at("max_pairwise_ba")));
}

TEST_CASE("verify and usage errors") {
    const Result v = run({"verify"});
    CHECK(v.code == cli::kOk);
    CHECK(v.out.find("FAIL") == std::string::npos);
    CHECK(run({}).code == cli::kError);
    CHECK(run({"frobnicate"}).code == cli::kError);
    CHECK(run({"--help"}).code == cli::kOk);
}
