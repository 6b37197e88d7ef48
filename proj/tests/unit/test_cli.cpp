#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "itscale/csv.hpp"
#include "itscale/judge.hpp"
#include "itscale_cli/cli.hpp"

namespace fs = std::filesystem;
using itscale::cli::parse_grid;
using itscale::cli::parse_int_grid;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "itscale");
    std::ostringstream out, err;
    const int code = itscale::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path tmp_dir() {
    const fs::path p = fs::path(ITSCALE_TEST_TMP);
    fs::create_directories(p);
    return p;
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) rows.push_back(itscale::split_csv_line(line));
    return rows;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

const std::vector<std::string> kSmall = {"--n-outer", "40", "--n-inner", "5"};

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST(ParseGrid, Forms) {
    EXPECT_EQ(parse_grid("1,2.5,-3"), (std::vector<double>{1, 2.5, -3}));
    EXPECT_EQ(parse_grid("lin:0:1:3"), (std::vector<double>{0, 0.5, 1}));
    const auto lg = parse_grid("log:1:100:3");
    EXPECT_NEAR(lg[1], 10.0, 1e-12);
    EXPECT_EQ(parse_grid("circle:4").size(), 4u);
    EXPECT_EQ(parse_int_grid("log:1:10:10"), (std::vector<int>{1, 2, 3, 4, 5, 6, 8, 10}));
    EXPECT_ANY_THROW(parse_grid("lin:0:1"));
    EXPECT_ANY_THROW(parse_grid("1,x"));
    EXPECT_ANY_THROW(parse_int_grid("0,1"));
}

TEST(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"sweep-k", "--bogus"}).code, 2);
    EXPECT_EQ(run({"sweep-k", "--mode", "fast"}).code, 2);
    EXPECT_EQ(run({"sweep-k", "--k-grid", "0,3", "--out", "-"}).code, 2);
    EXPECT_EQ(run({"polar-map", "--d", "3", "--out", "-"}).code, 2);
    EXPECT_EQ(run({"judge", "--out", "-"}).code, 2);
    EXPECT_EQ(run({"ridge", "--gamma", "0", "--out", "-"}).code, 2);
}

TEST(Cli, RuntimeErrors) {
    EXPECT_EQ(run({"judge", "--records", (tmp_dir() / "missing.jsonl").string(), "--out", "-"}).code, 1);
    EXPECT_EQ(run({"ridge", "--n", "5", "--d", "10", "--sigma", "0", "--out", "-"}).code, 1);
}

TEST(Cli, RidgeWritesCsvAndManifest) {
    const fs::path out = tmp_dir() / "ridge.csv";
    const Result r = run({"ridge", "--out", out.string(), "--n", "1000"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_csv(slurp(out));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0][7], "R");
    const auto manifest = nlohmann::json::parse(slurp(out.string() + ".manifest.json"));
    EXPECT_EQ(manifest["command"], "ridge");
    EXPECT_EQ(manifest["config"]["n"], 1000);
    EXPECT_EQ(manifest["details"]["noise_validity_factor"], 0.01);
}

TEST(Cli, ConfigFileAndOverrides) {
    const fs::path cfg = tmp_dir() / "model.cfg";
    std::ofstream(cfg) << "d = 4\nn = 80\nsigma = 0.5\n";
    const Result r = run({"ridge", "--config", cfg.string(), "--n", "40", "--out", "-"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_csv(r.out);
    EXPECT_EQ(rows[1][0], "4");
    EXPECT_EQ(rows[1][1], "40");
}

TEST(Cli, DefaultOutputDirectoryFromEnvironment) {
    const fs::path dir = tmp_dir() / "envout";
    fs::remove_all(dir);
    setenv(itscale::cli::kOutDirEnv, dir.c_str(), 1);
    const Result r = run({"ridge"});
    unsetenv(itscale::cli::kOutDirEnv);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "ridge.csv"));
    EXPECT_TRUE(fs::exists(dir / "ridge.csv.manifest.json"));
}

TEST(Cli, SweepKColumns) {
    const Result r = run(cat({"sweep-k", "--out", "-", "--k-grid", "1,2,5", "--c-grid", "0,2"}, kSmall));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_csv(r.out);
    ASSERT_EQ(rows.size(), 1u + 6u);
    for (const char* col : {"k", "c", "delta", "stderr", "theory_highT", "mode", "seed"}) {
        EXPECT_NE(std::find(rows[0].begin(), rows[0].end(), col), rows[0].end()) << col;
    }
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].size(), rows[0].size());
}

TEST(Cli, PolarMapLabels) {
    const Result r = run(cat({"polar-map", "--out", "-", "--c-grid", "1e-4,4e-4,8e-4", "--theta-grid", "circle:3",
                              "--k-grid", "1,4,16"},
                             kSmall));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_csv(r.out);
    ASSERT_EQ(rows.size(), 10u);
    const auto label = std::find(rows[0].begin(), rows[0].end(), "label") - rows[0].begin();
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_TRUE(rows[i][label] == "monotone" || rows[i][label] == "non_monotone") << rows[i][label];
    }
}

TEST(Cli, SameSeedSameBytesAcrossThreads) {
    const auto args = cat({"sweep-t", "--out", "-", "--seed", "7", "--k-grid", "5", "--t-grid", "log:1:100:4",
                           "--c-grid", "0,20"},
                          kSmall);
    const Result a = run(cat(args, {"--threads", "1"}));
    const Result b = run(cat(args, {"--threads", "3"}));
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    const Result c = run(cat(cat(args, {"--threads", "1"}), {"--seed", "8"}));
    EXPECT_NE(a.out, c.out);
}

TEST(Cli, JudgeAccuracyFlag) {
    const fs::path rec = tmp_dir() / "records.jsonl";
    {
        std::ofstream f(rec);
        itscale::write_records(f, itscale::synthetic_records({.n_questions = 10, .samples_per_question = 4}, 3));
    }
    const Result d = run({"judge", "--records", rec.string(), "--k-grid", "1,4", "--out", "-"});
    const Result a = run({"judge", "--records", rec.string(), "--k-grid", "1,4", "--accuracy", "--out", "-"});
    ASSERT_EQ(d.code, 0) << d.err;
    ASSERT_EQ(a.code, 0) << a.err;
    const auto rd = read_csv(d.out), ra = read_csv(a.out);
    EXPECT_EQ(rd[0][3], "delta");
    EXPECT_EQ(ra[0][3], "accuracy");
    EXPECT_DOUBLE_EQ(std::stod(rd[1][3]), -std::stod(ra[1][3]));
}
