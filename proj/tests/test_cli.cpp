#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "app.hpp"
#include "lightfr/random.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::initializer_list<std::string> args) {
    std::vector<std::string> owned{"lightfr"};
    owned.insert(owned.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : owned) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = lightfr::app::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

class Cli : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        root_ = fs::temp_directory_path() / "lightfr_test_cli";
        fs::remove_all(root_);
        fs::create_directories(root_);
        lightfr::Rng rng(5);
        std::ofstream out(root_ / "ratings.txt");
        for (int u = 0; u < 40; ++u)
            for (int t = 0; t < 12; ++t) out << u << ' ' << rng.below(60) << ' ' << 1 + rng.below(5) << ' ' << t << '\n';
    }

    static std::string data() { return (root_ / "ratings.txt").string(); }
    static std::string dir(const std::string& name) { return (root_ / name).string(); }

    static inline fs::path root_;
};

}  // namespace

TEST_F(Cli, PrepareWritesSplitsAndIsIdempotent) {
    auto r = run({"prepare", "--data", data(), "--seed", "1", "--out", dir("prep")});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"train.csv", "validation.csv", "test.csv", "split.csv", "stats.json", "manifest.json"})
        EXPECT_TRUE(fs::exists(root_ / "prep" / f)) << f;
    const auto stats = read_json(root_ / "prep" / "stats.json");
    EXPECT_EQ(stats["n"], 40);
    const auto first = slurp(root_ / "prep" / "split.csv");
    const auto manifest = slurp(root_ / "prep" / "manifest.json");
    ASSERT_EQ(run({"prepare", "--data", data(), "--seed", "1", "--out", dir("prep")}).code, 0);
    EXPECT_EQ(slurp(root_ / "prep" / "split.csv"), first);
    EXPECT_EQ(slurp(root_ / "prep" / "manifest.json"), manifest);
}

TEST_F(Cli, MissingFileFailsWithPath) {
    const auto r = run({"prepare", "--data", "/nonexistent/ratings.txt", "--seed", "1", "--out", dir("missing")});
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.err.find("/nonexistent/ratings.txt"), std::string::npos);
}

TEST_F(Cli, SeedIsMandatory) {
    const auto r = run({"prepare", "--data", data(), "--out", dir("noseed")});
    EXPECT_NE(r.code, 0);
}

TEST_F(Cli, TrainEveryModel) {
    for (const std::string model : {"lightfr", "lightfr_para", "lightfr_init", "random", "fedmf_real"}) {
        const auto out = dir("train_" + model);
        const auto r = run({"train", "--data", data(), "--seed", "3", "--model", model, "--rounds", "3", "--f", "16",
                            "--lambda", "0.05", "--mf-epochs", "3", "--negatives", "20", "--workers", "2", "--out", out});
        ASSERT_EQ(r.code, 0) << model << ": " << r.err;
        const auto s = read_json(fs::path(out) / "summary.json");
        for (const char* key : {"model", "dataset", "f", "T", "E", "p", "lambda", "hr_at_10", "ndcg_at_10",
                                "upload_bytes_total", "download_bytes_total", "storage_bytes", "seed"})
            EXPECT_TRUE(s.contains(key)) << model << " lacks " << key;
        EXPECT_EQ(s["model"], model);
        if (model == "lightfr" || model == "lightfr_para") {
            std::ifstream csv(fs::path(out) / "metrics.csv");
            std::string line;
            std::size_t rows = 0;
            while (std::getline(csv, line)) ++rows;
            EXPECT_EQ(rows, 4u) << model;  // header + T rows
        }
    }
}

TEST_F(Cli, TrainIsDeterministic) {
    for (const char* name : {"det_a", "det_b"})
        ASSERT_EQ(run({"train", "--data", data(), "--seed", "9", "--negatives", "20", "--rounds", "2", "--f", "8", "--out", dir(name)}).code, 0);
    EXPECT_EQ(slurp(root_ / "det_a" / "model.lfrc"), slurp(root_ / "det_b" / "model.lfrc"));
    EXPECT_EQ(slurp(root_ / "det_a" / "metrics.csv"), slurp(root_ / "det_b" / "metrics.csv"));
}

TEST_F(Cli, EvaluateOracleAndCheckpoint) {
    auto r = run({"evaluate", "--data", data(), "--seed", "1", "--negatives", "20", "--scorer", "oracle", "--out", dir("eval_oracle")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_json(root_ / "eval_oracle" / "evaluation.json")["hr_at_10"], 1.0);

    ASSERT_EQ(run({"train", "--data", data(), "--seed", "4", "--negatives", "20", "--rounds", "2", "--f", "8", "--out", dir("eval_src")}).code, 0);
    r = run({"evaluate", "--data", data(), "--seed", "4", "--negatives", "20", "--checkpoint", dir("eval_src") + "/model.lfrc", "--out",
             dir("eval_model")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto trained = read_json(root_ / "eval_src" / "summary.json");
    const auto evaluated = read_json(root_ / "eval_model" / "evaluation.json");
    EXPECT_EQ(trained["hr_at_10"], evaluated["hr_at_10"]);

    r = run({"evaluate", "--data", data(), "--seed", "4", "--negatives", "20", "--checkpoint", dir("nope.lfrc"), "--out", dir("eval_bad")});
    EXPECT_NE(r.code, 0);
}

TEST_F(Cli, SweepBenchPrivacy) {
    auto r = run({"sweep", "--data", data(), "--seed", "2", "--negatives", "20", "--rounds", "1", "--axis", "f", "--values", "8", "16", "32",
                  "64", "--out", dir("sweep")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream csv(root_ / "sweep" / "sweep_f.csv");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(csv, line)) ++rows;
    EXPECT_EQ(rows, 5u);

    r = run({"bench", "--seed", "1", "--m", "100", "1000", "--repetitions", "1", "--queries", "1", "--out", dir("bench")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(root_ / "bench" / "bench_inference.csv"));
    const auto cost = read_json(root_ / "bench" / "cost.json");
    EXPECT_TRUE(cost.contains("models"));

    r = run({"privacy", "--seed", "1", "--trials", "50", "--out", dir("privacy")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto p = read_json(root_ / "privacy" / "privacy.json");
    EXPECT_TRUE(p.dump().find("ambiguity_rate") != std::string::npos);
}

TEST_F(Cli, ConfigFileAndUnknownKeys) {
    {
        std::ofstream cfg(root_ / "cfg.json");
        cfg << json{{"data_path", data()}, {"seed", 7}, {"out", dir("cfg_out")}}.dump();
        std::ofstream bad(root_ / "bad.json");
        bad << json{{"data_path", data()}, {"seed", 7}, {"bogus", 1}}.dump();
    }
    EXPECT_EQ(run({"prepare", "--config", dir("cfg.json")}).code, 0);
    EXPECT_TRUE(fs::exists(root_ / "cfg_out" / "stats.json"));
    EXPECT_NE(run({"prepare", "--config", dir("bad.json")}).code, 0);
}
