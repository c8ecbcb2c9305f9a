#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssanet/cli/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "ssanet");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = ssanet::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string last_line(const std::string& text) {
    std::istringstream in(text);
    std::string line, last;
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    return last;
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        root_ = fs::temp_directory_path() /
                ("ssanet_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }
    std::string path(const std::string& leaf) const { return (root_ / leaf).string(); }

    fs::path root_;
};

}  // namespace

TEST_F(CliTest, SpectrumWritesSignalsSpectraAndReport) {
    const Result r = run({"spectrum", "--length", "64", "--seed", "7", "--out", path("spec")});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* name : {"input", "gaussian", "comb", "decimated", "upsampled", "ssa"}) {
        EXPECT_TRUE(fs::exists(path("spec") + "/" + name + "_signal.csv")) << name;
        EXPECT_TRUE(fs::exists(path("spec") + "/" + name + "_spectrum.csv")) << name;
    }
    const auto report = nlohmann::json::parse(read_file(path("spec/report.json")));
    EXPECT_LT(report["dist_ssa_gauss"].get<double>(), report["dist_comb_gauss"].get<double>());
    EXPECT_NE(r.err.find("config: {\"command\":\"spectrum\""), std::string::npos);

    ASSERT_EQ(run({"spectrum", "--length", "64", "--seed", "7", "--out", path("again")}).code, 0);
    for (const auto& entry : fs::directory_iterator(path("spec")))
        EXPECT_EQ(read_file(entry.path()), read_file(fs::path(path("again")) / entry.path().filename()))
            << entry.path().filename();
}

TEST_F(CliTest, SpectrumRejectsOddLength) {
    const Result r = run({"spectrum", "--length", "63", "--out", path("spec")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("even"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(path("spec")));
}

TEST_F(CliTest, UsageErrorsExitOne) {
    EXPECT_EQ(run({"spectrum", "--bogus", "1", "--out", path("x")}).code, 1);
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"train", "--variant", "nope", "--data", path("d"), "--out", path("m")}).code, 1);
    EXPECT_EQ(run({"gradcheck", "--ops", "conv2d,warp"}).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, SynthTrainEvalPipeline) {
    ASSERT_EQ(run({"synth", "--n", "4", "--size", "32", "--seed", "1", "--out", path("data")}).code, 0);
    EXPECT_EQ(fs::directory_entry(path("data/images/synth_003.pgm")).exists(), true);

    const Result t = run({"train", "--data", path("data"), "--train-count", "2", "--epochs", "1", "--seed", "2",
                          "--out", path("model.ckpt")});
    ASSERT_EQ(t.code, 0) << t.err;
    EXPECT_TRUE(fs::exists(path("model.ckpt")));
    EXPECT_EQ(line_count(path("model.ckpt.history.csv")), 2u);

    const Result e = run({"eval", "--ckpt", path("model.ckpt"), "--data", path("data"), "--train-count", "2", "--out",
                          path("eval")});
    ASSERT_EQ(e.code, 0) << e.err;
    const auto summary = nlohmann::json::parse(read_file(path("eval/summary.json")));
    std::istringstream last(last_line(e.out));
    for (const char* key : {"pr_auc", "roc_auc", "best_dice"}) {
        const double v = summary[key].get<double>();
        EXPECT_TRUE(std::isfinite(v)) << key;
        EXPECT_GE(v, 0.0) << key;
        EXPECT_LE(v, 1.0) << key;
        double printed = -1.0;
        last >> printed;
        EXPECT_NEAR(printed, v, 1e-9) << key;
    }
    EXPECT_EQ(line_count(path("eval/per_image.csv")), 3u);
}

TEST_F(CliTest, GradcheckPrintsTableAndPasses) {
    const Result r = run({"gradcheck", "--ops", "conv2d,relu,max_pool2d"});
    ASSERT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_EQ(r.out.rfind("op max_rel_error checked skipped status\n", 0), 0u);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST_F(CliTest, AblateWritesOneRowPerVariant) {
    ASSERT_EQ(run({"synth", "--n", "4", "--size", "32", "--seed", "3", "--out", path("data")}).code, 0);
    const Result r = run({"ablate", "--data", path("data"), "--variants", "ssa2,dec,driu", "--epochs", "1", "--out",
                          path("ablation.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(path("ablation.csv"));
    std::string header;
    std::getline(in, header);
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        rows.push_back(cells);
    }
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0][0], "ssa2");
    EXPECT_EQ(rows[1][0], "dec");
    EXPECT_EQ(rows[0][4], rows[1][4]);
    EXPECT_NE(rows[0][4], rows[2][4]);
    for (const auto& row : rows) EXPECT_EQ(row.back(), "ok");
}

TEST_F(CliTest, DataErrorsExitTwoAndLeaveNothing) {
    const Result missing = run({"train", "--data", path("absent"), "--epochs", "1", "--out", path("m.ckpt")});
    EXPECT_EQ(missing.code, 2);
    EXPECT_FALSE(fs::exists(path("m.ckpt")));

    std::ofstream(path("junk.ckpt")) << "not a checkpoint";
    ASSERT_EQ(run({"synth", "--n", "2", "--size", "32", "--out", path("data")}).code, 0);
    const Result bad = run({"eval", "--ckpt", path("junk.ckpt"), "--data", path("data"), "--out", path("eval")});
    EXPECT_EQ(bad.code, 2);
    EXPECT_FALSE(fs::exists(path("eval")));

    const Result split = run({"train", "--data", path("data"), "--train-count", "2", "--out", path("m.ckpt")});
    EXPECT_EQ(split.code, 1);
    EXPECT_FALSE(fs::exists(path("m.ckpt")));
}
