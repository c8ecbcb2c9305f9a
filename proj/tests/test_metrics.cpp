#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "oracles.hpp"
#include "ssanet/common/csv.hpp"
#include "ssanet/common/error.hpp"
#include "ssanet/common/rng.hpp"
#include "ssanet/metrics/metrics.hpp"

using namespace ssanet;
using namespace ssanet::metrics;
using engine::Tensor;

namespace {

Tensor row(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor({1, 1, 1, n}, std::move(v));
}

std::vector<double> vec(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

struct Sample {
    Tensor prob, gt, fov;
};

// Scores quantized to k/255 so that they coincide with the default thresholds.
Sample random_sample(std::size_t n, std::uint64_t seed, double positive_rate = 0.3) {
    Rng rng(seed);
    Sample s{Tensor({1, 1, 1, n}), Tensor({1, 1, 1, n}), Tensor({1, 1, 1, n})};
    for (std::size_t i = 0; i < n; ++i) {
        s.prob[i] = static_cast<double>(rng.uniform_int(0, 255)) / 255.0;
        s.gt[i] = rng.uniform() < positive_rate ? 1.0 : 0.0;
        s.fov[i] = rng.uniform() < 0.8 ? 1.0 : 0.0;
    }
    return s;
}

// P(score_pos > score_neg) + P(tie)/2 over FOV pixels.
double mann_whitney(const Sample& s) {
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < s.prob.size(); ++i) {
        if (s.fov[i] != 1.0 || s.gt[i] != 1.0) continue;
        for (std::size_t j = 0; j < s.prob.size(); ++j) {
            if (s.fov[j] != 1.0 || s.gt[j] != 0.0) continue;
            pairs += 1.0;
            wins += s.prob[i] > s.prob[j] ? 1.0 : (s.prob[i] == s.prob[j] ? 0.5 : 0.0);
        }
    }
    return wins / pairs;
}

}  // namespace

TEST(Dice, Cases) {
    EXPECT_EQ(dice(5, 0, 0), 1.0);
    EXPECT_EQ(dice(0, 3, 2), 0.0);
    EXPECT_EQ(dice(1, 1, 1), 0.5);
    const double p = 0.5, r = 0.5;
    EXPECT_EQ(dice(1, 1, 1), 2 * p * r / (p + r));
    EXPECT_EQ(dice(0, 0, 0), 1.0);
}

TEST(UniformThresholds, Levels) {
    const auto t = uniform_thresholds();
    ASSERT_EQ(t.size(), 256u);
    EXPECT_EQ(t.front(), 0.0);
    EXPECT_EQ(t.back(), 1.0);
    EXPECT_EQ(t[51], 51.0 / 255.0);
    EXPECT_THROW(uniform_thresholds(1), InvalidArgument);
}

TEST(SweepCurves, PerfectAndInverted) {
    const Tensor gt = row({1, 0, 1, 0, 0, 1});
    const Tensor fov = row({1, 1, 1, 1, 1, 1});
    const MetricsReport perfect = sweep_curves(gt, gt, fov);
    EXPECT_EQ(perfect.roc_auc, 1.0);
    EXPECT_EQ(perfect.best_dice, 1.0);
    EXPECT_EQ(perfect.pr_auc, 1.0);

    Tensor inverted = gt;
    for (double& v : inverted.values()) v = 1.0 - v;
    EXPECT_EQ(sweep_curves(inverted, gt, fov).roc_auc, 0.0);
}

TEST(SweepCurves, FourPixelHandExample) {
    const Tensor prob = row({0.9, 0.8, 0.3, 0.1});
    const Tensor gt = row({1, 0, 1, 0});
    const Tensor fov = row({1, 1, 1, 1});
    const MetricsReport r = sweep_curves(prob, gt, fov, {0.2, 0.5, 0.85});
    ASSERT_EQ(r.pr_curve.size(), 3u);
    const CurvePoint& mid = r.pr_curve[1];
    EXPECT_EQ(mid.threshold, 0.5);
    EXPECT_EQ(mid.tp, 1u);
    EXPECT_EQ(mid.fp, 1u);
    EXPECT_EQ(mid.fn, 1u);
    EXPECT_EQ(mid.tn, 1u);
    EXPECT_EQ(dice(mid.tp, mid.fp, mid.fn), 0.5);
    const oracle::Counts c = oracle::confusion(vec(prob), vec(gt), vec(fov), 0.5);
    EXPECT_EQ(c.tp, 1u);
    EXPECT_EQ(c.fp, 1u);
    EXPECT_EQ(c.fn, 1u);
    EXPECT_EQ(c.tn, 1u);
}

TEST(SweepCurves, CountsMatchBruteForce) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Sample s = random_sample(500, seed);
        const auto thresholds = uniform_thresholds();
        const MetricsReport r = sweep_curves(s.prob, s.gt, s.fov, thresholds);
        for (std::size_t i = 0; i < thresholds.size(); ++i) {
            const oracle::Counts c = oracle::confusion(vec(s.prob), vec(s.gt), vec(s.fov), thresholds[i]);
            const CurvePoint& p = r.roc_curve[i];
            ASSERT_EQ(p.tp, c.tp);
            ASSERT_EQ(p.fp, c.fp);
            ASSERT_EQ(p.tn, c.tn);
            ASSERT_EQ(p.fn, c.fn);
        }
    }
}

TEST(SweepCurves, RocAucEqualsRankStatistic) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Sample s = random_sample(400, seed + 100);
        EXPECT_NEAR(sweep_curves(s.prob, s.gt, s.fov).roc_auc, mann_whitney(s), 1e-12);
    }
}

TEST(SweepCurves, RatesMonotoneAndDiceIsF1) {
    const Sample s = random_sample(2000, 7);
    const MetricsReport r = sweep_curves(s.prob, s.gt, s.fov);
    double best = 0.0;
    for (std::size_t i = 0; i < r.roc_curve.size(); ++i) {
        const CurvePoint& p = r.roc_curve[i];
        EXPECT_EQ(p.tpr, p.recall);
        if (i > 0) {
            EXPECT_LE(p.tpr, r.roc_curve[i - 1].tpr);
            EXPECT_LE(p.fpr, r.roc_curve[i - 1].fpr);
        }
        const double d = dice(p.tp, p.fp, p.fn);
        // Holds under the empty-prediction conventions as well.
        const double f1 = p.precision + p.recall > 0.0 ? 2 * p.precision * p.recall / (p.precision + p.recall) : 0.0;
        EXPECT_NEAR(d, f1, 1e-12);
        best = std::max(best, d);
    }
    EXPECT_EQ(r.best_dice, best);
    EXPECT_GE(r.pr_auc, 0.0);
    EXPECT_LE(r.pr_auc, 1.0);
}

TEST(SweepCurves, RandomScoresGiveChanceRocAuc) {
    int outside = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(derive_seed(77, seed));
        Tensor prob({1, 1, 100, 100}), gt({1, 1, 100, 100}), fov({1, 1, 100, 100}, 1.0);
        for (std::size_t i = 0; i < prob.size(); ++i) {
            prob[i] = rng.uniform();
            gt[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
        }
        const double auc = sweep_curves(prob, gt, fov).roc_auc;
        if (auc < 0.45 || auc > 0.55) ++outside;
    }
    EXPECT_LE(outside, 5);
}

TEST(SweepCurves, PixelsOutsideFovAreIgnored) {
    Sample s = random_sample(300, 3);
    const MetricsReport before = sweep_curves(s.prob, s.gt, s.fov);
    Rng rng(99);
    for (std::size_t i = 0; i < s.prob.size(); ++i)
        if (s.fov[i] == 0.0) {
            s.prob[i] = rng.uniform();
            s.gt[i] = 1.0 - s.gt[i];
        }
    const MetricsReport after = sweep_curves(s.prob, s.gt, s.fov);
    EXPECT_EQ(summary_json(before), summary_json(after));
    ASSERT_EQ(before.roc_curve.size(), after.roc_curve.size());
    for (std::size_t i = 0; i < before.roc_curve.size(); ++i) {
        EXPECT_EQ(before.roc_curve[i].tp, after.roc_curve[i].tp);
        EXPECT_EQ(before.roc_curve[i].fp, after.roc_curve[i].fp);
    }
}

TEST(SweepCurves, RejectsBadInput) {
    const Tensor p = row({0.5, 0.5});
    EXPECT_THROW(sweep_curves(p, row({1, 0}), row({0, 0})), InvalidArgument);
    EXPECT_THROW(sweep_curves(p, row({0.5, 0}), row({1, 1})), InvalidArgument);
    EXPECT_THROW(sweep_curves(p, row({1, 0, 1}), row({1, 1, 1})), InvalidArgument);
    EXPECT_THROW(sweep_curves(p, row({1, 0}), row({1, 1}), {0.5, 0.2}), InvalidArgument);
    EXPECT_THROW(sweep_curves(p, row({1, 0}), row({1, 1}), {}), InvalidArgument);
}

TEST(ConfusionTable, MergeEqualsPooledPixels) {
    const Sample a = random_sample(200, 1);
    const Sample b = random_sample(200, 2);
    ConfusionTable ta(uniform_thresholds()), tb(uniform_thresholds()), joint(uniform_thresholds());
    ta.accumulate(a.prob, a.gt, a.fov);
    tb.accumulate(b.prob, b.gt, b.fov);
    ta.merge(tb);
    joint.accumulate(a.prob, a.gt, a.fov);
    joint.accumulate(b.prob, b.gt, b.fov);
    EXPECT_EQ(ta.true_positives(), joint.true_positives());
    EXPECT_EQ(ta.false_positives(), joint.false_positives());
    EXPECT_EQ(summary_json(ta.report()), summary_json(joint.report()));

    ConfusionTable other({0.5});
    EXPECT_THROW(ta.merge(other), InvalidArgument);
    EXPECT_THROW(ConfusionTable(uniform_thresholds()).report(), InvalidArgument);
}

TEST(Output, CurveCsvAndSummaryJson) {
    const Sample s = random_sample(100, 5);
    const MetricsReport r = sweep_curves(s.prob, s.gt, s.fov);
    const auto path = std::filesystem::temp_directory_path() / "ssanet_curve.csv";
    write_curve_csv(r.pr_curve, path);
    const CsvTable t = read_csv(path);
    EXPECT_EQ(t.header, (std::vector<std::string>{"threshold", "precision", "recall", "tpr", "fpr"}));
    EXPECT_EQ(t.rows.size(), 256u);
    std::filesystem::remove(path);

    const auto j = nlohmann::ordered_json::parse(summary_json(r));
    std::vector<std::string> keys;
    for (const auto& item : j.items()) keys.push_back(item.key());
    EXPECT_EQ(keys, (std::vector<std::string>{"pr_auc", "roc_auc", "best_dice", "best_dice_threshold"}));
    EXPECT_EQ(j["roc_auc"].get<double>(), r.roc_auc);
}
