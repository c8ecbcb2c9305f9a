#include "ssanet/metrics/metrics.hpp"

#include <algorithm>
#include "json.hpp"

#include "ssanet/common/csv.hpp"
#include "ssanet/common/error.hpp"

namespace ssanet::metrics {

double dice(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
    if (tp == 0 && fp == 0 && fn == 0) return 1.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

std::vector<double> uniform_thresholds(std::size_t n) {
    if (n < 2) throw InvalidArgument("uniform_thresholds: need at least 2 levels");
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    return t;
}

ConfusionTable::ConfusionTable(std::vector<double> thresholds)
    : thresholds_(std::move(thresholds)), tp_(thresholds_.size(), 0), fp_(thresholds_.size(), 0) {
    if (thresholds_.empty()) throw InvalidArgument("metrics: thresholds must be nonempty");
    if (!std::is_sorted(thresholds_.begin(), thresholds_.end()))
        throw InvalidArgument("metrics: thresholds must be sorted ascending");
}

void ConfusionTable::accumulate(const engine::Tensor& prob, const engine::Tensor& gt, const engine::Tensor& fov) {
    if (prob.shape() != gt.shape() || prob.shape() != fov.shape())
        throw InvalidArgument("metrics: prob, gt and fov shapes must match");
    // Pixel counts by how many thresholds they clear; prefix sums turn them
    // into per-threshold counts.
    std::vector<std::uint64_t> pos_hist(thresholds_.size() + 1, 0), neg_hist(thresholds_.size() + 1, 0);
    for (std::size_t i = 0; i < prob.size(); ++i) {
        if (fov[i] != 0.0 && fov[i] != 1.0) throw InvalidArgument("metrics: fov mask must be binary");
        if (gt[i] != 0.0 && gt[i] != 1.0) throw InvalidArgument("metrics: ground truth must be binary");
        if (fov[i] == 0.0) continue;
        const auto cleared = static_cast<std::size_t>(
            std::upper_bound(thresholds_.begin(), thresholds_.end(), prob[i]) - thresholds_.begin());
        if (gt[i] == 1.0) {
            ++pos_hist[cleared];
            ++positives_;
        } else {
            ++neg_hist[cleared];
            ++negatives_;
        }
    }
    // A pixel clearing c thresholds is positive at thresholds 0..c-1.
    std::uint64_t pos_run = 0, neg_run = 0;
    for (std::size_t k = thresholds_.size(); k-- > 0;) {
        pos_run += pos_hist[k + 1];
        neg_run += neg_hist[k + 1];
        tp_[k] += pos_run;
        fp_[k] += neg_run;
    }
}

void ConfusionTable::merge(const ConfusionTable& other) {
    if (other.thresholds_ != thresholds_) throw InvalidArgument("metrics: cannot merge tables with different thresholds");
    for (std::size_t k = 0; k < tp_.size(); ++k) {
        tp_[k] += other.tp_[k];
        fp_[k] += other.fp_[k];
    }
    positives_ += other.positives_;
    negatives_ += other.negatives_;
}

namespace {

double trapezoid(std::vector<std::pair<double, double>> points) {
    std::stable_sort(points.begin(), points.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
        area += (points[i].first - points[i - 1].first) * (points[i].second + points[i - 1].second) / 2.0;
    return area;
}

}  // namespace

MetricsReport ConfusionTable::report() const {
    if (positives_ + negatives_ == 0) throw InvalidArgument("metrics: empty field of view");
    MetricsReport r;
    std::vector<CurvePoint> curve;
    for (std::size_t k = 0; k < thresholds_.size(); ++k) {
        CurvePoint p;
        p.threshold = thresholds_[k];
        p.tp = tp_[k];
        p.fp = fp_[k];
        p.fn = positives_ - tp_[k];
        p.tn = negatives_ - fp_[k];
        p.precision = p.tp + p.fp == 0 ? 1.0 : static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp);
        p.recall = positives_ == 0 ? 1.0 : static_cast<double>(p.tp) / static_cast<double>(positives_);
        p.tpr = p.recall;
        p.fpr = negatives_ == 0 ? 1.0 : static_cast<double>(p.fp) / static_cast<double>(negatives_);
        curve.push_back(p);
    }

    // Walking thresholds from high to low makes both x coordinates
    // nondecreasing; the stable sort in trapezoid() keeps that order on ties.
    std::vector<std::pair<double, double>> roc{{0.0, 0.0}}, pr{{0.0, 1.0}};
    for (std::size_t k = curve.size(); k-- > 0;) {
        roc.emplace_back(curve[k].fpr, curve[k].tpr);
        pr.emplace_back(curve[k].recall, curve[k].precision);
    }
    roc.emplace_back(1.0, 1.0);
    r.roc_auc = std::clamp(trapezoid(std::move(roc)), 0.0, 1.0);
    r.pr_auc = std::clamp(trapezoid(std::move(pr)), 0.0, 1.0);

    r.best_dice = -1.0;
    for (const CurvePoint& p : curve) {
        const double d = dice(p.tp, p.fp, p.fn);
        if (d > r.best_dice) {
            r.best_dice = d;
            r.best_dice_threshold = p.threshold;
        }
    }
    r.pr_curve = curve;
    r.roc_curve = std::move(curve);
    return r;
}

MetricsReport sweep_curves(const engine::Tensor& prob, const engine::Tensor& gt, const engine::Tensor& fov,
                           const std::vector<double>& thresholds) {
    ConfusionTable table(thresholds);
    table.accumulate(prob, gt, fov);
    return table.report();
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    for (const CurvePoint& p : curve)
        rows.push_back({format_double(p.threshold), format_double(p.precision), format_double(p.recall),
                        format_double(p.tpr), format_double(p.fpr)});
    write_csv(path, {"threshold", "precision", "recall", "tpr", "fpr"}, rows);
}

std::string summary_json(const MetricsReport& report) {
    nlohmann::ordered_json j;
    j["pr_auc"] = report.pr_auc;
    j["roc_auc"] = report.roc_auc;
    j["best_dice"] = report.best_dice;
    j["best_dice_threshold"] = report.best_dice_threshold;
    return j.dump(2);
}

}  // namespace ssanet::metrics
