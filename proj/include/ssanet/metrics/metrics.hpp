#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ssanet/engine/tensor.hpp"

namespace ssanet::metrics {

/// Confusion counts and derived rates at one threshold; a pixel is predicted
/// positive when prob >= threshold.
struct CurvePoint {
    double threshold = 0.0;
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
    /// 1 when nothing is predicted positive.
    double precision = 1.0;
    /// Equals tpr; 1 when there are no positives.
    double recall = 1.0;
    double tpr = 1.0;
    /// 1 when there are no negatives.
    double fpr = 1.0;
};

struct MetricsReport {
    /// Both curves hold the same points, sorted by ascending threshold.
    std::vector<CurvePoint> pr_curve;
    std::vector<CurvePoint> roc_curve;
    double pr_auc = 0.0;
    double roc_auc = 0.0;
    double best_dice = 0.0;
    double best_dice_threshold = 0.0;
};

/// 2tp / (2tp + fp + fn), and 1 when all three are zero.
double dice(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

/// n uniform levels i/(n-1) in [0, 1].
std::vector<double> uniform_thresholds(std::size_t n = 256);

/// Per-threshold confusion counts over FOV pixels. Tables from different
/// images with the same thresholds merge by summing.
class ConfusionTable {
public:
    explicit ConfusionTable(std::vector<double> thresholds);

    /// Adds every pixel with fov == 1. Shapes must match; gt and fov must be
    /// binary.
    void accumulate(const engine::Tensor& prob, const engine::Tensor& gt, const engine::Tensor& fov);
    void merge(const ConfusionTable& other);

    const std::vector<double>& thresholds() const { return thresholds_; }
    std::uint64_t positives() const { return positives_; }
    std::uint64_t negatives() const { return negatives_; }
    /// Pixels predicted positive among positives / negatives, per threshold.
    const std::vector<std::uint64_t>& true_positives() const { return tp_; }
    const std::vector<std::uint64_t>& false_positives() const { return fp_; }

    /// Curves, trapezoidal AUCs and best Dice. Rejects an empty table.
    MetricsReport report() const;

private:
    std::vector<double> thresholds_;
    std::vector<std::uint64_t> tp_, fp_;
    std::uint64_t positives_ = 0, negatives_ = 0;
};

/// ConfusionTable over one image; thresholds must be sorted and nonempty.
MetricsReport sweep_curves(const engine::Tensor& prob, const engine::Tensor& gt, const engine::Tensor& fov,
                           const std::vector<double>& thresholds = uniform_thresholds());

/// Header threshold,precision,recall,tpr,fpr.
void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path);
/// Keys pr_auc, roc_auc, best_dice, best_dice_threshold.
std::string summary_json(const MetricsReport& report);

}  // namespace ssanet::metrics
