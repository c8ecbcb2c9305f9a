#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "ssanet/data/dataset.hpp"
#include "ssanet/metrics/metrics.hpp"
#include "ssanet/train/checkpoint.hpp"

namespace ssanet::train {

struct Evaluation {
    /// From confusion counts summed over all images.
    metrics::MetricsReport pooled;
    std::vector<std::string> ids;
    std::vector<metrics::MetricsReport> per_image;
};

/// SSANET_THREADS if set to a positive integer, else 1.
std::size_t evaluation_threads();

/// Eval-mode predictions on every record, fanned out over `threads` workers
/// and merged in record order, so the result does not depend on `threads`.
/// Rejects an empty list and shapes the variant cannot take.
Evaluation evaluate(const Checkpoint& ckpt, const std::vector<data::SampleRecord>& test,
                    std::size_t threads = evaluation_threads());

/// pr_curve.csv, roc_curve.csv, summary.json (pooled) and per_image.csv
/// (id,pr_auc,roc_auc,best_dice,best_dice_threshold).
void write_evaluation(const Evaluation& eval, const std::filesystem::path& dir);

}  // namespace ssanet::train
