#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ssanet/train/trainer.hpp"

namespace ssanet::train {

struct AblationRow {
    arch::VariantId variant = arch::VariantId::MsResNetSsa2;
    /// NaN when the variant failed.
    double pr_auc = 0.0;
    double roc_auc = 0.0;
    double best_dice = 0.0;
    std::size_t params = 0;
    std::size_t receptive_field = 0;
    double train_seconds = 0.0;
    /// "ok" or "failed".
    std::string status = "ok";
    std::string error;
};

/// Trains each variant with `base` (variant replaced) on split.train and
/// evaluates on split.test. A failing variant yields a failed row and the
/// sweep continues.
std::vector<AblationRow> ablation_sweep(const std::vector<arch::VariantId>& variants, const TrainConfig& base,
                                        const data::DatasetSplit& split,
                                        const std::function<void(const AblationRow&)>& on_row = {});

/// Header variant,pr_auc,roc_auc,best_dice,params,receptive_field,train_seconds,status.
void write_ablation_csv(const std::vector<AblationRow>& rows, const std::filesystem::path& path);

}  // namespace ssanet::train
