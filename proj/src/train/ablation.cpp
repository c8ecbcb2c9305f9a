#include "ssanet/train/ablation.hpp"

#include <chrono>
#include <limits>

#include "ssanet/arch/variants.hpp"
#include "ssanet/common/csv.hpp"
#include "ssanet/train/evaluate.hpp"

namespace ssanet::train {

std::vector<AblationRow> ablation_sweep(const std::vector<arch::VariantId>& variants, const TrainConfig& base,
                                        const data::DatasetSplit& split,
                                        const std::function<void(const AblationRow&)>& on_row) {
    std::vector<AblationRow> rows;
    for (arch::VariantId id : variants) {
        AblationRow row;
        row.variant = id;
        try {
            const arch::NetworkSpec spec = arch::build_variant(id, base.arch);
            row.params = arch::param_count(spec);
            row.receptive_field = arch::receptive_field(spec);
            TrainConfig cfg = base;
            cfg.variant = id;
            const auto start = std::chrono::steady_clock::now();
            const TrainResult trained = train(cfg, split.train);
            row.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            const Evaluation eval = evaluate(trained.checkpoint, split.test);
            row.pr_auc = eval.pooled.pr_auc;
            row.roc_auc = eval.pooled.roc_auc;
            row.best_dice = eval.pooled.best_dice;
        } catch (const Error& e) {
            constexpr double nan = std::numeric_limits<double>::quiet_NaN();
            row.pr_auc = row.roc_auc = row.best_dice = nan;
            row.status = "failed";
            row.error = e.what();
        }
        rows.push_back(row);
        if (on_row) on_row(rows.back());
    }
    return rows;
}

void write_ablation_csv(const std::vector<AblationRow>& rows, const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows)
        out.push_back({std::string(arch::variant_name(r.variant)), format_double(r.pr_auc), format_double(r.roc_auc),
                       format_double(r.best_dice), std::to_string(r.params), std::to_string(r.receptive_field),
                       format_double(r.train_seconds), r.status});
    write_csv(path,
              {"variant", "pr_auc", "roc_auc", "best_dice", "params", "receptive_field", "train_seconds", "status"},
              out);
}

}  // namespace ssanet::train
