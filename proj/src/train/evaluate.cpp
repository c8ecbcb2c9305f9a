#include "ssanet/train/evaluate.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <thread>

#include "ssanet/arch/forward.hpp"
#include "ssanet/arch/variants.hpp"
#include "ssanet/common/csv.hpp"

namespace ssanet::train {

std::size_t evaluation_threads() {
    const char* env = std::getenv("SSANET_THREADS");
    if (env == nullptr) return 1;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    return (end != env && *end == '\0' && n > 0) ? static_cast<std::size_t>(n) : 1;
}

Evaluation evaluate(const Checkpoint& ckpt, const std::vector<data::SampleRecord>& test, std::size_t threads) {
    if (test.empty()) throw InvalidArgument("evaluate: test list is empty");
    const arch::NetworkSpec spec = arch::build_variant(ckpt.variant, ckpt.arch);
    for (const auto& r : test) {
        data::check_record(r);
        arch::check_input_shape(spec, r.image.shape());
    }

    const std::vector<double> thresholds = metrics::uniform_thresholds();
    std::vector<metrics::ConfusionTable> tables(test.size(), metrics::ConfusionTable(thresholds));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(test.size());
    auto worker = [&] {
        for (std::size_t i = next++; i < test.size(); i = next++) {
            try {
                const engine::Tensor prob = arch::predict(spec, ckpt.params, normalize_input(ckpt.params, test[i].image));
                tables[i].accumulate(prob, test[i].vessel_mask, test[i].fov_mask);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(threads, test.size()));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    Evaluation out;
    metrics::ConfusionTable pooled(thresholds);
    for (std::size_t i = 0; i < test.size(); ++i) {
        pooled.merge(tables[i]);
        out.ids.push_back(test[i].id);
        out.per_image.push_back(tables[i].report());
    }
    out.pooled = pooled.report();
    return out;
}

void write_evaluation(const Evaluation& eval, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    metrics::write_curve_csv(eval.pooled.pr_curve, dir / "pr_curve.csv");
    metrics::write_curve_csv(eval.pooled.roc_curve, dir / "roc_curve.csv");
    {
        std::ofstream out(dir / "summary.json", std::ios::binary);
        out << metrics::summary_json(eval.pooled) << '\n';
        if (!out) throw DataError("cannot write " + (dir / "summary.json").string());
    }
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < eval.ids.size(); ++i) {
        const auto& r = eval.per_image[i];
        rows.push_back({eval.ids[i], format_double(r.pr_auc), format_double(r.roc_auc), format_double(r.best_dice),
                        format_double(r.best_dice_threshold)});
    }
    write_csv(dir / "per_image.csv", {"id", "pr_auc", "roc_auc", "best_dice", "best_dice_threshold"}, rows);
}

}  // namespace ssanet::train
