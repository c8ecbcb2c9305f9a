#include "ssanet/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "ssanet/arch/forward.hpp"
#include "ssanet/arch/variants.hpp"
#include "ssanet/common/csv.hpp"
#include "ssanet/common/rng.hpp"
#include "ssanet/engine/ops.hpp"
#include "ssanet/engine/optim.hpp"

namespace ssanet::train {

using engine::Shape;
using engine::Tensor;

namespace {

// Copies sample `src` (1, c, h, w) into slot `n` of `dst`, optionally mirrored.
void place(Tensor& dst, std::size_t n, const Tensor& src, bool flip_h, bool flip_v) {
    const Shape s = src.shape();
    for (std::size_t c = 0; c < s.c; ++c)
        for (std::size_t y = 0; y < s.h; ++y)
            for (std::size_t x = 0; x < s.w; ++x)
                dst(n, c, y, x) = src(0, c, flip_v ? s.h - 1 - y : y, flip_h ? s.w - 1 - x : x);
}

}  // namespace

void TrainConfig::validate() const {
    arch.validate();
    if (batch_size == 0) throw InvalidArgument("batch_size must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InvalidArgument("learning rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("momentum must lie in [0, 1)");
}

std::pair<double, double> input_statistics(const std::vector<data::SampleRecord>& records) {
    double sum = 0.0;
    double count = 0.0;
    for (const auto& r : records) {
        const Shape s = r.image.shape();
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t i = 0; i < s.plane(); ++i)
                if (r.fov_mask[i] == 1.0) sum += r.image[c * s.plane() + i], count += 1.0;
    }
    if (count == 0.0) return {0.0, 1.0};
    const double mean = sum / count;
    double sq = 0.0;
    for (const auto& r : records) {
        const Shape s = r.image.shape();
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t i = 0; i < s.plane(); ++i)
                if (r.fov_mask[i] == 1.0) {
                    const double d = r.image[c * s.plane() + i] - mean;
                    sq += d * d;
                }
    }
    const double std = std::sqrt(sq / count);
    return {mean, std < 1e-12 ? 1.0 : std};
}

TrainResult train(const TrainConfig& cfg, const std::vector<data::SampleRecord>& records,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
    cfg.validate();
    if (records.empty()) throw InvalidArgument("training set is empty");
    const arch::NetworkSpec spec = arch::build_variant(cfg.variant, cfg.arch);
    const Shape sample = records.front().image.shape();
    for (const auto& r : records) {
        data::check_record(r);
        if (r.image.shape() != sample)
            throw InvalidArgument("training images must share one shape; " + r.id + " is " + r.image.shape().str());
    }
    arch::check_input_shape(spec, sample);

    TrainResult result;
    Checkpoint& ckpt = result.checkpoint;
    ckpt.variant = cfg.variant;
    ckpt.arch = cfg.arch;
    ckpt.seed = cfg.seed;
    ckpt.params = model_parameters(spec);
    {
        engine::ParameterSet init = arch::init_parameters(spec, derive_seed(cfg.seed, 0));
        for (auto& [name, p] : init.parameters()) ckpt.params.at(name).value = p.value;
        for (auto& [name, b] : init.buffers()) ckpt.params.buffer(name).value = b.value;
        const auto [mean, std] = input_statistics(records);
        Tensor& norm = ckpt.params.buffer(kInputNorm).value;
        norm[0] = mean;
        norm[1] = std;
    }

    std::vector<Tensor> inputs;
    inputs.reserve(records.size());
    for (const auto& r : records) inputs.push_back(normalize_input(ckpt.params, r.image));

    Rng rng(derive_seed(cfg.seed, 1));
    std::vector<std::size_t> order(records.size());
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);

        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
            const std::size_t b = std::min(cfg.batch_size, order.size() - first);
            Tensor image(Shape{b, sample.c, sample.h, sample.w});
            Tensor target(Shape{b, 1, sample.h, sample.w});
            Tensor fov(Shape{b, 1, sample.h, sample.w});
            for (std::size_t k = 0; k < b; ++k) {
                const std::size_t idx = order[first + k];
                const bool fh = rng.uniform() < 0.5;
                const bool fv = rng.uniform() < 0.5;
                const bool flip_h = cfg.flips && fh;
                const bool flip_v = cfg.flips && fv;
                place(image, k, inputs[idx], flip_h, flip_v);
                place(target, k, records[idx].vessel_mask, flip_h, flip_v);
                place(fov, k, records[idx].fov_mask, flip_h, flip_v);
            }
            engine::Tape tape;
            const engine::Var x = tape.constant(std::move(image));
            const arch::ForwardResult fwd = arch::forward(tape, spec, ckpt.params, x, engine::Mode::Train);
            const engine::Var loss = engine::balanced_bce_loss(tape, fwd.output, target, fov);
            const double value = tape.value(loss)[0];
            if (!std::isfinite(value))
                throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch) + ", step " +
                                     std::to_string(ckpt.step));
            tape.backward(loss);
            engine::sgd_step(ckpt.params, cfg.learning_rate, cfg.momentum);
            ++ckpt.step;
            loss_sum += value;
            ++batches;
        }
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        result.history.push_back({epoch, loss_sum / static_cast<double>(batches), elapsed.count()});
        if (on_epoch) on_epoch(result.history.back());
    }
    return result;
}

void write_history_csv(const History& history, const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : history)
        rows.push_back({std::to_string(e.epoch), format_double(e.loss), format_double(e.seconds)});
    write_csv(path, {"epoch", "loss", "seconds"}, rows);
}

}  // namespace ssanet::train
