#include "ssanet/engine/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ssanet/common/error.hpp"
#include "ssanet/common/rng.hpp"
#include "ssanet/engine/ops.hpp"

namespace ssanet::engine {

double relative_error(double analytic, double numeric, double floor) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

std::vector<GradCheckResult> check_gradients(const std::function<Evaluation()>& evaluate,
                                             std::span<const Probe> probes, const GradCheckOptions& options) {
    Rng rng(options.seed);
    const std::uint64_t base_signature = evaluate().kink_signature;
    std::vector<GradCheckResult> results;

    for (const Probe& probe : probes) {
        if (probe.values.size() != probe.analytic.size())
            throw InvalidArgument("check_gradients: probe '" + probe.name + "' size mismatch");
        GradCheckResult result{probe.name, 0.0, 0, 0};

        // Random visiting order; walking further down the order replaces
        // coordinates rejected at kinks.
        std::vector<std::size_t> order(probe.values.size());
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);

        for (std::size_t idx : order) {
            if (result.checked >= options.samples_per_probe) break;
            double& v = probe.values[idx];
            const double saved = v;
            v = saved + options.epsilon;
            const Evaluation plus = evaluate();
            v = saved - options.epsilon;
            const Evaluation minus = evaluate();
            v = saved;
            if (plus.kink_signature != base_signature || minus.kink_signature != base_signature) {
                ++result.skipped;
                continue;
            }
            const double numeric = (plus.loss - minus.loss) / (2.0 * options.epsilon);
            result.max_rel_error =
                std::max(result.max_rel_error, relative_error(probe.analytic[idx], numeric, options.floor));
            ++result.checked;
        }
        results.push_back(result);
    }
    return results;
}

namespace {

using OpFn = std::function<Var(Tape&, std::span<const Var>)>;

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(shape);
    for (auto& v : t.values()) v = rng.uniform(lo, hi);
    return t;
}

/// Values bounded away from zero, for ops with a kink at 0.
Tensor random_away_from_zero(Shape shape, Rng& rng) {
    Tensor t(shape);
    for (auto& v : t.values()) v = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.1, 1.0);
    return t;
}

/// Checks d(sum(w * op(inputs)))/d(inputs) for random w, one result per op.
GradCheckResult check_op(const std::string& name, std::vector<Tensor> inputs, const OpFn& op, Rng& rng,
                         const GradCheckOptions& options) {
    Tensor weights;
    std::vector<Tensor> analytic;
    {
        Tape tape;
        std::vector<Var> vars;
        for (const Tensor& t : inputs) vars.push_back(tape.input(t));
        const Var out = op(tape, vars);
        weights = random_tensor(tape.value(out).shape(), rng);
        tape.backward(weighted_sum(tape, out, weights));
        for (Var v : vars) analytic.push_back(tape.grad(v).empty() ? Tensor(tape.value(v).shape()) : tape.grad(v));
    }

    auto evaluate = [&]() {
        Tape tape;
        tape.set_track_kinks(true);
        std::vector<Var> vars;
        for (const Tensor& t : inputs) vars.push_back(tape.constant(t));
        const Var loss = weighted_sum(tape, op(tape, vars), weights);
        return Evaluation{tape.value(loss)[0], tape.kink_signature()};
    };

    std::vector<Probe> probes;
    for (std::size_t i = 0; i < inputs.size(); ++i)
        probes.push_back({name + "[" + std::to_string(i) + "]", inputs[i].values(), analytic[i].values()});
    GradCheckOptions opts = options;
    opts.seed = rng.next();
    const auto per_input = check_gradients(evaluate, probes, opts);

    GradCheckResult merged{name, 0.0, 0, 0};
    for (const auto& r : per_input) {
        merged.max_rel_error = std::max(merged.max_rel_error, r.max_rel_error);
        merged.checked += r.checked;
        merged.skipped += r.skipped;
    }
    return merged;
}

}  // namespace

std::vector<GradCheckResult> primitive_gradchecks(std::uint64_t seed, const GradCheckOptions& options) {
    Rng rng(seed);
    std::vector<GradCheckResult> out;

    out.push_back(check_op(
        "conv2d",
        {random_tensor({2, 3, 6, 6}, rng), random_tensor({4, 3, 3, 3}, rng), random_tensor({4, 1, 1, 1}, rng)},
        [](Tape& t, std::span<const Var> v) { return conv2d(t, v[0], v[1], v[2], 1, 1); }, rng, options));
    out.push_back(check_op(
        "conv2d_stride2",
        {random_tensor({2, 2, 8, 8}, rng), random_tensor({3, 2, 3, 3}, rng), random_tensor({3, 1, 1, 1}, rng)},
        [](Tape& t, std::span<const Var> v) { return conv2d(t, v[0], v[1], v[2], 2, 1); }, rng, options));
    out.push_back(check_op(
        "conv2d_pointwise", {random_tensor({2, 5, 4, 4}, rng), random_tensor({2, 5, 1, 1}, rng)},
        [](Tape& t, std::span<const Var> v) { return conv2d(t, v[0], v[1], std::nullopt, 1, 0); }, rng, options));
    out.push_back(check_op(
        "max_pool2d", {random_tensor({2, 3, 6, 8}, rng)},
        [](Tape& t, std::span<const Var> v) { return max_pool2d(t, v[0]); }, rng, options));
    out.push_back(check_op(
        "bilinear_upsample2d", {random_tensor({2, 2, 5, 3}, rng)},
        [](Tape& t, std::span<const Var> v) { return bilinear_upsample2d(t, v[0]); }, rng, options));

    for (Mode mode : {Mode::Train, Mode::Eval}) {
        Tensor running_mean = random_tensor({3, 1, 1, 1}, rng, -0.5, 0.5);
        Tensor running_var = random_tensor({3, 1, 1, 1}, rng, 0.5, 2.0);
        out.push_back(check_op(
            mode == Mode::Train ? "batch_norm2d_train" : "batch_norm2d_eval",
            {random_tensor({2, 3, 4, 5}, rng, -2.0, 2.0), random_tensor({3, 1, 1, 1}, rng, 0.5, 1.5),
             random_tensor({3, 1, 1, 1}, rng)},
            [&, mode](Tape& t, std::span<const Var> v) {
                // Running statistics evolve in train mode; the checked output does not depend on them.
                return batch_norm2d(t, v[0], v[1], v[2], mode, BatchNormState::training(running_mean, running_var));
            },
            rng, options));
    }

    out.push_back(check_op(
        "relu", {random_away_from_zero({2, 3, 4, 4}, rng)},
        [](Tape& t, std::span<const Var> v) { return relu(t, v[0]); }, rng, options));
    out.push_back(check_op(
        "sigmoid", {random_tensor({2, 3, 4, 4}, rng, -4.0, 4.0)},
        [](Tape& t, std::span<const Var> v) { return sigmoid(t, v[0]); }, rng, options));
    out.push_back(check_op(
        "add", {random_tensor({2, 3, 4, 4}, rng), random_tensor({2, 3, 4, 4}, rng)},
        [](Tape& t, std::span<const Var> v) { return add(t, v[0], v[1]); }, rng, options));
    out.push_back(check_op(
        "concat_channels", {random_tensor({2, 1, 3, 3}, rng), random_tensor({2, 3, 3, 3}, rng)},
        [](Tape& t, std::span<const Var> v) { return concat_channels(t, v); }, rng, options));

    Tensor target({2, 1, 6, 6});
    Tensor fov({2, 1, 6, 6});
    for (std::size_t i = 0; i < target.size(); ++i) {
        target[i] = rng.uniform() < 0.3 ? 1.0 : 0.0;
        fov[i] = rng.uniform() < 0.8 ? 1.0 : 0.0;
    }
    out.push_back(check_op(
        "balanced_bce_loss", {random_tensor({2, 1, 6, 6}, rng, 0.05, 0.95)},
        [&](Tape& t, std::span<const Var> v) { return balanced_bce_loss(t, v[0], target, fov); }, rng, options));
    return out;
}

}  // namespace ssanet::engine
