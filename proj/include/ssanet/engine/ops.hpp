#pragma once

#include <optional>
#include <span>

#include "ssanet/engine/tape.hpp"
#include "ssanet/engine/tensor.hpp"

namespace ssanet::engine {

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;
inline constexpr double kProbabilityClamp = 1e-7;

/// Cross-correlation with zero padding. weight is (out_ch, in_ch, kh, kw),
/// bias has out_ch entries. Output size floor((H + 2p - kh) / s) + 1.
Var conv2d(Tape& tape, Var x, Var weight, std::optional<Var> bias, int stride, int padding);

/// 2x2 window, stride 2. Ties go to the first element in row-major order.
Var max_pool2d(Tape& tape, Var x);

/// x2 first-order hold along H then W with edge replication:
/// out[2i] = x[i], out[2i+1] = (x[i] + x[min(i+1, n-1)]) / 2.
Var bilinear_upsample2d(Tape& tape, Var x);

/// Running statistics of one batch-norm layer. Train mode normalizes with
/// batch statistics and folds them in as r <- 0.9 r + 0.1 batch (unbiased
/// variance); eval mode normalizes with the running values.
struct BatchNormState {
    const Tensor* running_mean = nullptr;
    const Tensor* running_var = nullptr;
    Tensor* update_mean = nullptr;
    Tensor* update_var = nullptr;

    static BatchNormState training(Tensor& mean, Tensor& var) { return {&mean, &var, &mean, &var}; }
    static BatchNormState frozen(const Tensor& mean, const Tensor& var) { return {&mean, &var, nullptr, nullptr}; }
};

Var batch_norm2d(Tape& tape, Var x, Var gamma, Var beta, Mode mode, BatchNormState state);

Var relu(Tape& tape, Var x);
Var sigmoid(Tape& tape, Var x);
Var add(Tape& tape, Var a, Var b);
Var concat_channels(Tape& tape, std::span<const Var> parts);

/// Sum of all elements, as a 1x1x1x1 scalar.
Var sum(Tape& tape, Var x);
/// Sum of x * weights (elementwise, same shape) as a scalar.
Var weighted_sum(Tape& tape, Var x, const Tensor& weights);

/// Class-balanced binary cross-entropy over pixels where fov == 1:
///   L = -[(1-b) sum_{y=1} log p + b sum_{y=0} log(1-p)] / n_fov,
/// with b the positive fraction inside the fov and p clamped to
/// [1e-7, 1-1e-7]. When the fov holds a single class both weights are 1.
Var balanced_bce_loss(Tape& tape, Var prob, const Tensor& target, const Tensor& fov);

}  // namespace ssanet::engine
