#pragma once

#include <cstdint>
#include <vector>

#include "ssanet/arch/network.hpp"
#include "ssanet/engine/gradcheck.hpp"
#include "ssanet/engine/tape.hpp"

namespace ssanet::arch {

struct ForwardResult {
    engine::Var output;
    /// Tape variable of every spec node, indexed like spec.nodes.
    std::vector<engine::Var> nodes;
};

/// Throws InvalidArgument naming the required divisor when the image does
/// not fit the variant.
void check_input_shape(const NetworkSpec& spec, const engine::Shape& image);

/// Records the network on `tape` with gradient-tracked parameters. Train mode
/// updates the batch-norm running statistics held in `params`.
ForwardResult forward(engine::Tape& tape, const NetworkSpec& spec, engine::ParameterSet& params, engine::Var image,
                      engine::Mode mode);

/// Eval-mode forward reading `params` in place without gradients; safe to
/// run concurrently on shared parameters.
ForwardResult forward_frozen(engine::Tape& tape, const NetworkSpec& spec, const engine::ParameterSet& params,
                             engine::Var image);

/// Probability map (batch, 1, H, W) in eval mode.
engine::Tensor predict(const NetworkSpec& spec, const engine::ParameterSet& params, const engine::Tensor& image);

/// Central-difference check of every parameter of `spec` (freshly
/// initialized from `seed`) on a seeded size x size image with a balanced
/// BCE loss in train mode. One result per parameter tensor.
std::vector<engine::GradCheckResult> network_gradcheck(const NetworkSpec& spec, std::uint64_t seed,
                                                       std::size_t size = 16,
                                                       const engine::GradCheckOptions& options = {});

}  // namespace ssanet::arch
