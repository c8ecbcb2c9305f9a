#pragma once

#include "ssanet/engine/parameters.hpp"

namespace ssanet::engine {

/// Heavy-ball SGD: v <- momentum*v - lr*g; p <- p + v; then clears gradients.
/// Throws if any parameter has no gradient from the last backward pass.
void sgd_step(ParameterSet& params, double lr, double momentum);

}  // namespace ssanet::engine
