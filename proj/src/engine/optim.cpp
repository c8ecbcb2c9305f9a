#include "ssanet/engine/optim.hpp"

#include "ssanet/common/error.hpp"

namespace ssanet::engine {

void sgd_step(ParameterSet& params, double lr, double momentum) {
    if (!(lr >= 0.0)) throw InvalidArgument("sgd_step: learning rate must be nonnegative");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("sgd_step: momentum must be in [0, 1)");
    for (const auto& [name, p] : params.parameters())
        if (!p.grad_ready) throw InvalidArgument("sgd_step: parameter '" + name + "' has no gradient");

    for (auto& [name, p] : params.parameters()) {
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            p.momentum[i] = momentum * p.momentum[i] - lr * p.grad[i];
            p.value[i] += p.momentum[i];
        }
    }
    params.zero_grad();
}

}  // namespace ssanet::engine
