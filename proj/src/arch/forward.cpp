#include "ssanet/arch/forward.hpp"

#include <map>
#include <string>

#include "ssanet/common/error.hpp"
#include "ssanet/common/rng.hpp"
#include "ssanet/engine/ops.hpp"

namespace ssanet::arch {

using engine::BatchNormState;
using engine::Mode;
using engine::ParameterSet;
using engine::Shape;
using engine::Tape;
using engine::Tensor;
using engine::Var;

void check_input_shape(const NetworkSpec& spec, const Shape& image) {
    const std::size_t divisor = spec.required_divisor();
    if (image.c != spec.config.input_channels)
        throw InvalidArgument("network expects " + std::to_string(spec.config.input_channels) +
                              " input channels, got " + std::to_string(image.c));
    if (image.n == 0 || image.h == 0 || image.w == 0 || image.h % divisor != 0 || image.w % divisor != 0)
        throw InvalidArgument("variant " + std::string(variant_name(spec.variant)) +
                              " needs height and width divisible by " + std::to_string(divisor) + ", got " +
                              std::to_string(image.h) + "x" + std::to_string(image.w));
}

namespace {

/// Parameter access for one forward pass: trainable (registered for
/// gradients) or frozen (read-only constants).
class ParamSource {
public:
    explicit ParamSource(ParameterSet& params) : mutable_(&params), frozen_(&params) {}
    explicit ParamSource(const ParameterSet& params) : frozen_(&params) {}

    Var get(Tape& tape, const std::string& name) {
        if (auto it = cache_.find(name); it != cache_.end()) return it->second;
        const Var v = mutable_ ? tape.parameter(mutable_->at(name)) : tape.constant_ref(frozen_->at(name).value);
        cache_.emplace(name, v);
        return v;
    }

    BatchNormState bn_state(const std::string& prefix, Mode mode) {
        if (mode == Mode::Train) {
            if (!mutable_) throw InvalidArgument("train-mode forward needs mutable parameters");
            return BatchNormState::training(mutable_->buffer(prefix + ".running_mean").value,
                                            mutable_->buffer(prefix + ".running_var").value);
        }
        return BatchNormState::frozen(frozen_->buffer(prefix + ".running_mean").value,
                                      frozen_->buffer(prefix + ".running_var").value);
    }

private:
    ParameterSet* mutable_ = nullptr;
    const ParameterSet* frozen_ = nullptr;
    std::map<std::string, Var> cache_;
};

ForwardResult run(Tape& tape, const NetworkSpec& spec, ParamSource& params, Var image, Mode mode) {
    check_input_shape(spec, tape.value(image).shape());
    ForwardResult result;
    result.nodes.resize(spec.nodes.size());
    result.nodes[0] = image;
    for (std::size_t i = 1; i < spec.nodes.size(); ++i) {
        const LayerNode& n = spec.nodes[i];
        const Var in = result.nodes[n.inputs.at(0)];
        Var out;
        switch (n.kind) {
            case LayerKind::Conv: {
                std::optional<Var> bias;
                if (n.bias) bias = params.get(tape, n.name + ".bias");
                out = engine::conv2d(tape, in, params.get(tape, n.name + ".weight"), bias, n.stride, n.padding);
                break;
            }
            case LayerKind::BatchNorm:
                out = engine::batch_norm2d(tape, in, params.get(tape, n.name + ".gamma"),
                                           params.get(tape, n.name + ".beta"), mode, params.bn_state(n.name, mode));
                break;
            case LayerKind::Relu: out = engine::relu(tape, in); break;
            case LayerKind::MaxPool: out = engine::max_pool2d(tape, in); break;
            case LayerKind::Upsample: out = engine::bilinear_upsample2d(tape, in); break;
            case LayerKind::Add: out = engine::add(tape, in, result.nodes[n.inputs.at(1)]); break;
            case LayerKind::Concat: {
                std::vector<Var> parts;
                for (std::size_t p : n.inputs) parts.push_back(result.nodes[p]);
                out = engine::concat_channels(tape, parts);
                break;
            }
            case LayerKind::Sigmoid: out = engine::sigmoid(tape, in); break;
            case LayerKind::Input: throw InvalidArgument("network: unexpected input node");
        }
        result.nodes[i] = out;
    }
    result.output = result.nodes[spec.output];
    return result;
}

}  // namespace

ForwardResult forward(Tape& tape, const NetworkSpec& spec, ParameterSet& params, Var image, Mode mode) {
    ParamSource source(params);
    return run(tape, spec, source, image, mode);
}

ForwardResult forward_frozen(Tape& tape, const NetworkSpec& spec, const ParameterSet& params, Var image) {
    ParamSource source(params);
    return run(tape, spec, source, image, Mode::Eval);
}

Tensor predict(const NetworkSpec& spec, const ParameterSet& params, const Tensor& image) {
    Tape tape;
    const Var x = tape.constant_ref(image);
    const ForwardResult r = forward_frozen(tape, spec, params, x);
    return tape.value(r.output);
}

std::vector<engine::GradCheckResult> network_gradcheck(const NetworkSpec& spec, std::uint64_t seed,
                                                       std::size_t size, const engine::GradCheckOptions& options) {
    ParameterSet params = init_parameters(spec, seed);
    Rng rng(derive_seed(seed, 1));
    const Shape shape{1, spec.config.input_channels, size, size};
    Tensor image(shape);
    for (double& v : image.values()) v = rng.uniform();
    const Shape mask_shape{1, 1, size, size};
    Tensor target(mask_shape), fov(mask_shape, 1.0);
    for (double& v : target.values()) v = rng.uniform() < 0.3 ? 1.0 : 0.0;

    auto loss_of = [&](Tape& tape) {
        const Var x = tape.constant_ref(image);
        const ForwardResult r = forward(tape, spec, params, x, Mode::Train);
        return engine::balanced_bce_loss(tape, r.output, target, fov);
    };

    params.zero_grad();
    {
        Tape tape;
        tape.backward(loss_of(tape));
    }
    std::map<std::string, Tensor> analytic;
    for (const auto& [name, p] : params.parameters()) analytic[name] = p.grad;

    auto evaluate = [&]() {
        Tape tape;
        tape.set_track_kinks(true);
        const Var loss = loss_of(tape);
        return engine::Evaluation{tape.value(loss)[0], tape.kink_signature()};
    };

    std::vector<engine::Probe> probes;
    for (auto& [name, p] : params.parameters()) probes.push_back({name, p.value.values(), analytic[name].values()});
    engine::GradCheckOptions opts = options;
    opts.seed = derive_seed(seed, 2);
    return engine::check_gradients(evaluate, probes, opts);
}

}  // namespace ssanet::arch
