#include "ssanet/engine/tape.hpp"

#include <string>

#include "ssanet/common/error.hpp"

namespace ssanet::engine {

const Tape::Node& Tape::node(Var v) const {
    if (v.id >= nodes_.size()) throw InvalidArgument("tape: invalid variable");
    return nodes_[v.id];
}

Tape::Node& Tape::node(Var v) {
    if (v.id >= nodes_.size()) throw InvalidArgument("tape: invalid variable");
    return nodes_[v.id];
}

Var Tape::constant(Tensor value) {
    Node n;
    n.kind = Kind::Constant;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var Tape::input(Tensor value) {
    Node n;
    n.kind = Kind::Input;
    n.value = std::move(value);
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var Tape::constant_ref(const Tensor& value) {
    Node n;
    n.kind = Kind::Constant;
    n.external = &value;
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var Tape::parameter(Parameter& p) {
    Node n;
    n.kind = Kind::Parameter;
    n.param = &p;
    n.external = &p.value;
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::vector<Var> inputs, BackwardFn backward) {
    if (consumed_) throw InvalidArgument("tape: cannot record after backward");
    Node n;
    n.kind = Kind::Op;
    n.value = std::move(value);
    for (Var in : inputs) {
        if (in.id >= nodes_.size()) throw InvalidArgument("tape: input recorded after its consumer");
        n.requires_grad = n.requires_grad || nodes_[in.id].requires_grad;
    }
    n.inputs = std::move(inputs);
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
    const Node& n = node(v);
    return n.external ? *n.external : n.value;
}

const Tensor& Tape::grad(Var v) const { return node(v).grad; }

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

Tensor& Tape::grad_buffer(Var v) {
    Node& n = node(v);
    if (n.grad.empty()) n.grad = Tensor(value(v).shape());
    return n.grad;
}

void Tape::backward(Var loss) {
    if (consumed_) throw InvalidArgument("tape: backward already ran on this tape");
    if (value(loss).size() != 1)
        throw InvalidArgument("tape: backward needs a scalar loss, got shape " + value(loss).shape().str());
    consumed_ = true;

    for (Node& n : nodes_)
        if (n.kind == Kind::Parameter && !n.param->grad_ready) {
            if (n.param->grad.shape() != n.param->value.shape()) n.param->grad = Tensor(n.param->value.shape());
            else n.param->grad.fill(0.0);
            n.param->grad_ready = true;
        }

    if (!nodes_[loss.id].requires_grad) return;
    grad_buffer(loss)[0] = 1.0;

    for (std::size_t i = loss.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.requires_grad && !n.grad.empty()) {
            if (n.backward) n.backward(*this, Var{i});
            if (n.kind == Kind::Parameter) {
                Tensor& dst = n.param->grad;
                for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += n.grad[k];
            }
        }
        // Every consumer of node i has already run its backward rule.
        if (n.kind != Kind::Input) {
            n.value.release();
            n.grad.release();
            n.backward = nullptr;
        }
    }
}

void Tape::mix_kink(std::uint64_t value) {
    kink_signature_ ^= value;
    kink_signature_ *= 0x100000001b3ULL;
}

}  // namespace ssanet::engine
