#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "ssanet/engine/parameters.hpp"
#include "ssanet/engine/tensor.hpp"

namespace ssanet::engine {

/// Handle to a value recorded on a Tape.
struct Var {
    std::size_t id = std::numeric_limits<std::size_t>::max();
    bool valid() const { return id != std::numeric_limits<std::size_t>::max(); }
};

enum class Mode { Train, Eval };

class Tape;

/// Propagates the gradient of `out` into the gradients of its inputs.
using BackwardFn = std::function<void(Tape&, Var out)>;

/// Records a forward computation as a topologically ordered list of nodes and
/// replays it in reverse for gradients. One tape serves one forward pass and
/// one backward pass, and is not thread-safe.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Leaf without gradient.
    Var constant(Tensor value);
    /// Leaf whose gradient is kept after backward for inspection.
    Var input(Tensor value);
    /// Leaf without gradient that reads `value` in place; it must outlive the tape.
    Var constant_ref(const Tensor& value);
    /// Leaf reading the parameter in place; backward accumulates into p.grad.
    Var parameter(Parameter& p);

    /// Appends an operation node. `backward` runs only if some input needs a
    /// gradient and the node received one.
    Var record(Tensor value, std::vector<Var> inputs, BackwardFn backward);

    const Tensor& value(Var v) const;
    /// Gradient of a node; empty if none reached it.
    const Tensor& grad(Var v) const;
    bool requires_grad(Var v) const;
    /// Gradient accumulator for an input node, allocated (zeroed) on first use.
    Tensor& grad_buffer(Var v);

    /// Reverse-mode sweep from a scalar. Marks every parameter on the tape as
    /// having a gradient, frees intermediate values, and consumes the tape.
    void backward(Var loss);
    bool consumed() const { return consumed_; }
    std::size_t size() const { return nodes_.size(); }

    /// When enabled, non-smooth ops fold their active pattern (relu signs,
    /// max-pool winners, loss clamping) into kink_signature().
    void set_track_kinks(bool on) { track_kinks_ = on; }
    bool tracking_kinks() const { return track_kinks_; }
    void mix_kink(std::uint64_t value);
    std::uint64_t kink_signature() const { return kink_signature_; }

private:
    enum class Kind { Constant, Input, Parameter, Op };
    struct Node {
        Kind kind = Kind::Op;
        Tensor value;
        const Tensor* external = nullptr;
        Parameter* param = nullptr;
        Tensor grad;
        std::vector<Var> inputs;
        BackwardFn backward;
        bool requires_grad = false;
    };

    const Node& node(Var v) const;
    Node& node(Var v);

    std::vector<Node> nodes_;
    bool consumed_ = false;
    bool track_kinks_ = false;
    std::uint64_t kink_signature_ = 0xcbf29ce484222325ULL;
};

}  // namespace ssanet::engine
