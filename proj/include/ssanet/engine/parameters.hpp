#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ssanet/engine/tensor.hpp"

namespace ssanet::engine {

/// Maps logical dims (rank 1..4) onto an NCHW shape, padding with ones.
Shape shape_from_dims(const std::vector<std::uint32_t>& dims);

struct Parameter {
    std::vector<std::uint32_t> dims;
    Tensor value;
    Tensor grad;
    Tensor momentum;
    /// Set by backward once `grad` holds this step's gradient.
    bool grad_ready = false;
};

/// Non-trainable state saved with the model (batch-norm running statistics,
/// input normalization).
struct Buffer {
    std::vector<std::uint32_t> dims;
    Tensor value;
};

/// Named trainable parameters plus named buffers, iterated in name order.
class ParameterSet {
public:
    /// Adds a zero-valued parameter with zeroed gradient and momentum.
    /// Throws on a duplicate name.
    Parameter& add(const std::string& name, std::vector<std::uint32_t> dims);
    Buffer& add_buffer(const std::string& name, std::vector<std::uint32_t> dims, double fill = 0.0);

    bool contains(const std::string& name) const;
    bool contains_buffer(const std::string& name) const;
    Parameter& at(const std::string& name);
    const Parameter& at(const std::string& name) const;
    Buffer& buffer(const std::string& name);
    const Buffer& buffer(const std::string& name) const;

    std::map<std::string, Parameter>& parameters() { return params_; }
    const std::map<std::string, Parameter>& parameters() const { return params_; }
    std::map<std::string, Buffer>& buffers() { return buffers_; }
    const std::map<std::string, Buffer>& buffers() const { return buffers_; }

    void zero_grad();
    /// Number of trainable scalars.
    std::size_t scalar_count() const;

private:
    std::map<std::string, Parameter> params_;
    std::map<std::string, Buffer> buffers_;
};

}  // namespace ssanet::engine
