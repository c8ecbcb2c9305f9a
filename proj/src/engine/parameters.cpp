#include "ssanet/engine/parameters.hpp"

#include "ssanet/common/error.hpp"

namespace ssanet::engine {

Shape shape_from_dims(const std::vector<std::uint32_t>& dims) {
    if (dims.empty() || dims.size() > 4) throw InvalidArgument("parameter rank must be 1..4");
    std::size_t d[4] = {1, 1, 1, 1};
    for (std::size_t i = 0; i < dims.size(); ++i) d[i] = dims[i];
    return Shape{d[0], d[1], d[2], d[3]};
}

Parameter& ParameterSet::add(const std::string& name, std::vector<std::uint32_t> dims) {
    if (params_.contains(name) || buffers_.contains(name))
        throw InvalidArgument("duplicate parameter name: " + name);
    const Shape shape = shape_from_dims(dims);
    Parameter& p = params_[name];
    p.dims = std::move(dims);
    p.value = Tensor(shape);
    p.grad = Tensor(shape);
    p.momentum = Tensor(shape);
    return p;
}

Buffer& ParameterSet::add_buffer(const std::string& name, std::vector<std::uint32_t> dims, double fill) {
    if (params_.contains(name) || buffers_.contains(name))
        throw InvalidArgument("duplicate buffer name: " + name);
    Buffer& b = buffers_[name];
    b.value = Tensor(shape_from_dims(dims), fill);
    b.dims = std::move(dims);
    return b;
}

bool ParameterSet::contains(const std::string& name) const { return params_.contains(name); }
bool ParameterSet::contains_buffer(const std::string& name) const { return buffers_.contains(name); }

Parameter& ParameterSet::at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw InvalidArgument("unknown parameter: " + name);
    return it->second;
}

const Parameter& ParameterSet::at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw InvalidArgument("unknown parameter: " + name);
    return it->second;
}

Buffer& ParameterSet::buffer(const std::string& name) {
    auto it = buffers_.find(name);
    if (it == buffers_.end()) throw InvalidArgument("unknown buffer: " + name);
    return it->second;
}

const Buffer& ParameterSet::buffer(const std::string& name) const {
    auto it = buffers_.find(name);
    if (it == buffers_.end()) throw InvalidArgument("unknown buffer: " + name);
    return it->second;
}

void ParameterSet::zero_grad() {
    for (auto& [name, p] : params_) {
        p.grad.fill(0.0);
        p.grad_ready = false;
    }
}

std::size_t ParameterSet::scalar_count() const {
    std::size_t total = 0;
    for (const auto& [name, p] : params_) total += p.value.size();
    return total;
}

}  // namespace ssanet::engine
