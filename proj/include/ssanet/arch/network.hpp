#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ssanet/engine/parameters.hpp"
#include "ssanet/engine/tensor.hpp"

namespace ssanet::arch {

/// The ablation family. Codes are the checkpoint's u8 variant byte.
enum class VariantId : std::uint8_t {
    MsResNetSsa2 = 0,
    MsResNetSsa3 = 1,
    MsResNetDec = 2,
    ResNetNoMs = 3,
    DriuLite = 4,
    DriuNoMs = 5,
};

/// CLI / config spelling: ssa2, ssa3, dec, noms, driu, driu-noms.
std::string_view variant_name(VariantId id);
VariantId parse_variant(std::string_view name);
VariantId variant_from_code(std::uint8_t code);
const std::vector<VariantId>& all_variants();

enum class Profile : std::uint32_t { Desk = 0, ResNet34 = 1 };

struct ArchConfig {
    Profile profile = Profile::Desk;
    std::uint32_t base_channels = 16;
    std::vector<std::uint32_t> blocks_per_stage{2, 2, 2};
    std::uint32_t input_channels = 1;
    /// Batch norm inside the residual blocks; off gives biased convolutions.
    bool batch_norm = true;

    static ArchConfig desk();
    static ArchConfig resnet34();
    void validate() const;

    friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

enum class LayerKind { Input, Conv, BatchNorm, Relu, MaxPool, Upsample, Add, Concat, Sigmoid };

std::string_view layer_kind_name(LayerKind kind);

struct LayerNode {
    LayerKind kind = LayerKind::Input;
    /// Parameter prefix for Conv/BatchNorm; descriptive otherwise.
    std::string name;
    std::vector<std::size_t> inputs;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    int kernel = 0;
    int stride = 1;
    int padding = 0;
    bool bias = false;
    /// Stage label ("stem", "stage0", "ssa_pre", "fusion", ...).
    std::string stage;
};

/// A layer DAG in topological order; nodes[0] is the input.
struct NetworkSpec {
    VariantId variant = VariantId::MsResNetSsa2;
    ArchConfig config;
    std::vector<LayerNode> nodes;
    /// Stage outputs feeding the fusion head.
    std::vector<std::size_t> side_outputs;
    std::size_t output = 0;

    std::size_t count(LayerKind kind) const;
    /// Number of stride-2 convolutions.
    std::size_t strided_convs() const;
    /// Input height and width must be multiples of this.
    std::size_t required_divisor() const;
};

/// Appends layers in topological order; each call returns the new node id.
class NetworkBuilder {
public:
    explicit NetworkBuilder(std::size_t input_channels);

    std::size_t input() const { return 0; }
    void set_stage(std::string stage) { stage_ = std::move(stage); }
    std::size_t channels(std::size_t node) const { return nodes_.at(node).out_channels; }

    /// Square kernel with "same" padding kernel/2.
    std::size_t conv(std::size_t in, std::size_t out_channels, int kernel, int stride, bool bias, std::string name);
    std::size_t batch_norm(std::size_t in, std::string name);
    std::size_t relu(std::size_t in);
    std::size_t max_pool(std::size_t in);
    std::size_t upsample(std::size_t in);
    std::size_t add(std::size_t a, std::size_t b);
    std::size_t concat(std::vector<std::size_t> parts);
    std::size_t sigmoid(std::size_t in);

    NetworkSpec finish(std::size_t output, std::vector<std::size_t> side_outputs, VariantId variant,
                       ArchConfig config) &&;

private:
    std::size_t push(LayerNode node);

    std::vector<LayerNode> nodes_;
    std::string stage_;
};

/// Dry-run shape propagation; throws InvalidArgument on any inconsistency.
std::vector<engine::Shape> infer_shapes(const NetworkSpec& spec, engine::Shape input);

/// Structural checks: topological order, channel consistency, side outputs
/// reaching the output, single-channel output at input resolution.
void validate(const NetworkSpec& spec);

/// Receptive field (pixels along one axis) of one output pixel, composing
/// each layer's kernel extent and stride along the widest path.
std::size_t receptive_field(const NetworkSpec& spec);

/// Trainable scalars, batch-norm affine terms included.
std::size_t param_count(const NetworkSpec& spec);

/// Declares every parameter and batch-norm buffer of `spec` (zero weights,
/// unit gamma, unit running variance).
engine::ParameterSet declare_parameters(const NetworkSpec& spec);

/// declare_parameters plus fan-in scaled uniform weights
/// U(-sqrt(6/fan_in), sqrt(6/fan_in)) drawn in node order from the seeded
/// generator; biases and beta start at zero.
engine::ParameterSet init_parameters(const NetworkSpec& spec, std::uint64_t seed);

}  // namespace ssanet::arch
