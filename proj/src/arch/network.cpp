#include "ssanet/arch/network.hpp"

#include <algorithm>
#include <cmath>

#include "ssanet/common/error.hpp"
#include "ssanet/common/rng.hpp"

namespace ssanet::arch {

namespace {

constexpr std::pair<VariantId, std::string_view> kVariantNames[] = {
    {VariantId::MsResNetSsa2, "ssa2"}, {VariantId::MsResNetSsa3, "ssa3"}, {VariantId::MsResNetDec, "dec"},
    {VariantId::ResNetNoMs, "noms"},   {VariantId::DriuLite, "driu"},     {VariantId::DriuNoMs, "driu-noms"},
};

}  // namespace

std::string_view variant_name(VariantId id) {
    for (const auto& [v, name] : kVariantNames)
        if (v == id) return name;
    throw InvalidArgument("unknown variant code " + std::to_string(static_cast<int>(id)));
}

VariantId parse_variant(std::string_view name) {
    for (const auto& [v, n] : kVariantNames)
        if (n == name) return v;
    throw InvalidArgument("unknown variant '" + std::string(name) + "' (expected ssa2, ssa3, dec, noms, driu, driu-noms)");
}

VariantId variant_from_code(std::uint8_t code) {
    if (code > static_cast<std::uint8_t>(VariantId::DriuNoMs))
        throw InvalidArgument("unknown variant code " + std::to_string(code));
    return static_cast<VariantId>(code);
}

const std::vector<VariantId>& all_variants() {
    static const std::vector<VariantId> variants = {VariantId::MsResNetSsa2, VariantId::MsResNetSsa3,
                                                    VariantId::MsResNetDec,  VariantId::ResNetNoMs,
                                                    VariantId::DriuLite,     VariantId::DriuNoMs};
    return variants;
}

ArchConfig ArchConfig::desk() { return ArchConfig{}; }

ArchConfig ArchConfig::resnet34() {
    ArchConfig cfg;
    cfg.profile = Profile::ResNet34;
    cfg.base_channels = 64;
    cfg.blocks_per_stage = {3, 4, 6, 3};
    return cfg;
}

void ArchConfig::validate() const {
    if (profile != Profile::Desk && profile != Profile::ResNet34) throw InvalidArgument("unknown profile");
    if (base_channels < 4) throw InvalidArgument("base_channels must be >= 4");
    if (blocks_per_stage.empty()) throw InvalidArgument("blocks_per_stage must be nonempty");
    if (input_channels != 1 && input_channels != 3) throw InvalidArgument("input_channels must be 1 or 3");
}

std::string_view layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::Input: return "input";
        case LayerKind::Conv: return "conv";
        case LayerKind::BatchNorm: return "batch_norm";
        case LayerKind::Relu: return "relu";
        case LayerKind::MaxPool: return "max_pool";
        case LayerKind::Upsample: return "upsample";
        case LayerKind::Add: return "add";
        case LayerKind::Concat: return "concat";
        case LayerKind::Sigmoid: return "sigmoid";
    }
    return "?";
}

std::size_t NetworkSpec::count(LayerKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [kind](const LayerNode& n) { return n.kind == kind; }));
}

std::size_t NetworkSpec::strided_convs() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const LayerNode& n) {
        return n.kind == LayerKind::Conv && n.stride == 2;
    }));
}

std::size_t NetworkSpec::required_divisor() const {
    // Depth below input resolution, per node.
    std::vector<int> depth(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const LayerNode& n = nodes[i];
        int d = 0;
        for (std::size_t in : n.inputs) d = std::max(d, depth[in]);
        if ((n.kind == LayerKind::Conv && n.stride == 2) || n.kind == LayerKind::MaxPool) ++d;
        if (n.kind == LayerKind::Upsample) --d;
        depth[i] = d;
        deepest = std::max(deepest, d);
    }
    return std::size_t{1} << deepest;
}

NetworkBuilder::NetworkBuilder(std::size_t input_channels) {
    LayerNode in;
    in.kind = LayerKind::Input;
    in.name = "input";
    in.out_channels = input_channels;
    in.stage = "input";
    nodes_.push_back(in);
}

std::size_t NetworkBuilder::push(LayerNode node) {
    for (std::size_t in : node.inputs)
        if (in >= nodes_.size()) throw InvalidArgument("network builder: input id out of range");
    node.stage = stage_;
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
}

std::size_t NetworkBuilder::conv(std::size_t in, std::size_t out_channels, int kernel, int stride, bool bias,
                                 std::string name) {
    LayerNode n;
    n.kind = LayerKind::Conv;
    n.name = std::move(name);
    n.inputs = {in};
    n.in_channels = channels(in);
    n.out_channels = out_channels;
    n.kernel = kernel;
    n.stride = stride;
    n.padding = kernel / 2;
    n.bias = bias;
    return push(std::move(n));
}

std::size_t NetworkBuilder::batch_norm(std::size_t in, std::string name) {
    LayerNode n;
    n.kind = LayerKind::BatchNorm;
    n.name = std::move(name);
    n.inputs = {in};
    n.in_channels = n.out_channels = channels(in);
    return push(std::move(n));
}

namespace {

LayerNode passthrough(LayerKind kind, std::size_t in, std::size_t channels) {
    LayerNode n;
    n.kind = kind;
    n.name = std::string(layer_kind_name(kind));
    n.inputs = {in};
    n.in_channels = n.out_channels = channels;
    return n;
}

}  // namespace

std::size_t NetworkBuilder::relu(std::size_t in) { return push(passthrough(LayerKind::Relu, in, channels(in))); }
std::size_t NetworkBuilder::max_pool(std::size_t in) { return push(passthrough(LayerKind::MaxPool, in, channels(in))); }
std::size_t NetworkBuilder::upsample(std::size_t in) { return push(passthrough(LayerKind::Upsample, in, channels(in))); }
std::size_t NetworkBuilder::sigmoid(std::size_t in) { return push(passthrough(LayerKind::Sigmoid, in, channels(in))); }

std::size_t NetworkBuilder::add(std::size_t a, std::size_t b) {
    LayerNode n = passthrough(LayerKind::Add, a, channels(a));
    n.inputs = {a, b};
    return push(std::move(n));
}

std::size_t NetworkBuilder::concat(std::vector<std::size_t> parts) {
    if (parts.empty()) throw InvalidArgument("network builder: empty concat");
    LayerNode n;
    n.kind = LayerKind::Concat;
    n.name = "concat";
    for (std::size_t p : parts) n.out_channels += channels(p);
    n.in_channels = n.out_channels;
    n.inputs = std::move(parts);
    return push(std::move(n));
}

NetworkSpec NetworkBuilder::finish(std::size_t output, std::vector<std::size_t> side_outputs, VariantId variant,
                                   ArchConfig config) && {
    NetworkSpec spec;
    spec.variant = variant;
    spec.config = std::move(config);
    spec.nodes = std::move(nodes_);
    spec.side_outputs = std::move(side_outputs);
    spec.output = output;
    return spec;
}

std::vector<engine::Shape> infer_shapes(const NetworkSpec& spec, engine::Shape input) {
    using engine::Shape;
    if (spec.nodes.empty() || spec.nodes[0].kind != LayerKind::Input)
        throw InvalidArgument("network: first node must be the input");
    if (input.c != spec.nodes[0].out_channels)
        throw InvalidArgument("network: expected " + std::to_string(spec.nodes[0].out_channels) +
                              " input channels, got " + std::to_string(input.c));
    std::vector<Shape> shapes(spec.nodes.size());
    shapes[0] = input;
    for (std::size_t i = 1; i < spec.nodes.size(); ++i) {
        const LayerNode& n = spec.nodes[i];
        if (n.inputs.empty()) throw InvalidArgument("network: node " + std::to_string(i) + " has no inputs");
        for (std::size_t in : n.inputs)
            if (in >= i) throw InvalidArgument("network: node " + std::to_string(i) + " breaks topological order");
        const Shape s = shapes[n.inputs[0]];
        auto fail = [&](const std::string& what) {
            throw InvalidArgument("network: node " + std::to_string(i) + " (" + n.name + "): " + what);
        };
        switch (n.kind) {
            case LayerKind::Input: fail("duplicate input node"); break;
            case LayerKind::Conv: {
                if (s.c != n.in_channels) fail("channel mismatch");
                const auto span_h = static_cast<long>(s.h) + 2 * n.padding - n.kernel;
                const auto span_w = static_cast<long>(s.w) + 2 * n.padding - n.kernel;
                if (span_h < 0 || span_w < 0) fail("empty output");
                shapes[i] = {s.n, n.out_channels, static_cast<std::size_t>(span_h / n.stride + 1),
                             static_cast<std::size_t>(span_w / n.stride + 1)};
                break;
            }
            case LayerKind::MaxPool:
                if (s.h % 2 || s.w % 2) fail("odd spatial size " + s.str() + " before max pooling");
                shapes[i] = {s.n, s.c, s.h / 2, s.w / 2};
                break;
            case LayerKind::Upsample: shapes[i] = {s.n, s.c, 2 * s.h, 2 * s.w}; break;
            case LayerKind::Add:
                if (n.inputs.size() != 2 || shapes[n.inputs[1]] != s) fail("add operands differ");
                shapes[i] = s;
                break;
            case LayerKind::Concat: {
                std::size_t c = 0;
                for (std::size_t in : n.inputs) {
                    const Shape p = shapes[in];
                    if (p.n != s.n || p.h != s.h || p.w != s.w) fail("concat operands differ in size");
                    c += p.c;
                }
                shapes[i] = {s.n, c, s.h, s.w};
                break;
            }
            case LayerKind::BatchNorm:
            case LayerKind::Relu:
            case LayerKind::Sigmoid: shapes[i] = s; break;
        }
        if (shapes[i].c != n.out_channels) fail("declared channel count disagrees with inferred shape");
    }
    return shapes;
}

void validate(const NetworkSpec& spec) {
    const std::size_t d = spec.required_divisor();
    const engine::Shape probe{1, spec.nodes.at(0).out_channels, 4 * d, 4 * d};
    const auto shapes = infer_shapes(spec, probe);
    if (spec.output >= spec.nodes.size()) throw InvalidArgument("network: output id out of range");
    const engine::Shape out = shapes[spec.output];
    if (out.c != 1 || out.h != probe.h || out.w != probe.w)
        throw InvalidArgument("network: output must be single-channel at input resolution, got " + out.str());

    std::vector<bool> reaches(spec.nodes.size(), false);
    reaches[spec.output] = true;
    for (std::size_t i = spec.output + 1; i-- > 0;)
        if (reaches[i])
            for (std::size_t in : spec.nodes[i].inputs) reaches[in] = true;
    for (std::size_t s : spec.side_outputs)
        if (s >= spec.nodes.size() || !reaches[s])
            throw InvalidArgument("network: side output " + std::to_string(s) + " does not reach the fusion head");
}

std::size_t receptive_field(const NetworkSpec& spec) {
    // Extent in input pixels and spacing (jump) between adjacent samples.
    std::vector<double> extent(spec.nodes.size(), 1.0);
    std::vector<double> jump(spec.nodes.size(), 1.0);
    for (std::size_t i = 1; i < spec.nodes.size(); ++i) {
        const LayerNode& n = spec.nodes[i];
        double r = 0.0;
        for (std::size_t in : n.inputs) r = std::max(r, extent[in]);
        double j = jump[n.inputs.at(0)];
        switch (n.kind) {
            case LayerKind::Conv:
                r += (n.kernel - 1) * j;
                j *= n.stride;
                break;
            case LayerKind::MaxPool:
                r += j;
                j *= 2.0;
                break;
            case LayerKind::Upsample:
                // Odd outputs blend two neighbouring inputs.
                r += j;
                j /= 2.0;
                break;
            default: break;
        }
        extent[i] = r;
        jump[i] = j;
    }
    return static_cast<std::size_t>(std::ceil(extent[spec.output] - 1e-9));
}

std::size_t param_count(const NetworkSpec& spec) {
    std::size_t total = 0;
    for (const LayerNode& n : spec.nodes) {
        if (n.kind == LayerKind::Conv)
            total += n.out_channels * n.in_channels * static_cast<std::size_t>(n.kernel * n.kernel) +
                     (n.bias ? n.out_channels : 0);
        if (n.kind == LayerKind::BatchNorm) total += 2 * n.out_channels;
    }
    return total;
}

engine::ParameterSet declare_parameters(const NetworkSpec& spec) {
    engine::ParameterSet params;
    for (const LayerNode& n : spec.nodes) {
        if (n.kind == LayerKind::Conv) {
            params.add(n.name + ".weight", {static_cast<std::uint32_t>(n.out_channels),
                                            static_cast<std::uint32_t>(n.in_channels),
                                            static_cast<std::uint32_t>(n.kernel), static_cast<std::uint32_t>(n.kernel)});
            if (n.bias) params.add(n.name + ".bias", {static_cast<std::uint32_t>(n.out_channels)});
        } else if (n.kind == LayerKind::BatchNorm) {
            const auto c = static_cast<std::uint32_t>(n.out_channels);
            params.add(n.name + ".gamma", {c}).value.fill(1.0);
            params.add(n.name + ".beta", {c});
            params.add_buffer(n.name + ".running_mean", {c}, 0.0);
            params.add_buffer(n.name + ".running_var", {c}, 1.0);
        }
    }
    return params;
}

engine::ParameterSet init_parameters(const NetworkSpec& spec, std::uint64_t seed) {
    engine::ParameterSet params = declare_parameters(spec);
    Rng rng(seed);
    for (const LayerNode& n : spec.nodes) {
        if (n.kind != LayerKind::Conv) continue;
        const double fan_in = static_cast<double>(n.in_channels) * n.kernel * n.kernel;
        const double bound = std::sqrt(6.0 / fan_in);
        for (double& w : params.at(n.name + ".weight").value.values()) w = rng.uniform(-bound, bound);
    }
    return params;
}

}  // namespace ssanet::arch
