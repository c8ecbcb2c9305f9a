#include "ssanet/arch/variants.hpp"

#include <string>

#include "ssanet/common/error.hpp"

namespace ssanet::arch {

namespace {

class FamilyBuilder {
public:
    explicit FamilyBuilder(const ArchConfig& cfg) : cfg_(cfg), b_(cfg.input_channels) {}

    NetworkBuilder& graph() { return b_; }

    /// conv -> [bn] -> relu; the conv carries a bias only without batch norm.
    std::size_t conv_unit(std::size_t x, std::size_t channels, int stride, const std::string& prefix) {
        std::size_t y = b_.conv(x, channels, 3, stride, !cfg_.batch_norm, prefix + ".conv");
        if (cfg_.batch_norm) y = b_.batch_norm(y, prefix + ".bn");
        return b_.relu(y);
    }

    /// conv-bn-relu-conv-bn, identity skip, relu after the sum.
    std::size_t residual_block(std::size_t x, const std::string& prefix) {
        const std::size_t channels = b_.channels(x);
        std::size_t y = b_.conv(x, channels, 3, 1, !cfg_.batch_norm, prefix + ".conv1");
        if (cfg_.batch_norm) y = b_.batch_norm(y, prefix + ".bn1");
        y = b_.relu(y);
        y = b_.conv(y, channels, 3, 1, !cfg_.batch_norm, prefix + ".conv2");
        if (cfg_.batch_norm) y = b_.batch_norm(y, prefix + ".bn2");
        return b_.relu(b_.add(y, x));
    }

    std::size_t residual_blocks(std::size_t x, std::uint32_t count, const std::string& stage) {
        for (std::uint32_t k = 0; k < count; ++k) x = residual_block(x, stage + ".block" + std::to_string(k));
        return x;
    }

    std::size_t double_conv(std::size_t x, std::size_t channels, const std::string& stage) {
        x = b_.relu(b_.conv(x, channels, 3, 1, true, stage + ".conv1"));
        return b_.relu(b_.conv(x, channels, 3, 1, true, stage + ".conv2"));
    }

    /// Brings each side output to full resolution with repeated x2 upsampling,
    /// then concat -> 1x1 conv -> sigmoid.
    NetworkSpec fuse(std::vector<std::size_t> sides, const std::vector<int>& depths, VariantId id) && {
        b_.set_stage("fusion");
        std::vector<std::size_t> full;
        for (std::size_t k = 0; k < sides.size(); ++k) {
            std::size_t s = sides[k];
            for (int d = 0; d < depths[k]; ++d) s = b_.upsample(s);
            full.push_back(s);
        }
        const std::size_t cat = b_.concat(full);
        const std::size_t logits = b_.conv(cat, 1, 1, 1, true, "fuse.conv");
        const std::size_t out = b_.sigmoid(logits);
        return std::move(b_).finish(out, std::move(sides), id, cfg_);
    }

private:
    const ArchConfig& cfg_;
    NetworkBuilder b_;
};

NetworkSpec build_residual(VariantId id, const ArchConfig& cfg) {
    FamilyBuilder f(cfg);
    NetworkBuilder& g = f.graph();
    const std::size_t stages = cfg.blocks_per_stage.size();
    const bool scale_space = id == VariantId::MsResNetSsa2 || id == VariantId::MsResNetSsa3;
    const int transition_stride = id == VariantId::ResNetNoMs ? 1 : 2;

    std::vector<std::size_t> sides;
    std::vector<int> depths;

    g.set_stage("stem");
    std::size_t x = f.conv_unit(g.input(), cfg.base_channels, 1, "stem");

    if (id == VariantId::MsResNetSsa3) {
        g.set_stage("ssa_pre");
        std::size_t y = f.conv_unit(x, cfg.base_channels, 2, "ssa_pre.down");
        y = f.residual_blocks(y, cfg.blocks_per_stage[0], "ssa_pre");
        x = g.upsample(y);
        sides.push_back(x);
        depths.push_back(0);
    }

    g.set_stage("stage0");
    x = f.residual_blocks(x, cfg.blocks_per_stage[0], "stage0");
    sides.push_back(x);
    depths.push_back(0);

    int depth = 0;
    for (std::size_t s = 1; s < stages; ++s) {
        const std::string stage = "stage" + std::to_string(s);
        g.set_stage(stage);
        const std::size_t channels = std::size_t{cfg.base_channels} << s;
        x = f.conv_unit(x, channels, transition_stride, stage + ".down");
        x = f.residual_blocks(x, cfg.blocks_per_stage[s], stage);
        if (scale_space) {
            x = g.upsample(x);
        } else if (transition_stride == 2) {
            ++depth;
        }
        sides.push_back(x);
        depths.push_back(depth);
    }
    return std::move(f).fuse(std::move(sides), depths, id);
}

NetworkSpec build_driu(VariantId id, const ArchConfig& cfg) {
    FamilyBuilder f(cfg);
    NetworkBuilder& g = f.graph();
    const bool pooled = id == VariantId::DriuLite;

    std::vector<std::size_t> sides;
    std::vector<int> depths;
    std::size_t x = g.input();
    for (std::size_t s = 0; s < cfg.blocks_per_stage.size(); ++s) {
        const std::string stage = "stage" + std::to_string(s);
        g.set_stage(stage);
        if (s > 0 && pooled) x = g.max_pool(x);
        x = f.double_conv(x, std::size_t{cfg.base_channels} << s, stage);
        sides.push_back(x);
        depths.push_back(pooled ? static_cast<int>(s) : 0);
    }
    return std::move(f).fuse(std::move(sides), depths, id);
}

}  // namespace

NetworkSpec build_variant(VariantId id, const ArchConfig& cfg) {
    cfg.validate();
    NetworkSpec spec;
    switch (id) {
        case VariantId::MsResNetSsa2:
        case VariantId::MsResNetSsa3:
        case VariantId::MsResNetDec:
        case VariantId::ResNetNoMs: spec = build_residual(id, cfg); break;
        case VariantId::DriuLite:
        case VariantId::DriuNoMs: spec = build_driu(id, cfg); break;
        default: throw InvalidArgument("unknown variant code " + std::to_string(static_cast<int>(id)));
    }
    validate(spec);
    return spec;
}

}  // namespace ssanet::arch
