#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ssanet/arch/network.hpp"
#include "ssanet/common/error.hpp"
#include "ssanet/engine/parameters.hpp"

namespace ssanet::train {

inline constexpr std::uint32_t kCheckpointVersion = 1;
/// Buffer holding the input normalization [mean, std].
inline constexpr const char* kInputNorm = "input.norm";

class CheckpointError : public DataError {
public:
    enum class Kind { BadMagic, VersionMismatch, Truncated, ConfigMismatch, Corrupt, Io };

    CheckpointError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct Checkpoint {
    arch::VariantId variant = arch::VariantId::MsResNetSsa2;
    arch::ArchConfig arch;
    /// Parameters, batch-norm running statistics and input.norm.
    engine::ParameterSet params;
    std::uint64_t step = 0;
    std::uint64_t seed = 0;
};

/// declare_parameters(spec) plus input.norm = [0, 1].
engine::ParameterSet model_parameters(const arch::NetworkSpec& spec);

/// (image - mean) / std with the checkpoint's input.norm.
engine::Tensor normalize_input(const engine::ParameterSet& params, const engine::Tensor& image);

/// Layout (little-endian): "SSAN", u32 version, u8 variant code, u32 profile,
/// u32 base_channels, u32 input_channels, u32 batch_norm, u32 block count,
/// u32 blocks..., then per parameter and buffer in name order: u16 name
/// length, name bytes, u8 rank, u32 dims..., f64 values...; then u64 step,
/// u64 seed.
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
/// Rebuilds the parameter set of the stored variant and config; every
/// declared name must appear exactly once with matching dims.
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// Throws CheckpointError(ConfigMismatch) unless the stored config equals
/// `expected`.
Checkpoint load_checkpoint(const std::filesystem::path& path, const arch::ArchConfig& expected);

}  // namespace ssanet::train
