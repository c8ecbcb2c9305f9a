#pragma once

#include <filesystem>

#include "ssanet/common/error.hpp"
#include "ssanet/engine/tensor.hpp"

namespace ssanet::data {

/// Netpbm decoding failure; kind() tells the cases apart.
class ImageFormatError : public DataError {
public:
    enum class Kind { BadMagic, BadHeader, BadMaxval, Truncated, Io };

    ImageFormatError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Reads binary PGM (P5, one channel) or PPM (P6, channels R,G,B), maxval
/// 255, into a (1, C, H, W) tensor with values byte/255.
engine::Tensor read_image(const std::filesystem::path& path);

/// Writes a (1, 1|3, H, W) tensor as P5/P6, quantizing round(v*255) after
/// clamping to [0, 1].
void write_image(const engine::Tensor& image, const std::filesystem::path& path);

}  // namespace ssanet::data
