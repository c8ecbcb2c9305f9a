#include "ssanet/data/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace ssanet::data {

namespace {

using Kind = ImageFormatError::Kind;

/// Header tokens are whitespace-separated; '#' starts a comment to end of line.
class HeaderReader {
public:
    HeaderReader(const std::vector<unsigned char>& bytes, const std::string& path) : bytes_(bytes), path_(path) {}

    std::size_t next_number(const char* field) {
        skip_space_and_comments();
        std::size_t start = pos_;
        std::size_t value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > (1u << 24)) throw ImageFormatError(Kind::BadHeader, path_ + ": " + field + " too large");
            ++pos_;
        }
        if (pos_ == start) {
            if (pos_ >= bytes_.size())
                throw ImageFormatError(Kind::Truncated, path_ + ": header ends before " + field);
            throw ImageFormatError(Kind::BadHeader, path_ + ": expected " + field);
        }
        return value;
    }

    /// Exactly one whitespace byte separates the header from the raster.
    std::size_t raster_start() {
        if (pos_ >= bytes_.size()) throw ImageFormatError(Kind::Truncated, path_ + ": missing raster");
        if (!std::isspace(bytes_[pos_])) throw ImageFormatError(Kind::BadHeader, path_ + ": malformed header end");
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<unsigned char>& bytes_;
    std::string path_;
    std::size_t pos_ = 2;
};

}  // namespace

engine::Tensor read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageFormatError(Kind::Io, "cannot open " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        throw ImageFormatError(Kind::BadMagic, path.string() + ": not a binary PGM (P5) or PPM (P6) file");
    const std::size_t channels = bytes[1] == '5' ? 1 : 3;

    HeaderReader header(bytes, path.string());
    const std::size_t width = header.next_number("width");
    const std::size_t height = header.next_number("height");
    const std::size_t maxval = header.next_number("maxval");
    if (maxval != 255)
        throw ImageFormatError(Kind::BadMaxval, path.string() + ": maxval must be 255, got " + std::to_string(maxval));
    if (width == 0 || height == 0) throw ImageFormatError(Kind::BadHeader, path.string() + ": empty image");
    const std::size_t start = header.raster_start();

    const std::size_t needed = width * height * channels;
    if (bytes.size() - start < needed)
        throw ImageFormatError(Kind::Truncated, path.string() + ": raster has " + std::to_string(bytes.size() - start) +
                                                    " bytes, expected " + std::to_string(needed));

    engine::Tensor image(engine::Shape{1, channels, height, width});
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x)
            for (std::size_t c = 0; c < channels; ++c)
                image(0, c, y, x) = bytes[start + (y * width + x) * channels + c] / 255.0;
    return image;
}

void write_image(const engine::Tensor& image, const std::filesystem::path& path) {
    const engine::Shape s = image.shape();
    if (s.n != 1 || (s.c != 1 && s.c != 3) || s.h == 0 || s.w == 0)
        throw InvalidArgument("write_image: expected shape 1x1xHxW or 1x3xHxW, got " + s.str());
    std::string header = std::string(s.c == 1 ? "P5" : "P6") + "\n" + std::to_string(s.w) + " " +
                         std::to_string(s.h) + "\n255\n";
    std::vector<unsigned char> raster(s.numel());
    for (std::size_t y = 0; y < s.h; ++y)
        for (std::size_t x = 0; x < s.w; ++x)
            for (std::size_t c = 0; c < s.c; ++c) {
                const double v = std::clamp(image(0, c, y, x), 0.0, 1.0);
                raster[(y * s.w + x) * s.c + c] = static_cast<unsigned char>(std::lround(v * 255.0));
            }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageFormatError(Kind::Io, "cannot open " + path.string() + " for writing");
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    if (!out) throw ImageFormatError(Kind::Io, "write failed: " + path.string());
}

}  // namespace ssanet::data
