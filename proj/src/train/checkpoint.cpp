#include "ssanet/train/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "ssanet/arch/variants.hpp"

namespace ssanet::train {

namespace {

constexpr char kMagic[4] = {'S', 'S', 'A', 'N'};
constexpr std::size_t kTrailerBytes = 16;

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    template <typename T>
    void uint(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    std::size_t remaining() const { return in_.size() - pos_; }
    std::span<const std::uint8_t> take(std::size_t n) {
        if (remaining() < n)
            throw CheckpointError(CheckpointError::Kind::Truncated,
                                  "checkpoint truncated at byte " + std::to_string(in_.size()));
        const auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    template <typename T>
    T uint() {
        const auto s = take(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(s[i]) << (8 * i));
        return v;
    }
    double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

void write_blob(Writer& w, const std::string& name, const std::vector<std::uint32_t>& dims,
                const engine::Tensor& value) {
    w.uint(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.uint(static_cast<std::uint8_t>(dims.size()));
    for (std::uint32_t d : dims) w.uint(d);
    for (double v : value.values()) w.f64(v);
}

[[noreturn]] void corrupt(const std::string& what) {
    throw CheckpointError(CheckpointError::Kind::Corrupt, "checkpoint: " + what);
}

}  // namespace

engine::ParameterSet model_parameters(const arch::NetworkSpec& spec) {
    engine::ParameterSet params = arch::declare_parameters(spec);
    engine::Buffer& norm = params.add_buffer(kInputNorm, {2});
    norm.value[1] = 1.0;
    return params;
}

engine::Tensor normalize_input(const engine::ParameterSet& params, const engine::Tensor& image) {
    const engine::Tensor& norm = params.buffer(kInputNorm).value;
    engine::Tensor out = image;
    for (double& v : out.values()) v = (v - norm[0]) / norm[1];
    return out;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.uint(kCheckpointVersion);
    w.uint(static_cast<std::uint8_t>(ckpt.variant));
    w.uint(static_cast<std::uint32_t>(ckpt.arch.profile));
    w.uint(ckpt.arch.base_channels);
    w.uint(ckpt.arch.input_channels);
    w.uint(static_cast<std::uint32_t>(ckpt.arch.batch_norm ? 1 : 0));
    w.uint(static_cast<std::uint32_t>(ckpt.arch.blocks_per_stage.size()));
    for (std::uint32_t b : ckpt.arch.blocks_per_stage) w.uint(b);
    for (const auto& [name, p] : ckpt.params.parameters()) write_blob(w, name, p.dims, p.value);
    for (const auto& [name, b] : ckpt.params.buffers()) write_blob(w, name, b.dims, b.value);
    w.uint(ckpt.step);
    w.uint(ckpt.seed);
    return w.take();
}

Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw CheckpointError(CheckpointError::Kind::BadMagic, "checkpoint: bad magic, expected SSAN");
    r.take(sizeof kMagic);
    const auto version = r.uint<std::uint32_t>();
    if (version != kCheckpointVersion)
        throw CheckpointError(CheckpointError::Kind::VersionMismatch,
                              "checkpoint: version " + std::to_string(version) + ", expected " +
                                  std::to_string(kCheckpointVersion));

    Checkpoint ckpt;
    const auto code = r.uint<std::uint8_t>();
    try {
        ckpt.variant = arch::variant_from_code(code);
    } catch (const InvalidArgument&) {
        corrupt("unknown variant code " + std::to_string(code));
    }
    const auto profile = r.uint<std::uint32_t>();
    if (profile > static_cast<std::uint32_t>(arch::Profile::ResNet34)) corrupt("unknown profile " + std::to_string(profile));
    ckpt.arch.profile = static_cast<arch::Profile>(profile);
    ckpt.arch.base_channels = r.uint<std::uint32_t>();
    ckpt.arch.input_channels = r.uint<std::uint32_t>();
    const auto bn = r.uint<std::uint32_t>();
    if (bn > 1) corrupt("batch_norm flag must be 0 or 1");
    ckpt.arch.batch_norm = bn == 1;
    const auto stages = r.uint<std::uint32_t>();
    if (stages > 64) corrupt("implausible stage count " + std::to_string(stages));
    ckpt.arch.blocks_per_stage.resize(stages);
    for (auto& b : ckpt.arch.blocks_per_stage) b = r.uint<std::uint32_t>();

    arch::NetworkSpec spec;
    try {
        spec = arch::build_variant(ckpt.variant, ckpt.arch);
    } catch (const InvalidArgument& e) {
        corrupt(std::string("invalid architecture: ") + e.what());
    }
    ckpt.params = model_parameters(spec);

    std::set<std::string> seen;
    while (r.remaining() > kTrailerBytes) {
        const auto len = r.uint<std::uint16_t>();
        const auto name_bytes = r.take(len);
        const std::string name(name_bytes.begin(), name_bytes.end());
        const auto rank = r.uint<std::uint8_t>();
        std::vector<std::uint32_t> dims(rank);
        for (auto& d : dims) d = r.uint<std::uint32_t>();
        engine::Tensor* target = nullptr;
        const std::vector<std::uint32_t>* expected = nullptr;
        if (ckpt.params.contains(name)) {
            target = &ckpt.params.at(name).value;
            expected = &ckpt.params.at(name).dims;
        } else if (ckpt.params.contains_buffer(name)) {
            target = &ckpt.params.buffer(name).value;
            expected = &ckpt.params.buffer(name).dims;
        } else {
            corrupt("unexpected entry '" + name + "' for this architecture");
        }
        if (dims != *expected) corrupt("dims of '" + name + "' do not match the architecture");
        if (!seen.insert(name).second) corrupt("duplicate entry '" + name + "'");
        for (double& v : target->values()) v = r.f64();
    }
    const std::size_t declared = ckpt.params.parameters().size() + ckpt.params.buffers().size();
    if (r.remaining() < kTrailerBytes || seen.size() != declared)
        throw CheckpointError(CheckpointError::Kind::Truncated,
                              "checkpoint truncated: " + std::to_string(seen.size()) + " of " +
                                  std::to_string(declared) + " entries present");
    ckpt.step = r.uint<std::uint64_t>();
    ckpt.seed = r.uint<std::uint64_t>();
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const auto bytes = serialize_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError(CheckpointError::Kind::Io, "cannot write checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError(CheckpointError::Kind::Io, "cannot open checkpoint " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_checkpoint(bytes);
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const arch::ArchConfig& expected) {
    Checkpoint ckpt = load_checkpoint(path);
    if (!(ckpt.arch == expected))
        throw CheckpointError(CheckpointError::Kind::ConfigMismatch,
                              "checkpoint architecture config does not match the requested one (profile " +
                                  std::to_string(static_cast<std::uint32_t>(ckpt.arch.profile)) + " vs " +
                                  std::to_string(static_cast<std::uint32_t>(expected.profile)) + ")");
    return ckpt;
}

}  // namespace ssanet::train
