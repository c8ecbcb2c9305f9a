#include "ssanet/data/dataset.hpp"

#include <algorithm>
#include <set>

#include "ssanet/common/error.hpp"
#include "ssanet/data/image_io.hpp"

namespace ssanet::data {

namespace fs = std::filesystem;

namespace {

bool is_binary(const engine::Tensor& t) {
    return std::all_of(t.values().begin(), t.values().end(), [](double v) { return v == 0.0 || v == 1.0; });
}

}  // namespace

void check_record(const SampleRecord& r) {
    const engine::Shape s = r.image.shape();
    const engine::Shape mask{1, 1, s.h, s.w};
    if (s.n != 1 || (s.c != 1 && s.c != 3)) throw InvalidArgument(r.id + ": image must be 1x1xHxW or 1x3xHxW");
    if (r.vessel_mask.shape() != mask || r.fov_mask.shape() != mask)
        throw InvalidArgument(r.id + ": mask shapes must be 1x1x" + std::to_string(s.h) + "x" + std::to_string(s.w));
    if (!is_binary(r.vessel_mask) || !is_binary(r.fov_mask)) throw InvalidArgument(r.id + ": masks must be binary");
    for (std::size_t i = 0; i < r.vessel_mask.size(); ++i)
        if (r.vessel_mask[i] > r.fov_mask[i]) throw InvalidArgument(r.id + ": vessel mask leaves the field of view");
}

DatasetSplit make_split(std::vector<SampleRecord> records, std::size_t n_train) {
    if (n_train >= records.size())
        throw InvalidArgument("make_split: n_train " + std::to_string(n_train) + " must be below record count " +
                              std::to_string(records.size()));
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].id == records[i - 1].id) throw InvalidArgument("make_split: duplicate id " + records[i].id);
    DatasetSplit split;
    for (std::size_t i = 0; i < records.size(); ++i)
        (i < n_train ? split.train : split.test).push_back(std::move(records[i]));
    return split;
}

void save_dataset(const std::vector<SampleRecord>& records, const fs::path& dir) {
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "masks");
    fs::create_directories(dir / "fov");
    for (const SampleRecord& r : records) {
        check_record(r);
        const char* ext = r.image.shape().c == 1 ? ".pgm" : ".ppm";
        write_image(r.image, dir / "images" / (r.id + ext));
        write_image(r.vessel_mask, dir / "masks" / (r.id + ".pgm"));
        write_image(r.fov_mask, dir / "fov" / (r.id + ".pgm"));
    }
}

std::vector<SampleRecord> load_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir / "images")) throw DataError(dir.string() + ": missing images/ directory");
    std::set<std::string> seen;
    std::vector<SampleRecord> records;
    for (const auto& entry : fs::directory_iterator(dir / "images")) {
        const fs::path p = entry.path();
        if (p.extension() != ".pgm" && p.extension() != ".ppm") continue;
        SampleRecord r;
        r.id = p.stem().string();
        if (!seen.insert(r.id).second) throw DataError(dir.string() + ": duplicate image id " + r.id);
        r.image = read_image(p);
        const fs::path mask_path = dir / "masks" / (r.id + ".pgm");
        const fs::path fov_path = dir / "fov" / (r.id + ".pgm");
        if (!fs::exists(mask_path) || !fs::exists(fov_path)) throw DataError(r.id + ": missing mask or fov file");
        r.vessel_mask = read_image(mask_path);
        r.fov_mask = read_image(fov_path);
        if (!is_binary(r.vessel_mask) || !is_binary(r.fov_mask))
            throw DataError(r.id + ": masks must contain only 0 and 255");
        if (r.vessel_mask.shape() != r.fov_mask.shape() || r.vessel_mask.shape().h != r.image.shape().h ||
            r.vessel_mask.shape().w != r.image.shape().w || r.vessel_mask.shape().c != 1)
            throw DataError(r.id + ": image and mask sizes differ");
        for (std::size_t i = 0; i < r.vessel_mask.size(); ++i) r.vessel_mask[i] *= r.fov_mask[i];
        records.push_back(std::move(r));
    }
    if (records.empty()) throw DataError(dir.string() + ": no images found");
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return records;
}

}  // namespace ssanet::data
