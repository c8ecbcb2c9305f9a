#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "ssanet/engine/tensor.hpp"

namespace ssanet::data {

/// One image with its binary vessel and field-of-view masks, all (1, ., H, W).
/// The vessel mask lies inside the FOV.
struct SampleRecord {
    engine::Tensor image;
    engine::Tensor vessel_mask;
    engine::Tensor fov_mask;
    std::string id;

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct DatasetSplit {
    std::vector<SampleRecord> train;
    std::vector<SampleRecord> test;
};

/// Throws InvalidArgument unless shapes agree, masks are binary and the
/// vessel mask lies inside the FOV.
void check_record(const SampleRecord& record);

/// First n_train records in id order train, the rest test.
DatasetSplit make_split(std::vector<SampleRecord> records, std::size_t n_train);

/// Layout: images/<id>.pgm|ppm, masks/<id>.pgm, fov/<id>.pgm.
void save_dataset(const std::vector<SampleRecord>& records, const std::filesystem::path& dir);
/// Records sorted by id. Vessel masks are clipped to the FOV.
std::vector<SampleRecord> load_dataset(const std::filesystem::path& dir);

}  // namespace ssanet::data
