#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssanet/data/dataset.hpp"

namespace ssanet::data {

/// Procedural fundus-like image: a smooth background with Gaussian noise
/// inside a circular field of view, crossed by dark quadratic Bezier tubes.
struct SynthConfig {
    std::size_t image_size = 128;
    std::size_t vessels_min = 6;
    std::size_t vessels_max = 12;
    double radius_min = 1.0;
    double radius_max = 4.0;
    double contrast_min = 0.1;
    double contrast_max = 0.5;
    double noise_sigma = 0.05;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Fully determined by cfg (seed included). The vessel mask is the exact
/// tube support clipped to the FOV.
SampleRecord generate_synthetic(const SynthConfig& cfg, std::string id = "synthetic");

/// `count` records with ids synth_000, synth_001, ...; record i uses seed
/// derive_seed(cfg.seed, i).
std::vector<SampleRecord> generate_dataset(const SynthConfig& cfg, std::size_t count);

}  // namespace ssanet::data
