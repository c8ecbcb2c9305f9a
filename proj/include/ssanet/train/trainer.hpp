#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "ssanet/data/dataset.hpp"
#include "ssanet/train/checkpoint.hpp"

namespace ssanet::train {

struct TrainConfig {
    arch::VariantId variant = arch::VariantId::MsResNetSsa2;
    arch::ArchConfig arch = arch::ArchConfig::desk();
    std::size_t epochs = 60;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::size_t batch_size = 4;
    /// Independent horizontal and vertical flips, each with probability 1/2.
    bool flips = true;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    /// Mean batch loss over the epoch.
    double loss = 0.0;
    double seconds = 0.0;
};

using History = std::vector<EpochRecord>;

struct TrainResult {
    Checkpoint checkpoint;
    History history;
};

/// Mean and population std of image values inside the FOV over all records.
/// A std below 1e-12 is replaced by 1.
std::pair<double, double> input_statistics(const std::vector<data::SampleRecord>& records);

/// Single-threaded minibatch SGD with momentum on the balanced BCE loss.
/// Deterministic in (cfg, records). Throws NumericalError naming the epoch
/// when a batch loss is not finite.
TrainResult train(const TrainConfig& cfg, const std::vector<data::SampleRecord>& records,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Header epoch,loss,seconds.
void write_history_csv(const History& history, const std::filesystem::path& path);

}  // namespace ssanet::train
