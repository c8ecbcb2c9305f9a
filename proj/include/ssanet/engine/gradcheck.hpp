#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ssanet::engine {

/// Loss value plus the active pattern of every non-smooth op that produced it.
struct Evaluation {
    double loss = 0.0;
    std::uint64_t kink_signature = 0;
};

/// One tensor under test: its live values (perturbed in place and restored)
/// and the analytic gradient to compare against.
struct Probe {
    std::string name;
    std::span<double> values;
    std::span<const double> analytic;
};

struct GradCheckOptions {
    double epsilon = 1e-5;
    /// Coordinates sampled per probe; all of them if the probe is smaller.
    std::size_t samples_per_probe = 50;
    std::uint64_t seed = 0;
    /// Denominator floor of the relative error, for near-zero gradients.
    double floor = 1e-8;
};

struct GradCheckResult {
    std::string name;
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    /// Coordinates whose +/- epsilon evaluations crossed a kink.
    std::size_t skipped = 0;
};

/// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor);

/// Central differences (f(v+e) - f(v-e)) / 2e on sampled coordinates of each
/// probe. Coordinates where either evaluation changes the kink signature are
/// skipped and replaced by another sample.
std::vector<GradCheckResult> check_gradients(const std::function<Evaluation()>& evaluate,
                                             std::span<const Probe> probes, const GradCheckOptions& options);

/// Finite-difference suite over every differentiable engine primitive, on
/// seeded random inputs. Names: conv2d, conv2d_stride2, max_pool2d,
/// bilinear_upsample2d, batch_norm2d_train, batch_norm2d_eval, relu, sigmoid,
/// add, concat_channels, balanced_bce_loss.
std::vector<GradCheckResult> primitive_gradchecks(std::uint64_t seed, const GradCheckOptions& options = {});

}  // namespace ssanet::engine
