#pragma once

#include <cstddef>

#include "ssanet/spectral/signal.hpp"

namespace ssanet::spectral {

/// Sampled continuous Gaussian of standard deviation `sigma` (in samples),
/// truncated at +/- radius and normalized to unit sum.
struct GaussianSpec {
    double sigma = 0.0;
    std::size_t radius = 0;

    /// Smallest admissible radius, ceil(3*sigma).
    static GaussianSpec with_min_radius(double sigma);
};

/// Kernel of length 2*radius+1; element radius+n holds the weight of offset n.
Signal gaussian_kernel(const GaussianSpec& spec);

/// Circular convolution of x with gaussian_kernel(spec).
Signal gaussian_blur(const Signal& x, const GaussianSpec& spec);

/// Keeps every factor-th sample, zeroes the rest; length unchanged.
Signal comb_subsample(const Signal& x, std::size_t factor = 2);

/// Keeps every factor-th sample; length divided by factor.
Signal decimate(const Signal& x, std::size_t factor = 2);

/// First-order hold by 2: out[2i] = x[i], out[2i+1] = (x[i] + x[i+1 mod n]) / 2.
/// Only factor 2 is supported.
Signal upsample_linear(const Signal& x, std::size_t factor = 2);

/// Scale-space approximation with identity stride weights:
/// upsample_linear(decimate(x, 2)).
Signal ssa_downscale(const Signal& x);

}  // namespace ssanet::spectral
