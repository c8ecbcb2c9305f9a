#pragma once

#include "ssanet/spectral/resampling.hpp"
#include "ssanet/spectral/signal.hpp"

namespace ssanet::spectral {

/// Smallest angular frequency w such that the bins whose folded frequency
/// is <= w hold at least `rho` of the spectral energy. Result in [0, pi].
double energy_bandwidth(const Spectrum& s, double rho = 0.95);

/// How closely the resampling chains track Gaussian blurring of one signal.
struct ApproximationReport {
    /// ||ssa(x) - gauss(x)|| / ||gauss(x)||
    double dist_ssa_gauss = 0.0;
    /// ||comb(x) - gauss(x)|| / ||gauss(x)||
    double dist_comb_gauss = 0.0;
    double bandwidth_in = 0.0;
    double bandwidth_decimated = 0.0;
};

/// Signal::random(length, seed) blurred with sigma = min(2, (length/2 - 1)/3)
/// at minimal radius; at sigma 2 nearly all energy sits below pi/2.
Signal smooth_random_signal(std::size_t length, std::uint64_t seed);

/// Requires an even length of at least 8.
ApproximationReport approximation_report(const Signal& x, const GaussianSpec& spec);

}  // namespace ssanet::spectral
