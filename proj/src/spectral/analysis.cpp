#include "ssanet/spectral/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "ssanet/common/error.hpp"

namespace ssanet::spectral {

double energy_bandwidth(const Spectrum& s, double rho) {
    if (!(rho > 0.0 && rho <= 1.0)) throw InvalidArgument("energy_bandwidth: rho must be in (0, 1]");
    const double total = s.energy();
    if (!(total > 0.0)) throw InvalidArgument("energy_bandwidth: zero-energy spectrum");

    // Bins k and N-k share a folded frequency; group them by index so equal
    // frequencies compare exactly.
    const std::size_t n = s.size();
    std::map<std::size_t, double> energy_by_index;
    for (std::size_t k = 0; k < n; ++k) energy_by_index[std::min(k, n - k)] += std::norm(s[k]);

    // Relative slack absorbs the rounding of the running sum, so rho = 1
    // stops at the last occupied frequency instead of running past it.
    const double target = rho * total * (1.0 - 1e-12);
    double cumulative = 0.0;
    for (const auto& [index, energy] : energy_by_index) {
        cumulative += energy;
        if (cumulative >= target) return s.frequency(index);
    }
    return s.frequency(n / 2);
}

Signal smooth_random_signal(std::size_t length, std::uint64_t seed) {
    if (length < 8) throw InvalidArgument("smooth_random_signal: length must be at least 8");
    const double sigma = std::min(2.0, (static_cast<double>(length / 2) - 1.0) / 3.0);
    return gaussian_blur(Signal::random(length, seed), GaussianSpec::with_min_radius(sigma));
}

ApproximationReport approximation_report(const Signal& x, const GaussianSpec& spec) {
    if (x.size() < 8 || x.size() % 2 != 0)
        throw InvalidArgument("approximation_report: length must be even and >= 8, got " +
                              std::to_string(x.size()));
    const Signal gauss = gaussian_blur(x, spec);
    const Signal ssa = ssa_downscale(x);
    const Signal comb = comb_subsample(x, 2);

    const double reference = l2_norm(gauss);
    if (!(reference > 0.0)) throw InvalidArgument("approximation_report: zero signal");
    ApproximationReport report;
    report.dist_ssa_gauss = l2_distance(ssa, gauss) / reference;
    report.dist_comb_gauss = l2_distance(comb, gauss) / reference;
    report.bandwidth_in = energy_bandwidth(dft(x));
    report.bandwidth_decimated = energy_bandwidth(dft(decimate(x, 2)));
    return report;
}

}  // namespace ssanet::spectral
