#include "ssanet/spectral/resampling.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "ssanet/common/error.hpp"

namespace ssanet::spectral {

namespace {

void check_factor(const Signal& x, std::size_t factor, const char* op) {
    if (factor < 2) throw InvalidArgument(std::string(op) + ": factor must be >= 2");
    if (x.size() % factor != 0)
        throw InvalidArgument(std::string(op) + ": factor " + std::to_string(factor) +
                              " does not divide length " + std::to_string(x.size()));
}

}  // namespace

GaussianSpec GaussianSpec::with_min_radius(double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("gaussian sigma must be positive");
    return {sigma, static_cast<std::size_t>(std::ceil(3.0 * sigma))};
}

Signal gaussian_kernel(const GaussianSpec& spec) {
    if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma))
        throw InvalidArgument("gaussian sigma must be positive");
    if (static_cast<double>(spec.radius) < std::ceil(3.0 * spec.sigma))
        throw InvalidArgument("gaussian radius must be >= ceil(3*sigma)");

    const auto r = static_cast<std::ptrdiff_t>(spec.radius);
    std::vector<double> w(2 * spec.radius + 1);
    for (std::ptrdiff_t n = 0; n <= r; ++n) {
        const double v = std::exp(-static_cast<double>(n * n) / (2.0 * spec.sigma * spec.sigma));
        w[static_cast<std::size_t>(r + n)] = v;
        w[static_cast<std::size_t>(r - n)] = v;
    }
    // Sum symmetric pairs outward-in so the mirrored weights stay bitwise equal.
    double total = w[spec.radius];
    for (std::ptrdiff_t n = r; n >= 1; --n) total += 2.0 * w[static_cast<std::size_t>(r + n)];
    for (auto& v : w) v /= total;
    return Signal(std::move(w));
}

Signal gaussian_blur(const Signal& x, const GaussianSpec& spec) {
    const Signal kernel = gaussian_kernel(spec);
    if (kernel.size() > x.size())
        throw InvalidArgument("gaussian_blur: kernel length " + std::to_string(kernel.size()) +
                              " exceeds signal length " + std::to_string(x.size()));
    const auto r = static_cast<std::ptrdiff_t>(spec.radius);
    std::vector<double> out(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        double acc = 0.0;
        for (std::ptrdiff_t m = -r; m <= r; ++m)
            acc += kernel[static_cast<std::size_t>(m + r)] * x.at_wrapped(static_cast<std::ptrdiff_t>(n) - m);
        out[n] = acc;
    }
    return Signal(std::move(out));
}

Signal comb_subsample(const Signal& x, std::size_t factor) {
    check_factor(x, factor, "comb_subsample");
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t n = 0; n < x.size(); n += factor) out[n] = x[n];
    return Signal(std::move(out));
}

Signal decimate(const Signal& x, std::size_t factor) {
    check_factor(x, factor, "decimate");
    std::vector<double> out(x.size() / factor);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = x[n * factor];
    return Signal(std::move(out));
}

Signal upsample_linear(const Signal& x, std::size_t factor) {
    if (factor != 2) throw InvalidArgument("upsample_linear: only factor 2 is supported");
    const std::size_t n = x.size();
    std::vector<double> out(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        out[2 * i] = x[i];
        out[2 * i + 1] = 0.5 * (x[i] + x[(i + 1) % n]);
    }
    return Signal(std::move(out));
}

Signal ssa_downscale(const Signal& x) {
    if (x.size() % 2 != 0)
        throw InvalidArgument("ssa_downscale: length must be even, got " + std::to_string(x.size()));
    return upsample_linear(decimate(x, 2), 2);
}

}  // namespace ssanet::spectral
