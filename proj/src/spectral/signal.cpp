#include "ssanet/spectral/signal.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ssanet/common/csv.hpp"
#include "ssanet/common/error.hpp"
#include "ssanet/common/rng.hpp"

namespace ssanet::spectral {

Signal::Signal(std::vector<double> samples) : samples_(std::move(samples)) {
    if (samples_.size() < 2) throw InvalidArgument("signal needs at least 2 samples");
    for (double v : samples_)
        if (!std::isfinite(v)) throw InvalidArgument("signal samples must be finite");
}

double Signal::at_wrapped(std::ptrdiff_t i) const {
    const auto n = static_cast<std::ptrdiff_t>(samples_.size());
    return samples_[static_cast<std::size_t>(((i % n) + n) % n)];
}

Signal Signal::constant(std::size_t length, double value) {
    return Signal(std::vector<double>(length, value));
}

Signal Signal::impulse(std::size_t length, std::size_t position) {
    std::vector<double> v(length, 0.0);
    v.at(position) = 1.0;
    return Signal(std::move(v));
}

Signal Signal::alternating(std::size_t length) {
    std::vector<double> v(length);
    for (std::size_t n = 0; n < length; ++n) v[n] = (n % 2 == 0) ? 1.0 : -1.0;
    return Signal(std::move(v));
}

Signal Signal::cosine(std::size_t length, double cycles) {
    std::vector<double> v(length);
    for (std::size_t n = 0; n < length; ++n)
        v[n] = std::cos(2.0 * std::numbers::pi * cycles * static_cast<double>(n) /
                        static_cast<double>(length));
    return Signal(std::move(v));
}

Signal Signal::random(std::size_t length, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(length);
    for (auto& s : v) s = rng.uniform(-1.0, 1.0);
    return Signal(std::move(v));
}

Signal Signal::shifted(std::ptrdiff_t offset) const {
    std::vector<double> v(size());
    for (std::size_t n = 0; n < size(); ++n)
        v[n] = at_wrapped(static_cast<std::ptrdiff_t>(n) - offset);
    return Signal(std::move(v));
}

Spectrum::Spectrum(std::vector<std::complex<double>> bins) : bins_(std::move(bins)) {
    if (bins_.size() < 2) throw InvalidArgument("spectrum needs at least 2 bins");
}

double Spectrum::frequency(std::size_t k) const {
    const double n = static_cast<double>(bins_.size());
    const double w = 2.0 * std::numbers::pi * static_cast<double>(k) / n;
    return std::min(w, 2.0 * std::numbers::pi - w);
}

double Spectrum::energy() const {
    double e = 0.0;
    for (const auto& b : bins_) e += std::norm(b);
    return e;
}

Spectrum dft(const Signal& x) {
    const std::size_t n = x.size();
    // Twiddles built conjugate-symmetric so real inputs give exactly
    // conjugate-symmetric spectra.
    std::vector<std::complex<double>> twiddle(n);
    for (std::size_t m = 0; m <= n / 2; ++m) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
        twiddle[m] = {std::cos(angle), std::sin(angle)};
    }
    for (std::size_t m = n / 2 + 1; m < n; ++m) twiddle[m] = std::conj(twiddle[n - m]);

    std::vector<std::complex<double>> bins(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) acc += x[i] * twiddle[(k * i) % n];
        bins[k] = acc;
    }
    return Spectrum(std::move(bins));
}

double l2_distance(const Signal& a, const Signal& b) {
    if (a.size() != b.size()) throw InvalidArgument("l2_distance: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

double l2_norm(const Signal& a) {
    double acc = 0.0;
    for (double v : a.samples()) acc += v * v;
    return std::sqrt(acc);
}

void write_signal_csv(const Signal& x, const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) rows.push_back({std::to_string(i), format_double(x[i])});
    write_csv(path, {"index", "value"}, rows);
}

Signal read_signal_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.header != std::vector<std::string>{"index", "value"})
        throw DataError("signal csv must have header index,value: " + path.string());
    std::vector<double> samples;
    for (const auto& row : table.rows) {
        if (row.size() != 2) throw DataError("signal csv row must have 2 fields");
        samples.push_back(std::stod(row[1]));
    }
    return Signal(std::move(samples));
}

void write_spectrum_csv(const Spectrum& s, const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(s.size());
    for (std::size_t k = 0; k < s.size(); ++k)
        rows.push_back({std::to_string(k), format_double(s[k].real()), format_double(s[k].imag())});
    write_csv(path, {"index", "re", "im"}, rows);
}

}  // namespace ssanet::spectral
