#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ssanet::spectral {

/// Real samples on a circular domain: index arithmetic wraps modulo size().
/// Holds at least two samples, all finite.
class Signal {
public:
    explicit Signal(std::vector<double> samples);

    std::size_t size() const { return samples_.size(); }
    double operator[](std::size_t i) const { return samples_[i]; }
    /// Sample at a possibly negative or out-of-range index, wrapped.
    double at_wrapped(std::ptrdiff_t i) const;
    std::span<const double> samples() const { return samples_; }

    static Signal constant(std::size_t length, double value);
    static Signal impulse(std::size_t length, std::size_t position = 0);
    /// (-1)^n, the Nyquist-frequency signal.
    static Signal alternating(std::size_t length);
    /// cos(2*pi*cycles*n/length).
    static Signal cosine(std::size_t length, double cycles);
    /// I.i.d. uniform samples in [-1, 1] from the seeded generator.
    static Signal random(std::size_t length, std::uint64_t seed);

    /// Circular delay: out[n] = x[n - offset].
    Signal shifted(std::ptrdiff_t offset) const;

    friend bool operator==(const Signal&, const Signal&) = default;

private:
    std::vector<double> samples_;
};

/// DFT bins; bin k sits at angular frequency 2*pi*k/size().
class Spectrum {
public:
    explicit Spectrum(std::vector<std::complex<double>> bins);

    std::size_t size() const { return bins_.size(); }
    const std::complex<double>& operator[](std::size_t k) const { return bins_[k]; }
    std::span<const std::complex<double>> bins() const { return bins_; }

    /// Folded angular frequency of bin k: min(2*pi*k/N, 2*pi - 2*pi*k/N).
    double frequency(std::size_t k) const;
    double energy() const;

private:
    std::vector<std::complex<double>> bins_;
};

/// Direct O(N^2) evaluation of X[k] = sum_n x[n] exp(-i 2 pi k n / N).
Spectrum dft(const Signal& x);

/// L2 norm of a - b; sizes must match.
double l2_distance(const Signal& a, const Signal& b);
double l2_norm(const Signal& a);

/// CSV with columns index,value.
void write_signal_csv(const Signal& x, const std::filesystem::path& path);
Signal read_signal_csv(const std::filesystem::path& path);
/// CSV with columns index,re,im.
void write_spectrum_csv(const Spectrum& s, const std::filesystem::path& path);

}  // namespace ssanet::spectral
