#pragma once

// Brute-force reference implementations, written independently of the
// library code they check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "ssanet/engine/tensor.hpp"

namespace oracle {

inline std::vector<std::complex<double>> dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        long double re = 0.0L, im = 0.0L;
        for (std::size_t t = 0; t < n; ++t) {
            const long double angle = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k * t % n) / n;
            re += x[t] * std::cos(angle);
            im += x[t] * std::sin(angle);
        }
        out[k] = {static_cast<double>(re), static_cast<double>(im)};
    }
    return out;
}

/// y[n][o][i][j] = b[o] + sum_{c,u,v} x[n][c][i*s+u-p][j*s+v-p] * w[o][c][u][v]
inline ssanet::engine::Tensor conv2d(const ssanet::engine::Tensor& x, const ssanet::engine::Tensor& w,
                                     const std::vector<double>& bias, int stride, int pad) {
    const auto xs = x.shape();
    const auto ws = w.shape();
    const long oh = (static_cast<long>(xs.h) + 2 * pad - static_cast<long>(ws.h)) / stride + 1;
    const long ow = (static_cast<long>(xs.w) + 2 * pad - static_cast<long>(ws.w)) / stride + 1;
    ssanet::engine::Tensor y({xs.n, ws.n, static_cast<std::size_t>(oh), static_cast<std::size_t>(ow)});
    for (std::size_t n = 0; n < xs.n; ++n)
        for (std::size_t o = 0; o < ws.n; ++o)
            for (long i = 0; i < oh; ++i)
                for (long j = 0; j < ow; ++j) {
                    double acc = bias.empty() ? 0.0 : bias[o];
                    for (std::size_t c = 0; c < xs.c; ++c)
                        for (long u = 0; u < static_cast<long>(ws.h); ++u)
                            for (long v = 0; v < static_cast<long>(ws.w); ++v) {
                                const long r = i * stride + u - pad;
                                const long q = j * stride + v - pad;
                                if (r < 0 || q < 0 || r >= static_cast<long>(xs.h) || q >= static_cast<long>(xs.w))
                                    continue;
                                acc += x(n, c, r, q) * w(o, c, u, v);
                            }
                    y(n, o, i, j) = acc;
                }
    return y;
}

struct Counts {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
};

inline Counts confusion(const std::vector<double>& prob, const std::vector<double>& gt,
                        const std::vector<double>& fov, double threshold) {
    Counts c;
    for (std::size_t i = 0; i < prob.size(); ++i) {
        if (fov[i] != 1.0) continue;
        const bool predicted = prob[i] >= threshold;
        const bool actual = gt[i] == 1.0;
        if (predicted && actual) ++c.tp;
        if (predicted && !actual) ++c.fp;
        if (!predicted && actual) ++c.fn;
        if (!predicted && !actual) ++c.tn;
    }
    return c;
}

}  // namespace oracle
