#include "ssanet/engine/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ssanet/common/error.hpp"

namespace ssanet::engine {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw InvalidArgument(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " + b.shape().str());
}

/// Source taps of one output index of the x2 first-order hold.
struct Taps {
    std::size_t first;
    std::size_t second;
    double w_first;
    double w_second;
};

std::vector<Taps> upsample_taps(std::size_t n) {
    std::vector<Taps> taps(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        taps[2 * i] = {i, i, 1.0, 0.0};
        taps[2 * i + 1] = {i, std::min(i + 1, n - 1), 0.5, 0.5};
    }
    return taps;
}

std::uint64_t fold_bits(const std::vector<bool>& bits) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (bool b : bits) h = (h ^ static_cast<std::uint64_t>(b)) * 0x100000001b3ULL;
    return h;
}

}  // namespace

Var max_pool2d(Tape& tape, Var x) {
    const Tensor& xv = tape.value(x);
    const Shape s = xv.shape();
    if (s.h % 2 != 0 || s.w % 2 != 0)
        throw InvalidArgument("max_pool2d: height and width must be even, got " + s.str());
    const Shape os{s.n, s.c, s.h / 2, s.w / 2};
    Tensor out(os);
    std::vector<std::uint32_t> winner(os.numel());

    std::size_t o = 0;
    for (std::size_t nc = 0; nc < s.n * s.c; ++nc) {
        const double* plane = xv.data() + nc * s.plane();
        for (std::size_t oy = 0; oy < os.h; ++oy)
            for (std::size_t ox = 0; ox < os.w; ++ox, ++o) {
                const std::size_t base = 2 * oy * s.w + 2 * ox;
                const std::size_t cand[4] = {base, base + 1, base + s.w, base + s.w + 1};
                std::size_t best = cand[0];
                // NaN wins so that it propagates.
                for (std::size_t q = 1; q < 4 && !std::isnan(plane[best]); ++q)
                    if (plane[cand[q]] > plane[best] || std::isnan(plane[cand[q]])) best = cand[q];
                out[o] = plane[best];
                winner[o] = static_cast<std::uint32_t>(best);
            }
    }
    if (tape.tracking_kinks()) {
        std::uint64_t h = 0;
        for (auto w : winner) h = (h ^ w) * 0x100000001b3ULL;
        tape.mix_kink(h);
    }

    return tape.record(std::move(out), {x}, [x, winner = std::move(winner), s](Tape& t, Var self) {
        const Tensor& dy = t.grad(self);
        Tensor& dx = t.grad_buffer(x);
        const std::size_t per_plane = (s.h / 2) * (s.w / 2);
        for (std::size_t o = 0; o < dy.size(); ++o) dx[(o / per_plane) * s.plane() + winner[o]] += dy[o];
    });
}

Var bilinear_upsample2d(Tape& tape, Var x) {
    const Tensor& xv = tape.value(x);
    const Shape s = xv.shape();
    if (s.h == 0 || s.w == 0) throw InvalidArgument("bilinear_upsample2d: empty spatial dims");
    const Shape os{s.n, s.c, 2 * s.h, 2 * s.w};
    const auto rows = upsample_taps(s.h);
    const auto cols = upsample_taps(s.w);

    Tensor out(os);
    std::vector<double> tmp(os.h * s.w);
    for (std::size_t nc = 0; nc < s.n * s.c; ++nc) {
        const double* in = xv.data() + nc * s.plane();
        double* dst = out.data() + nc * os.plane();
        // Along H first, then W.
        for (std::size_t y = 0; y < os.h; ++y) {
            const Taps& r = rows[y];
            for (std::size_t xw = 0; xw < s.w; ++xw)
                tmp[y * s.w + xw] = r.w_first * in[r.first * s.w + xw] + r.w_second * in[r.second * s.w + xw];
        }
        for (std::size_t y = 0; y < os.h; ++y)
            for (std::size_t xw = 0; xw < os.w; ++xw) {
                const Taps& c = cols[xw];
                dst[y * os.w + xw] = c.w_first * tmp[y * s.w + c.first] + c.w_second * tmp[y * s.w + c.second];
            }
    }

    return tape.record(std::move(out), {x}, [x, s, os, rows, cols](Tape& t, Var self) {
        const Tensor& dy = t.grad(self);
        Tensor& dx = t.grad_buffer(x);
        std::vector<double> tmp(os.h * s.w);
        for (std::size_t nc = 0; nc < s.n * s.c; ++nc) {
            const double* g = dy.data() + nc * os.plane();
            double* dst = dx.data() + nc * s.plane();
            std::fill(tmp.begin(), tmp.end(), 0.0);
            for (std::size_t y = 0; y < os.h; ++y)
                for (std::size_t xw = 0; xw < os.w; ++xw) {
                    const Taps& c = cols[xw];
                    tmp[y * s.w + c.first] += c.w_first * g[y * os.w + xw];
                    tmp[y * s.w + c.second] += c.w_second * g[y * os.w + xw];
                }
            for (std::size_t y = 0; y < os.h; ++y) {
                const Taps& r = rows[y];
                for (std::size_t xw = 0; xw < s.w; ++xw) {
                    dst[r.first * s.w + xw] += r.w_first * tmp[y * s.w + xw];
                    dst[r.second * s.w + xw] += r.w_second * tmp[y * s.w + xw];
                }
            }
        }
    });
}

Var batch_norm2d(Tape& tape, Var x, Var gamma, Var beta, Mode mode, BatchNormState state) {
    const Tensor& xv = tape.value(x);
    const Tensor& gv = tape.value(gamma);
    const Tensor& bv = tape.value(beta);
    const Shape s = xv.shape();
    if (gv.size() != s.c || bv.size() != s.c)
        throw InvalidArgument("batch_norm2d: gamma/beta length must equal channel count " + std::to_string(s.c));
    if (!state.running_mean || !state.running_var || state.running_mean->size() != s.c ||
        state.running_var->size() != s.c)
        throw InvalidArgument("batch_norm2d: running statistics missing or mis-sized");
    if (mode == Mode::Train && (!state.update_mean || !state.update_var))
        throw InvalidArgument("batch_norm2d: train mode needs writable running statistics");
    const std::size_t count = s.n * s.plane();
    if (mode == Mode::Train && count <= 1)
        throw InvalidArgument("batch_norm2d: batch*H*W must exceed 1 in train mode");

    std::vector<double> mean(s.c), inv_std(s.c);
    if (mode == Mode::Train) {
        for (std::size_t c = 0; c < s.c; ++c) {
            double acc = 0.0;
            for (std::size_t n = 0; n < s.n; ++n) {
                const double* p = xv.data() + (n * s.c + c) * s.plane();
                for (std::size_t i = 0; i < s.plane(); ++i) acc += p[i];
            }
            mean[c] = acc / static_cast<double>(count);
            double sq = 0.0;
            for (std::size_t n = 0; n < s.n; ++n) {
                const double* p = xv.data() + (n * s.c + c) * s.plane();
                for (std::size_t i = 0; i < s.plane(); ++i) sq += (p[i] - mean[c]) * (p[i] - mean[c]);
            }
            const double var = sq / static_cast<double>(count);
            inv_std[c] = 1.0 / std::sqrt(var + kBatchNormEpsilon);
            double& rm = (*state.update_mean)[c];
            double& rv = (*state.update_var)[c];
            rm = kBatchNormMomentum * rm + (1.0 - kBatchNormMomentum) * mean[c];
            rv = kBatchNormMomentum * rv +
                 (1.0 - kBatchNormMomentum) * sq / static_cast<double>(count - 1);
        }
    } else {
        for (std::size_t c = 0; c < s.c; ++c) {
            mean[c] = (*state.running_mean)[c];
            inv_std[c] = 1.0 / std::sqrt((*state.running_var)[c] + kBatchNormEpsilon);
        }
    }

    Tensor xhat(s);
    Tensor out(s);
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c) {
            const std::size_t off = (n * s.c + c) * s.plane();
            for (std::size_t i = 0; i < s.plane(); ++i) {
                const double h = (xv[off + i] - mean[c]) * inv_std[c];
                xhat[off + i] = h;
                out[off + i] = gv[c] * h + bv[c];
            }
        }

    return tape.record(std::move(out), {x, gamma, beta},
                       [x, gamma, beta, mode, s, count, inv_std = std::move(inv_std),
                        xhat = std::move(xhat)](Tape& t, Var self) {
                           const Tensor& dy = t.grad(self);
                           const Tensor& gv = t.value(gamma);
                           std::vector<double> sum_dy(s.c, 0.0), sum_dy_xhat(s.c, 0.0);
                           for (std::size_t c = 0; c < s.c; ++c)
                               for (std::size_t n = 0; n < s.n; ++n) {
                                   const std::size_t off = (n * s.c + c) * s.plane();
                                   for (std::size_t i = 0; i < s.plane(); ++i) {
                                       sum_dy[c] += dy[off + i];
                                       sum_dy_xhat[c] += dy[off + i] * xhat[off + i];
                                   }
                               }
                           if (t.requires_grad(gamma)) {
                               Tensor& dg = t.grad_buffer(gamma);
                               for (std::size_t c = 0; c < s.c; ++c) dg[c] += sum_dy_xhat[c];
                           }
                           if (t.requires_grad(beta)) {
                               Tensor& db = t.grad_buffer(beta);
                               for (std::size_t c = 0; c < s.c; ++c) db[c] += sum_dy[c];
                           }
                           if (!t.requires_grad(x)) return;
                           Tensor& dx = t.grad_buffer(x);
                           const double m = static_cast<double>(count);
                           for (std::size_t n = 0; n < s.n; ++n)
                               for (std::size_t c = 0; c < s.c; ++c) {
                                   const std::size_t off = (n * s.c + c) * s.plane();
                                   const double scale = gv[c] * inv_std[c];
                                   if (mode == Mode::Train) {
                                       for (std::size_t i = 0; i < s.plane(); ++i)
                                           dx[off + i] += scale / m *
                                                          (m * dy[off + i] - sum_dy[c] - xhat[off + i] * sum_dy_xhat[c]);
                                   } else {
                                       for (std::size_t i = 0; i < s.plane(); ++i) dx[off + i] += scale * dy[off + i];
                                   }
                               }
                       });
}

Var relu(Tape& tape, Var x) {
    const Tensor& xv = tape.value(x);
    Tensor out(xv.shape());
    for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > 0.0 || std::isnan(xv[i]) ? xv[i] : 0.0;
    if (tape.tracking_kinks()) {
        std::vector<bool> active(xv.size());
        for (std::size_t i = 0; i < xv.size(); ++i) active[i] = xv[i] > 0.0;
        tape.mix_kink(fold_bits(active));
    }
    return tape.record(std::move(out), {x}, [x](Tape& t, Var self) {
        const Tensor& dy = t.grad(self);
        const Tensor& y = t.value(self);
        Tensor& dx = t.grad_buffer(x);
        for (std::size_t i = 0; i < dy.size(); ++i)
            if (y[i] > 0.0) dx[i] += dy[i];
    });
}

Var sigmoid(Tape& tape, Var x) {
    const Tensor& xv = tape.value(x);
    Tensor out(xv.shape());
    const double lo = std::numeric_limits<double>::min();
    const double hi = std::nextafter(1.0, 0.0);
    for (std::size_t i = 0; i < xv.size(); ++i) {
        const double v = xv[i];
        const double y = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
        out[i] = std::clamp(y, lo, hi);
    }
    return tape.record(std::move(out), {x}, [x](Tape& t, Var self) {
        const Tensor& dy = t.grad(self);
        const Tensor& y = t.value(self);
        Tensor& dx = t.grad_buffer(x);
        for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * y[i] * (1.0 - y[i]);
    });
}

Var add(Tape& tape, Var a, Var b) {
    const Tensor& av = tape.value(a);
    const Tensor& bv = tape.value(b);
    require_same_shape(av, bv, "add");
    Tensor out(av.shape());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
    return tape.record(std::move(out), {a, b}, [a, b](Tape& t, Var self) {
        const Tensor& dy = t.grad(self);
        for (Var v : {a, b}) {
            if (!t.requires_grad(v)) continue;
            Tensor& d = t.grad_buffer(v);
            for (std::size_t i = 0; i < dy.size(); ++i) d[i] += dy[i];
        }
    });
}

Var concat_channels(Tape& tape, std::span<const Var> parts) {
    if (parts.empty()) throw InvalidArgument("concat_channels: no inputs");
    const Shape first = tape.value(parts[0]).shape();
    std::size_t channels = 0;
    for (Var v : parts) {
        const Shape s = tape.value(v).shape();
        if (s.n != first.n || s.h != first.h || s.w != first.w)
            throw InvalidArgument("concat_channels: batch/height/width mismatch " + first.str() + " vs " + s.str());
        channels += s.c;
    }
    const Shape os{first.n, channels, first.h, first.w};
    Tensor out(os);
    std::vector<std::size_t> offsets;
    std::size_t c0 = 0;
    for (Var v : parts) {
        const Tensor& pv = tape.value(v);
        offsets.push_back(c0);
        for (std::size_t n = 0; n < os.n; ++n)
            std::copy_n(pv.data() + n * pv.shape().c * os.plane(), pv.shape().c * os.plane(),
                        out.data() + (n * channels + c0) * os.plane());
        c0 += pv.shape().c;
    }
    std::vector<Var> inputs(parts.begin(), parts.end());
    return tape.record(std::move(out), inputs, [inputs, offsets, os](Tape& t, Var self) {
        const Tensor& dy = t.grad(self);
        for (std::size_t k = 0; k < inputs.size(); ++k) {
            if (!t.requires_grad(inputs[k])) continue;
            Tensor& d = t.grad_buffer(inputs[k]);
            const std::size_t pc = d.shape().c;
            for (std::size_t n = 0; n < os.n; ++n) {
                const double* src = dy.data() + (n * os.c + offsets[k]) * os.plane();
                double* dst = d.data() + n * pc * os.plane();
                for (std::size_t i = 0; i < pc * os.plane(); ++i) dst[i] += src[i];
            }
        }
    });
}

Var sum(Tape& tape, Var x) {
    const Tensor& xv = tape.value(x);
    double acc = 0.0;
    for (double v : xv.values()) acc += v;
    return tape.record(Tensor::scalar(acc), {x}, [x](Tape& t, Var self) {
        const double g = t.grad(self)[0];
        Tensor& dx = t.grad_buffer(x);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g;
    });
}

Var weighted_sum(Tape& tape, Var x, const Tensor& weights) {
    const Tensor& xv = tape.value(x);
    require_same_shape(xv, weights, "weighted_sum");
    double acc = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) acc += xv[i] * weights[i];
    return tape.record(Tensor::scalar(acc), {x}, [x, weights](Tape& t, Var self) {
        const double g = t.grad(self)[0];
        Tensor& dx = t.grad_buffer(x);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g * weights[i];
    });
}

Var balanced_bce_loss(Tape& tape, Var prob, const Tensor& target, const Tensor& fov) {
    const Tensor& pv = tape.value(prob);
    require_same_shape(pv, target, "balanced_bce_loss");
    require_same_shape(pv, fov, "balanced_bce_loss");

    std::size_t in_fov = 0;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        if (fov[i] != 0.0 && fov[i] != 1.0) throw InvalidArgument("balanced_bce_loss: fov must be binary");
        if (target[i] != 0.0 && target[i] != 1.0) throw InvalidArgument("balanced_bce_loss: target must be binary");
        if (fov[i] == 1.0) {
            ++in_fov;
            if (target[i] == 1.0) ++positives;
        }
    }
    if (in_fov == 0) throw InvalidArgument("balanced_bce_loss: empty field of view");

    const double beta = static_cast<double>(positives) / static_cast<double>(in_fov);
    const bool single_class = positives == 0 || positives == in_fov;
    const double w_pos = single_class ? 1.0 : 1.0 - beta;
    const double w_neg = single_class ? 1.0 : beta;
    const double norm = 1.0 / static_cast<double>(in_fov);
    const double lo = kProbabilityClamp;
    const double hi = 1.0 - kProbabilityClamp;

    double loss = 0.0;
    std::vector<bool> clamped(tape.tracking_kinks() ? pv.size() : 0);
    for (std::size_t i = 0; i < pv.size(); ++i) {
        if (fov[i] != 1.0) continue;
        const double p = std::clamp(pv[i], lo, hi);
        if (!clamped.empty()) clamped[i] = p != pv[i];
        loss -= target[i] == 1.0 ? w_pos * std::log(p) : w_neg * std::log(1.0 - p);
    }
    loss *= norm;
    if (tape.tracking_kinks()) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (bool b : clamped) h = (h ^ static_cast<std::uint64_t>(b)) * 0x100000001b3ULL;
        tape.mix_kink(h);
    }

    return tape.record(Tensor::scalar(loss), {prob},
                       [prob, target, fov, w_pos, w_neg, norm, lo, hi](Tape& t, Var self) {
                           const double g = t.grad(self)[0];
                           const Tensor& pv = t.value(prob);
                           Tensor& dp = t.grad_buffer(prob);
                           for (std::size_t i = 0; i < pv.size(); ++i) {
                               if (fov[i] != 1.0 || pv[i] < lo || pv[i] > hi) continue;
                               const double p = pv[i];
                               dp[i] += g * norm * (target[i] == 1.0 ? -w_pos / p : w_neg / (1.0 - p));
                           }
                       });
}

}  // namespace ssanet::engine
