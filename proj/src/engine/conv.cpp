#include <Eigen/Core>
#include <string>
#include <vector>

#include "ssanet/common/error.hpp"
#include "ssanet/engine/ops.hpp"

namespace ssanet::engine {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

struct ConvGeometry {
    std::size_t in_ch, in_h, in_w;
    std::size_t out_ch, kh, kw;
    std::size_t out_h, out_w;
    std::size_t stride, pad;

    std::size_t patch() const { return in_ch * kh * kw; }
    std::size_t positions() const { return out_h * out_w; }
    /// 1x1 stride-1 unpadded: the input plane already is the column matrix.
    bool pointwise() const { return kh == 1 && kw == 1 && stride == 1 && pad == 0; }
};

// cols is (in_ch*kh*kw) x (out_h*out_w).
void im2col(const double* x, const ConvGeometry& g, double* cols) {
    for (std::size_t c = 0; c < g.in_ch; ++c)
        for (std::size_t ky = 0; ky < g.kh; ++ky)
            for (std::size_t kx = 0; kx < g.kw; ++kx) {
                double* row = cols + ((c * g.kh + ky) * g.kw + kx) * g.positions();
                for (std::size_t oy = 0; oy < g.out_h; ++oy) {
                    const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
                    double* dst = row + oy * g.out_w;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.in_h)) {
                        std::fill(dst, dst + g.out_w, 0.0);
                        continue;
                    }
                    const double* src = x + (c * g.in_h + static_cast<std::size_t>(iy)) * g.in_w;
                    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                        const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
                        dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.in_w)) ? 0.0 : src[ix];
                    }
                }
            }
}

void col2im_add(const double* cols, const ConvGeometry& g, double* dx) {
    for (std::size_t c = 0; c < g.in_ch; ++c)
        for (std::size_t ky = 0; ky < g.kh; ++ky)
            for (std::size_t kx = 0; kx < g.kw; ++kx) {
                const double* row = cols + ((c * g.kh + ky) * g.kw + kx) * g.positions();
                for (std::size_t oy = 0; oy < g.out_h; ++oy) {
                    const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
                    double* dst = dx + (c * g.in_h + static_cast<std::size_t>(iy)) * g.in_w;
                    const double* src = row + oy * g.out_w;
                    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                        const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
                        if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.in_w)) dst[ix] += src[ox];
                    }
                }
            }
}

}  // namespace

Var conv2d(Tape& tape, Var x, Var weight, std::optional<Var> bias, int stride, int padding) {
    const Tensor& xv = tape.value(x);
    const Tensor& wv = tape.value(weight);
    const Shape xs = xv.shape();
    const Shape ws = wv.shape();

    if (stride != 1 && stride != 2) throw InvalidArgument("conv2d: stride must be 1 or 2");
    if (padding < 0) throw InvalidArgument("conv2d: negative padding");
    if (ws.c != xs.c)
        throw InvalidArgument("conv2d: weight expects " + std::to_string(ws.c) + " input channels, input has " +
                              std::to_string(xs.c));
    const auto padded_h = static_cast<std::ptrdiff_t>(xs.h) + 2 * padding;
    const auto padded_w = static_cast<std::ptrdiff_t>(xs.w) + 2 * padding;
    if (ws.n == 0 || padded_h < static_cast<std::ptrdiff_t>(ws.h) || padded_w < static_cast<std::ptrdiff_t>(ws.w))
        throw InvalidArgument("conv2d: empty output for input " + xs.str() + " and kernel " + ws.str());
    if (bias && tape.value(*bias).size() != ws.n) throw InvalidArgument("conv2d: bias length mismatch");

    ConvGeometry g{xs.c,
                   xs.h,
                   xs.w,
                   ws.n,
                   ws.h,
                   ws.w,
                   static_cast<std::size_t>((padded_h - static_cast<std::ptrdiff_t>(ws.h)) / stride + 1),
                   static_cast<std::size_t>((padded_w - static_cast<std::ptrdiff_t>(ws.w)) / stride + 1),
                   static_cast<std::size_t>(stride),
                   static_cast<std::size_t>(padding)};

    Tensor out(Shape{xs.n, g.out_ch, g.out_h, g.out_w});
    std::vector<double> cols(g.pointwise() ? 0 : g.patch() * g.positions());
    ConstMatrixMap w_mat(wv.data(), static_cast<Eigen::Index>(g.out_ch), static_cast<Eigen::Index>(g.patch()));
    const Eigen::Index k = static_cast<Eigen::Index>(g.patch());
    const Eigen::Index p = static_cast<Eigen::Index>(g.positions());
    const Eigen::Index m = static_cast<Eigen::Index>(g.out_ch);

    for (std::size_t n = 0; n < xs.n; ++n) {
        const double* x_n = xv.data() + n * xs.c * xs.plane();
        const double* col_data = x_n;
        if (!g.pointwise()) {
            im2col(x_n, g, cols.data());
            col_data = cols.data();
        }
        MatrixMap y_mat(out.data() + n * g.out_ch * g.positions(), m, p);
        y_mat.noalias() = w_mat * ConstMatrixMap(col_data, k, p);
        if (bias) {
            const Tensor& bv = tape.value(*bias);
            for (std::size_t o = 0; o < g.out_ch; ++o) y_mat.row(static_cast<Eigen::Index>(o)).array() += bv[o];
        }
    }

    std::vector<Var> inputs{x, weight};
    if (bias) inputs.push_back(*bias);
    return tape.record(std::move(out), std::move(inputs), [x, weight, bias, g](Tape& t, Var self) {
        const Tensor& dy = t.grad(self);
        const Tensor& xv = t.value(x);
        const Tensor& wv = t.value(weight);
        const Eigen::Index k = static_cast<Eigen::Index>(g.patch());
        const Eigen::Index p = static_cast<Eigen::Index>(g.positions());
        const Eigen::Index m = static_cast<Eigen::Index>(g.out_ch);
        const std::size_t batch = dy.shape().n;
        const bool need_x = t.requires_grad(x);
        const bool need_w = t.requires_grad(weight);
        const bool need_b = bias && t.requires_grad(*bias);

        ConstMatrixMap w_mat(wv.data(), m, k);
        std::vector<double> cols(g.pointwise() ? 0 : g.patch() * g.positions());
        std::vector<double> dcols(g.pointwise() || !need_x ? 0 : g.patch() * g.positions());
        double* dw = need_w ? t.grad_buffer(weight).data() : nullptr;
        double* dx = need_x ? t.grad_buffer(x).data() : nullptr;
        double* db = need_b ? t.grad_buffer(*bias).data() : nullptr;

        for (std::size_t n = 0; n < batch; ++n) {
            ConstMatrixMap dy_mat(dy.data() + n * g.out_ch * g.positions(), m, p);
            const double* x_n = xv.data() + n * g.in_ch * g.in_h * g.in_w;
            if (need_w) {
                const double* col_data = x_n;
                if (!g.pointwise()) {
                    im2col(x_n, g, cols.data());
                    col_data = cols.data();
                }
                MatrixMap(dw, m, k).noalias() += dy_mat * ConstMatrixMap(col_data, k, p).transpose();
            }
            if (need_x) {
                double* dx_n = dx + n * g.in_ch * g.in_h * g.in_w;
                if (g.pointwise()) {
                    MatrixMap(dx_n, k, p).noalias() += w_mat.transpose() * dy_mat;
                } else {
                    MatrixMap(dcols.data(), k, p).noalias() = w_mat.transpose() * dy_mat;
                    col2im_add(dcols.data(), g, dx_n);
                }
            }
            if (need_b)
                for (std::size_t o = 0; o < g.out_ch; ++o) {
                    const double* row = dy.data() + (n * g.out_ch + o) * g.positions();
                    double acc = 0.0;
                    for (std::size_t i = 0; i < g.positions(); ++i) acc += row[i];
                    db[o] += acc;
                }
        }
    });
}

}  // namespace ssanet::engine
