#include "rom/nn/conv.hpp"

#include "rom/error.hpp"
#include "rom/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <utility>

namespace rom::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

// Geometry of one convolution in its "regular" orientation: the large side is
// the conv input (deconv output), the small side the conv output.
struct Geometry {
    std::size_t channels = 0; // channels on the large side
    std::array<std::size_t, 3> big{1, 1, 1};
    std::array<std::size_t, 3> small{1, 1, 1};
    std::array<std::size_t, 3> k{1, 1, 1};
    std::array<std::size_t, 3> s{1, 1, 1};
    std::array<std::size_t, 3> p{0, 0, 0};

    std::size_t kvol() const { return k[0] * k[1] * k[2]; }
    std::size_t rows() const { return channels * kvol(); }
    std::size_t big_vol() const { return big[0] * big[1] * big[2]; }
    std::size_t small_vol() const { return small[0] * small[1] * small[2]; }
};

// Spatial extents of an [N, C, ...] tensor padded to (D, H, W).
std::array<std::size_t, 3> spatial3(const Shape& shape)
{
    if (shape.size() == 4) return {1, shape[2], shape[3]};
    return {shape[2], shape[3], shape[4]};
}

Geometry make_geometry(const ConvLayer& layer, std::size_t big_channels, std::array<std::size_t, 3> big,
                       std::array<std::size_t, 3> small)
{
    Geometry g;
    g.channels = big_channels;
    g.big = big;
    g.small = small;
    const std::size_t first = layer.spatial_rank() == 2 ? 1 : 0;
    for (std::size_t a = first; a < 3; ++a) {
        g.k[a] = layer.kernel();
        g.s[a] = layer.stride;
        g.p[a] = layer.padding;
    }
    return g;
}

void check_layer(const ConvLayer& layer)
{
    const auto r = layer.weights.rank();
    if (r != 4 && r != 5) {
        throw ShapeError("convolution weights must have rank 4 or 5, got " + shape_string(layer.weights.shape()));
    }
    for (std::size_t a = 3; a < r; ++a) {
        if (layer.weights.dim(a) != layer.weights.dim(2)) {
            throw ShapeError("convolution kernels must be cubic: " + shape_string(layer.weights.shape()));
        }
    }
    if (layer.stride < 1) throw ShapeError("convolution stride must be >= 1");
    if (layer.bias.size() != layer.out_channels()) {
        throw ShapeError("convolution bias has " + std::to_string(layer.bias.size()) + " entries, expected " +
                         std::to_string(layer.out_channels()));
    }
    for (std::size_t op : layer.output_padding) {
        if (op >= layer.stride && op != 0) throw ShapeError("output padding must be smaller than the stride");
    }
}

void check_input(const ConvLayer& layer, const Tensor& x, const char* what)
{
    check_layer(layer);
    if (x.rank() != layer.spatial_rank() + 2) {
        throw ShapeError(std::string(what) + ": input " + shape_string(x.shape()) + " has wrong rank for kernel " +
                         shape_string(layer.weights.shape()));
    }
    if (x.dim(1) != layer.in_channels()) {
        throw ShapeError(std::string(what) + ": input has " + std::to_string(x.dim(1)) + " channels, layer expects " +
                         std::to_string(layer.in_channels()));
    }
}

// Output positions ow whose input index ow + kw - pad lies inside the row.
std::pair<std::size_t, std::size_t> unit_stride_range(const Geometry& g, std::size_t kw)
{
    const std::size_t lo = g.p[2] > kw ? g.p[2] - kw : 0;
    const std::size_t limit = g.big[2] + g.p[2] > kw ? g.big[2] + g.p[2] - kw : 0;
    const std::size_t hi = std::min(g.small[2], limit);
    return {std::min(lo, hi), hi};
}

// cols[(c, kd, kh, kw), (od, oh, ow)] = big[c, od s - p + kd, ...] (0 outside).
void im2col(const Geometry& g, const double* big, double* cols)
{
    const std::size_t P = g.small_vol();
    std::size_t row = 0;
    for (std::size_t c = 0; c < g.channels; ++c) {
        const double* plane = big + c * g.big_vol();
        for (std::size_t kd = 0; kd < g.k[0]; ++kd) {
            for (std::size_t kh = 0; kh < g.k[1]; ++kh) {
                for (std::size_t kw = 0; kw < g.k[2]; ++kw, ++row) {
                    double* dst = cols + row * P;
                    for (std::size_t od = 0; od < g.small[0]; ++od) {
                        const auto id = static_cast<std::ptrdiff_t>(od * g.s[0] + kd) - static_cast<std::ptrdiff_t>(g.p[0]);
                        for (std::size_t oh = 0; oh < g.small[1]; ++oh) {
                            const auto ih = static_cast<std::ptrdiff_t>(oh * g.s[1] + kh) - static_cast<std::ptrdiff_t>(g.p[1]);
                            double* out = dst + (od * g.small[1] + oh) * g.small[2];
                            if (id < 0 || id >= static_cast<std::ptrdiff_t>(g.big[0]) || ih < 0 ||
                                ih >= static_cast<std::ptrdiff_t>(g.big[1])) {
                                std::fill(out, out + g.small[2], 0.0);
                                continue;
                            }
                            const double* src = plane + (static_cast<std::size_t>(id) * g.big[1] + static_cast<std::size_t>(ih)) * g.big[2];
                            if (g.s[2] == 1) {
                                const auto [lo, hi] = unit_stride_range(g, kw);
                                std::fill(out, out + lo, 0.0);
                                std::copy(src + lo + kw - g.p[2], src + hi + kw - g.p[2], out + lo);
                                std::fill(out + hi, out + g.small[2], 0.0);
                                continue;
                            }
                            for (std::size_t ow = 0; ow < g.small[2]; ++ow) {
                                const auto iw = static_cast<std::ptrdiff_t>(ow * g.s[2] + kw) - static_cast<std::ptrdiff_t>(g.p[2]);
                                out[ow] = (iw < 0 || iw >= static_cast<std::ptrdiff_t>(g.big[2])) ? 0.0 : src[iw];
                            }
                        }
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatter-add columns back onto the large side.
void col2im(const Geometry& g, const double* cols, double* big)
{
    const std::size_t P = g.small_vol();
    std::fill(big, big + g.channels * g.big_vol(), 0.0);
    std::size_t row = 0;
    for (std::size_t c = 0; c < g.channels; ++c) {
        double* plane = big + c * g.big_vol();
        for (std::size_t kd = 0; kd < g.k[0]; ++kd) {
            for (std::size_t kh = 0; kh < g.k[1]; ++kh) {
                for (std::size_t kw = 0; kw < g.k[2]; ++kw, ++row) {
                    const double* src = cols + row * P;
                    for (std::size_t od = 0; od < g.small[0]; ++od) {
                        const auto id = static_cast<std::ptrdiff_t>(od * g.s[0] + kd) - static_cast<std::ptrdiff_t>(g.p[0]);
                        if (id < 0 || id >= static_cast<std::ptrdiff_t>(g.big[0])) continue;
                        for (std::size_t oh = 0; oh < g.small[1]; ++oh) {
                            const auto ih = static_cast<std::ptrdiff_t>(oh * g.s[1] + kh) - static_cast<std::ptrdiff_t>(g.p[1]);
                            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.big[1])) continue;
                            const double* in = src + (od * g.small[1] + oh) * g.small[2];
                            double* dst = plane + (static_cast<std::size_t>(id) * g.big[1] + static_cast<std::size_t>(ih)) * g.big[2];
                            if (g.s[2] == 1) {
                                const auto [lo, hi] = unit_stride_range(g, kw);
                                double* d = dst + kw - g.p[2];
                                for (std::size_t ow = lo; ow < hi; ++ow) d[ow] += in[ow];
                                continue;
                            }
                            for (std::size_t ow = 0; ow < g.small[2]; ++ow) {
                                const auto iw = static_cast<std::ptrdiff_t>(ow * g.s[2] + kw) - static_cast<std::ptrdiff_t>(g.p[2]);
                                if (iw >= 0 && iw < static_cast<std::ptrdiff_t>(g.big[2])) dst[iw] += in[ow];
                            }
                        }
                    }
                }
            }
        }
    }
}

Shape with_spatial(std::size_t n, std::size_t c, std::size_t rank, std::array<std::size_t, 3> sp)
{
    if (rank == 2) return {n, c, sp[1], sp[2]};
    return {n, c, sp[0], sp[1], sp[2]};
}

ConvLayer make_layer(std::size_t rows, std::size_t cols, std::size_t bias_len, std::size_t spatial_rank,
                     std::size_t kernel, std::size_t stride, std::size_t padding, bool transposed, Rng& rng)
{
    if (spatial_rank != 2 && spatial_rank != 3) throw ConfigError("convolution spatial rank must be 2 or 3");
    if (kernel < 1 || stride < 1) throw ConfigError("kernel and stride must be >= 1");
    Shape wshape{rows, cols};
    for (std::size_t a = 0; a < spatial_rank; ++a) wshape.push_back(kernel);
    ConvLayer layer;
    layer.weights = Tensor(wshape);
    layer.bias = Tensor({bias_len});
    layer.stride = stride;
    layer.padding = padding;
    layer.transposed = transposed;
    const double kvol = std::pow(static_cast<double>(kernel), static_cast<double>(spatial_rank));
    const double limit = std::sqrt(6.0 / ((static_cast<double>(rows) + static_cast<double>(cols)) * kvol));
    for (double& w : layer.weights.values()) w = rng.symmetric(limit);
    return layer;
}

} // namespace

ConvLayer make_conv(std::size_t in_channels, std::size_t out_channels, std::size_t spatial_rank, std::size_t kernel,
                    std::size_t stride, std::size_t padding, Rng& rng)
{
    return make_layer(out_channels, in_channels, out_channels, spatial_rank, kernel, stride, padding, false, rng);
}

ConvLayer make_deconv(std::size_t in_channels, std::size_t out_channels, std::size_t spatial_rank, std::size_t kernel,
                      std::size_t stride, std::size_t padding, std::array<std::size_t, 3> output_padding, Rng& rng)
{
    auto layer = make_layer(in_channels, out_channels, out_channels, spatial_rank, kernel, stride, padding, true, rng);
    layer.output_padding = output_padding;
    check_layer(layer);
    return layer;
}

Shape conv_output_shape(const ConvLayer& layer, const Shape& input)
{
    check_layer(layer);
    if (input.size() != layer.spatial_rank() + 2) {
        throw ShapeError("input " + shape_string(input) + " has wrong rank for kernel " +
                         shape_string(layer.weights.shape()));
    }
    auto sp = spatial3(input);
    const std::size_t first = layer.spatial_rank() == 2 ? 1 : 0;
    const std::size_t k = layer.kernel();
    for (std::size_t a = first; a < 3; ++a) {
        if (layer.transposed) {
            const std::size_t full = (sp[a] - 1) * layer.stride + k + layer.output_padding[a];
            if (full <= 2 * layer.padding) throw ShapeError("transposed convolution output would be empty");
            sp[a] = full - 2 * layer.padding;
        } else {
            if (sp[a] + 2 * layer.padding < k) {
                throw ShapeError("convolution input " + shape_string(input) + " smaller than kernel");
            }
            sp[a] = (sp[a] + 2 * layer.padding - k) / layer.stride + 1;
        }
    }
    return with_spatial(input[0], layer.out_channels(), layer.spatial_rank(), sp);
}

Tensor conv_forward(const ConvLayer& layer, const Tensor& x)
{
    if (layer.transposed) throw ShapeError("conv_forward called on a transposed layer");
    check_input(layer, x, "conv_forward");
    Tensor out(conv_output_shape(layer, x.shape()));
    const auto g = make_geometry(layer, layer.in_channels(), spatial3(x.shape()), spatial3(out.shape()));
    const std::size_t K = g.rows(), P = g.small_vol(), Co = layer.out_channels();

    RowMat cols(K, P);
    ConstMapMat w(layer.weights.data(), Co, K);
    for (std::size_t n = 0; n < x.dim(0); ++n) {
        im2col(g, x.sample(n).data(), cols.data());
        MapMat o(out.sample(n).data(), Co, P);
        o.noalias() = w * cols;
        for (std::size_t c = 0; c < Co; ++c) o.row(c).array() += layer.bias[c];
    }
    return out;
}

ConvGrads conv_backward(const ConvLayer& layer, const Tensor& x, const Tensor& grad_out)
{
    if (layer.transposed) throw ShapeError("conv_backward called on a transposed layer");
    check_input(layer, x, "conv_backward");
    if (grad_out.shape() != conv_output_shape(layer, x.shape())) {
        throw ShapeError("conv_backward: gradient shape " + shape_string(grad_out.shape()) +
                         " does not match forward output");
    }
    const auto g = make_geometry(layer, layer.in_channels(), spatial3(x.shape()), spatial3(grad_out.shape()));
    const std::size_t K = g.rows(), P = g.small_vol(), Co = layer.out_channels();

    ConvGrads grads{Tensor(x.shape()), Tensor(layer.weights.shape()), Tensor(layer.bias.shape())};
    RowMat cols(K, P);
    RowMat dcols(K, P);
    ConstMapMat w(layer.weights.data(), Co, K);
    MapMat gw(grads.grad_w.data(), Co, K);
    for (std::size_t n = 0; n < x.dim(0); ++n) {
        ConstMapMat go(grad_out.sample(n).data(), Co, P);
        im2col(g, x.sample(n).data(), cols.data());
        gw.noalias() += go * cols.transpose();
        for (std::size_t c = 0; c < Co; ++c) grads.grad_b[c] += go.row(c).sum();
        dcols.noalias() = w.transpose() * go;
        col2im(g, dcols.data(), grads.grad_x.sample(n).data());
    }
    return grads;
}

Tensor deconv_forward(const ConvLayer& layer, const Tensor& y)
{
    if (!layer.transposed) throw ShapeError("deconv_forward called on a regular layer");
    check_input(layer, y, "deconv_forward");
    Tensor out(conv_output_shape(layer, y.shape()));
    const auto g = make_geometry(layer, layer.out_channels(), spatial3(out.shape()), spatial3(y.shape()));
    const std::size_t K = g.rows(), P = g.small_vol(), Ci = layer.in_channels();
    const std::size_t Co = layer.out_channels(), vol = g.big_vol();

    RowMat cols(K, P);
    ConstMapMat w(layer.weights.data(), Ci, K);
    for (std::size_t n = 0; n < y.dim(0); ++n) {
        ConstMapMat yin(y.sample(n).data(), Ci, P);
        cols.noalias() = w.transpose() * yin;
        double* o = out.sample(n).data();
        col2im(g, cols.data(), o);
        for (std::size_t c = 0; c < Co; ++c) {
            for (std::size_t v = 0; v < vol; ++v) o[c * vol + v] += layer.bias[c];
        }
    }
    return out;
}

ConvGrads deconv_backward(const ConvLayer& layer, const Tensor& y, const Tensor& grad_out)
{
    if (!layer.transposed) throw ShapeError("deconv_backward called on a regular layer");
    check_input(layer, y, "deconv_backward");
    if (grad_out.shape() != conv_output_shape(layer, y.shape())) {
        throw ShapeError("deconv_backward: gradient shape " + shape_string(grad_out.shape()) +
                         " does not match forward output");
    }
    const auto g = make_geometry(layer, layer.out_channels(), spatial3(grad_out.shape()), spatial3(y.shape()));
    const std::size_t K = g.rows(), P = g.small_vol(), Ci = layer.in_channels();
    const std::size_t Co = layer.out_channels(), vol = g.big_vol();

    ConvGrads grads{Tensor(y.shape()), Tensor(layer.weights.shape()), Tensor(layer.bias.shape())};
    RowMat cols(K, P);
    ConstMapMat w(layer.weights.data(), Ci, K);
    MapMat gw(grads.grad_w.data(), Ci, K);
    for (std::size_t n = 0; n < y.dim(0); ++n) {
        const double* go = grad_out.sample(n).data();
        im2col(g, go, cols.data());
        ConstMapMat yin(y.sample(n).data(), Ci, P);
        gw.noalias() += yin * cols.transpose();
        MapMat gy(grads.grad_x.sample(n).data(), Ci, P);
        gy.noalias() = w * cols;
        for (std::size_t c = 0; c < Co; ++c) {
            double s = 0.0;
            for (std::size_t v = 0; v < vol; ++v) s += go[c * vol + v];
            grads.grad_b[c] += s;
        }
    }
    return grads;
}

} // namespace rom::nn
