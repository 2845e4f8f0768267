#pragma once

// 2D/3D convolution and transposed convolution with analytic gradients.
//
// A regular layer stores weights [C_out, C_in, k, k(, k)]. A transposed layer
// stores the weights of the convolution it is the adjoint of, i.e.
// [C_in, C_out, k, k(, k)] seen from the transposed layer itself, so that
// deconv_forward(layer, y) == conv_forward(layer, .)^T y + bias.

#include "rom/nn/tensor.hpp"

#include <array>
#include <cstddef>

namespace rom {
class Rng;
}

namespace rom::nn {

struct ConvLayer {
    Tensor weights;
    Tensor bias;
    std::size_t stride = 1;
    std::size_t padding = 0;
    bool transposed = false;
    /// Extra trailing extent per (D, H, W) axis of a transposed layer's output;
    /// each entry must be smaller than the stride.
    std::array<std::size_t, 3> output_padding{0, 0, 0};

    std::size_t spatial_rank() const { return weights.rank() - 2; }
    std::size_t kernel() const { return weights.dim(2); }
    std::size_t in_channels() const { return transposed ? weights.dim(0) : weights.dim(1); }
    std::size_t out_channels() const { return transposed ? weights.dim(1) : weights.dim(0); }
    std::size_t parameter_count() const { return weights.size() + bias.size(); }
};

/// Glorot-uniform weights, zero bias.
ConvLayer make_conv(std::size_t in_channels, std::size_t out_channels, std::size_t spatial_rank,
                    std::size_t kernel, std::size_t stride, std::size_t padding, Rng& rng);

ConvLayer make_deconv(std::size_t in_channels, std::size_t out_channels, std::size_t spatial_rank,
                      std::size_t kernel, std::size_t stride, std::size_t padding,
                      std::array<std::size_t, 3> output_padding, Rng& rng);

/// floor((in + 2 pad - k) / stride) + 1 per spatial axis for regular layers,
/// (in - 1) stride - 2 pad + k + output_padding for transposed ones.
Shape conv_output_shape(const ConvLayer& layer, const Shape& input);

struct ConvGrads {
    Tensor grad_x;
    Tensor grad_w;
    Tensor grad_b;
};

Tensor conv_forward(const ConvLayer& layer, const Tensor& x);
ConvGrads conv_backward(const ConvLayer& layer, const Tensor& x, const Tensor& grad_out);

Tensor deconv_forward(const ConvLayer& layer, const Tensor& y);
ConvGrads deconv_backward(const ConvLayer& layer, const Tensor& y, const Tensor& grad_out);

} // namespace rom::nn
