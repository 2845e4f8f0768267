#pragma once

#include "rom/nn/tensor.hpp"

namespace rom {
class Rng;
}

namespace rom::nn {

/// y = x W^T + b on [N, F_in] batches. Weights are [F_out, F_in].
struct DenseLayer {
    Tensor weights;
    Tensor bias;

    std::size_t in_features() const { return weights.dim(1); }
    std::size_t out_features() const { return weights.dim(0); }
    std::size_t parameter_count() const { return weights.size() + bias.size(); }
};

DenseLayer make_dense(std::size_t in_features, std::size_t out_features, Rng& rng);

struct DenseGrads {
    Tensor grad_x;
    Tensor grad_w;
    Tensor grad_b;
};

Tensor dense_forward(const DenseLayer& layer, const Tensor& x);
DenseGrads dense_backward(const DenseLayer& layer, const Tensor& x, const Tensor& grad_out);

/// [N, ...] -> [N, prod(...)].
Tensor flatten(const Tensor& x);
/// [N, F] -> [N, sample_shape...].
Tensor unflatten(const Tensor& x, const Shape& sample_shape);

} // namespace rom::nn
