#pragma once

#include "rom/nn/tensor.hpp"

namespace rom::nn {

struct LossResult {
    double value = 0.0;
    Tensor grad; // d loss / d pred
};

/// Mean over all elements of (pred - target)^2.
LossResult mse_loss(const Tensor& pred, const Tensor& target);

} // namespace rom::nn
