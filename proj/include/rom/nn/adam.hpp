#pragma once

#include "rom/nn/tensor.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace rom::nn {

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t step = 0;
    std::vector<Tensor> m; // lazily sized on the first step
    std::vector<Tensor> v;
};

/// Bias-corrected adaptive-moment update, in place. Throws DivergenceError
/// naming the parameter index if any gradient is non-finite.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state);

} // namespace rom::nn
