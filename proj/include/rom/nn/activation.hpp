#pragma once

#include "rom/nn/tensor.hpp"

#include <string>
#include <string_view>

namespace rom::nn {

enum class Activation { elu, relu, tanh, linear };

Activation parse_activation(std::string_view name);
std::string to_string(Activation a);

Tensor activation_forward(Activation a, const Tensor& x);
/// Gradient with respect to the activation input x.
Tensor activation_backward(Activation a, const Tensor& x, const Tensor& grad_out);

} // namespace rom::nn
