#include "rom/nn/activation.hpp"

#include "rom/error.hpp"

#include <cmath>

namespace rom::nn {

Activation parse_activation(std::string_view name)
{
    if (name == "elu") return Activation::elu;
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "linear") return Activation::linear;
    throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string to_string(Activation a)
{
    switch (a) {
    case Activation::elu: return "elu";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::linear: return "linear";
    }
    return "?";
}

Tensor activation_forward(Activation a, const Tensor& x)
{
    Tensor y = x;
    switch (a) {
    case Activation::elu:
        for (double& v : y.values()) v = v > 0.0 ? v : std::expm1(v);
        break;
    case Activation::relu:
        for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
        break;
    case Activation::tanh:
        for (double& v : y.values()) v = std::tanh(v);
        break;
    case Activation::linear:
        break;
    }
    return y;
}

Tensor activation_backward(Activation a, const Tensor& x, const Tensor& grad_out)
{
    if (x.shape() != grad_out.shape()) {
        throw ShapeError("activation_backward: " + shape_string(x.shape()) + " vs " + shape_string(grad_out.shape()));
    }
    Tensor g = grad_out;
    switch (a) {
    case Activation::elu:
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= x[i] > 0.0 ? 1.0 : std::exp(x[i]);
        break;
    case Activation::relu:
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= x[i] > 0.0 ? 1.0 : 0.0;
        break;
    case Activation::tanh:
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double t = std::tanh(x[i]);
            g[i] *= 1.0 - t * t;
        }
        break;
    case Activation::linear:
        break;
    }
    return g;
}

} // namespace rom::nn
