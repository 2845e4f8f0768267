#include "rom/nn/adam.hpp"

#include "rom/error.hpp"

#include <cmath>

namespace rom::nn {

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state)
{
    if (params.size() != grads.size()) {
        throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i]->shape() != grads[i].shape()) {
            throw ShapeError("adam_step: gradient " + std::to_string(i) + " has shape " +
                             shape_string(grads[i].shape()) + ", parameter " + shape_string(params[i]->shape()));
        }
        if (!grads[i].all_finite()) {
            throw DivergenceError("non-finite gradient for parameter tensor " + std::to_string(i) + " at step " +
                                  std::to_string(state.step + 1));
        }
    }
    if (state.m.empty()) {
        for (auto* p : params) {
            state.m.emplace_back(p->shape());
            state.v.emplace_back(p->shape());
        }
    } else if (state.m.size() != params.size()) {
        throw ShapeError("adam_step: optimizer state was created for a different parameter set");
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        const Tensor& g = grads[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            const double mhat = m[j] / c1;
            const double vhat = v[j] / c2;
            p[j] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

} // namespace rom::nn
