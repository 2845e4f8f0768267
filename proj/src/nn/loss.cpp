#include "rom/nn/loss.hpp"

#include "rom/error.hpp"

namespace rom::nn {

LossResult mse_loss(const Tensor& pred, const Tensor& target)
{
    if (pred.shape() != target.shape()) {
        throw ShapeError("mse_loss: " + shape_string(pred.shape()) + " vs " + shape_string(target.shape()));
    }
    LossResult r{0.0, Tensor(pred.shape())};
    const double n = static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        r.value += d * d;
        r.grad[i] = 2.0 * d / n;
    }
    r.value /= n;
    return r;
}

} // namespace rom::nn
