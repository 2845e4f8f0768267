#include "rom/nn/tensor.hpp"

#include "rom/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace rom::nn {

std::size_t shape_size(const Shape& shape)
{
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

std::string shape_string(const Shape& shape)
{
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_{std::move(shape)}, data_(shape_size(shape_), fill)
{
    if (std::find(shape_.begin(), shape_.end(), std::size_t{0}) != shape_.end()) {
        throw ShapeError("tensor extents must be positive: " + shape_string(shape_));
    }
}

Tensor::Tensor(Shape shape, std::span<const double> data)
    : shape_{std::move(shape)}, data_(data.begin(), data.end())
{
    if (data_.size() != shape_size(shape_)) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_string(shape_));
    }
}

Tensor Tensor::reshaped(Shape shape) const
{
    if (shape_size(shape) != data_.size()) {
        throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    }
    return Tensor(std::move(shape), data_);
}

std::span<const double> Tensor::sample(std::size_t n) const
{
    const std::size_t stride = data_.size() / shape_.at(0);
    return std::span<const double>(data_).subspan(n * stride, stride);
}

std::span<double> Tensor::sample(std::size_t n)
{
    const std::size_t stride = data_.size() / shape_.at(0);
    return std::span<double>(data_).subspan(n * stride, stride);
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const
{
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double dot(const Tensor& a, const Tensor& b)
{
    if (a.size() != b.size()) throw ShapeError("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace rom::nn
