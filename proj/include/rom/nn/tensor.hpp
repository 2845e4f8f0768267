#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace rom::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// SIMD-aligned buffer, so vectorised kernels take the same path on every run.
using Storage = std::vector<double, Eigen::aligned_allocator<double>>;

/// Dense row-major (last axis fastest) array of doubles. Images are
/// [N, C, H, W], volumes [N, C, D, H, W], feature batches [N, F].
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::span<const double> data);

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    Storage& storage() { return data_; }
    const Storage& storage() const { return data_; }
    std::vector<double> to_vector() const { return {data_.begin(), data_.end()}; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    /// Same data, new shape with equal element count.
    Tensor reshaped(Shape shape) const;

    /// Contiguous block of sample n along the leading axis.
    std::span<const double> sample(std::size_t n) const;
    std::span<double> sample(std::size_t n);

    void fill(double v);
    bool all_finite() const;

    bool operator==(const Tensor&) const = default;

private:
    Shape shape_;
    Storage data_;
};

double dot(const Tensor& a, const Tensor& b);

} // namespace rom::nn
