#include "rom/nn/dense.hpp"

#include "rom/error.hpp"
#include "rom/rng.hpp"

#include <Eigen/Core>

#include <cmath>

namespace rom::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void check(const DenseLayer& layer, const Tensor& x, const char* what)
{
    if (layer.weights.rank() != 2 || layer.bias.size() != layer.weights.dim(0)) {
        throw ShapeError(std::string(what) + ": malformed dense layer " + shape_string(layer.weights.shape()));
    }
    if (x.rank() != 2 || x.dim(1) != layer.in_features()) {
        throw ShapeError(std::string(what) + ": input " + shape_string(x.shape()) + " does not match " +
                         std::to_string(layer.in_features()) + " input features");
    }
}

} // namespace

DenseLayer make_dense(std::size_t in_features, std::size_t out_features, Rng& rng)
{
    DenseLayer layer{Tensor({out_features, in_features}), Tensor({out_features})};
    const double limit = std::sqrt(6.0 / static_cast<double>(in_features + out_features));
    for (double& w : layer.weights.values()) w = rng.symmetric(limit);
    return layer;
}

Tensor dense_forward(const DenseLayer& layer, const Tensor& x)
{
    check(layer, x, "dense_forward");
    const auto n = x.dim(0), fi = layer.in_features(), fo = layer.out_features();
    Tensor out({n, fo});
    MapMat y(out.data(), n, fo);
    y.noalias() = ConstMapMat(x.data(), n, fi) * ConstMapMat(layer.weights.data(), fo, fi).transpose();
    y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(layer.bias.data(), fo);
    return out;
}

DenseGrads dense_backward(const DenseLayer& layer, const Tensor& x, const Tensor& grad_out)
{
    check(layer, x, "dense_backward");
    const auto n = x.dim(0), fi = layer.in_features(), fo = layer.out_features();
    if (grad_out.shape() != Shape{n, fo}) {
        throw ShapeError("dense_backward: gradient shape " + shape_string(grad_out.shape()) + " mismatch");
    }
    DenseGrads g{Tensor(x.shape()), Tensor(layer.weights.shape()), Tensor(layer.bias.shape())};
    ConstMapMat go(grad_out.data(), n, fo);
    ConstMapMat xin(x.data(), n, fi);
    MapMat(g.grad_x.data(), n, fi).noalias() = go * ConstMapMat(layer.weights.data(), fo, fi);
    MapMat(g.grad_w.data(), fo, fi).noalias() = go.transpose() * xin;
    Eigen::Map<Eigen::RowVectorXd>(g.grad_b.data(), fo) = go.colwise().sum();
    return g;
}

Tensor flatten(const Tensor& x)
{
    if (x.rank() < 1) throw ShapeError("flatten of a rank-0 tensor");
    return x.reshaped({x.dim(0), x.size() / x.dim(0)});
}

Tensor unflatten(const Tensor& x, const Shape& sample_shape)
{
    if (x.rank() != 2 || x.dim(1) != shape_size(sample_shape)) {
        throw ShapeError("unflatten: " + shape_string(x.shape()) + " cannot become samples of " +
                         shape_string(sample_shape));
    }
    Shape s{x.dim(0)};
    s.insert(s.end(), sample_shape.begin(), sample_shape.end());
    return x.reshaped(std::move(s));
}

} // namespace rom::nn
