#include "oracles.hpp"

#include "rom/error.hpp"
#include "rom/nn/adam.hpp"
#include "rom/nn/network.hpp"

#include <doctest.h>

#include <limits>
#include <sstream>

using namespace rom;
using namespace rom::nn;

TEST_CASE("identity kernel reproduces the input")
{
    ConvLayer layer{Tensor({1, 1, 1, 1}, 1.0), Tensor({1}), 1, 0};
    Rng rng(3);
    const Tensor x = oracle::random_tensor({2, 1, 3, 4}, rng);
    CHECK(conv_forward(layer, x) == x);

    const auto g = conv_backward(layer, x, x);
    CHECK(g.grad_x == x);

    layer.transposed = true;
    CHECK(deconv_forward(layer, x) == x);
}

TEST_CASE("2x2 hand convolution")
{
    ConvLayer layer{Tensor({1, 1, 2, 2}, std::vector<double>{1, 0, 0, 1}), Tensor({1}), 1, 0};
    const Tensor x({1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
    const Tensor y = conv_forward(layer, x);
    REQUIRE(y.shape() == Shape{1, 1, 1, 1});
    CHECK(y[0] == 5.0);
}

TEST_CASE("zero input gives the broadcast bias")
{
    Rng rng(4);
    ConvLayer layer = make_conv(2, 3, 2, 3, 2, 1, rng);
    layer.bias = Tensor({3}, std::vector<double>{0.5, -1.0, 2.0});
    const Tensor y = conv_forward(layer, Tensor({1, 2, 5, 5}));
    const std::size_t per = y.size() / 3;
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < per; ++i) CHECK(y[c * per + i] == layer.bias[c]);
    }
}

TEST_CASE("zero upstream gradient gives zero gradients")
{
    Rng rng(5);
    const ConvLayer layer = make_conv(2, 2, 3, 3, 1, 1, rng);
    const Tensor x = oracle::random_tensor({1, 2, 3, 4, 4}, rng);
    const auto g = conv_backward(layer, x, Tensor(conv_output_shape(layer, x.shape())));
    for (double v : g.grad_x.values()) CHECK(v == 0.0);
    for (double v : g.grad_w.values()) CHECK(v == 0.0);
    for (double v : g.grad_b.values()) CHECK(v == 0.0);
}

TEST_CASE("3x4 input with 2x2 kernel matches finite differences")
{
    Rng rng(6);
    const ConvLayer layer = make_conv(1, 1, 2, 2, 1, 0, rng);
    const Tensor x = oracle::random_tensor({1, 1, 3, 4}, rng);
    const Tensor r = oracle::random_tensor({1, 1, 2, 3}, rng);
    const auto g = conv_backward(layer, x, r);
    const auto report = grad_check(
        [&](std::span<const double> v) {
            return dot(conv_forward(layer, Tensor(x.shape(), std::vector<double>(v.begin(), v.end()))), r);
        },
        x.values(), g.grad_x.values(), 1e-6);
    CHECK(report.passed);
    CHECK(report.max_rel_error <= 1e-6);
}

TEST_CASE("every layer passes finite-difference checks over seeded shapes")
{
    const auto suite = oracle::gradient_suite(20, 1e-6);
    INFO("worst " << suite.worst << " in " << suite.worst_case);
    CHECK(suite.checks >= 20);
    CHECK(suite.passed());
    CHECK(suite.worst <= 1e-6);
}

TEST_CASE("transposed convolution is the adjoint of convolution")
{
    CHECK(oracle::adjoint_suite(20) <= 1e-10);
}

TEST_CASE("transposed layer output extents")
{
    Rng rng(7);
    const ConvLayer down = make_conv(1, 1, 2, 3, 2, 1, rng);
    CHECK(conv_output_shape(down, {1, 1, 7, 8}) == Shape{1, 1, 4, 4});
    const ConvLayer up = make_deconv(1, 1, 2, 3, 2, 1, {0, 0, 1}, rng);
    CHECK(conv_output_shape(up, {1, 1, 4, 4}) == Shape{1, 1, 7, 8});
    CHECK_THROWS_AS(make_deconv(1, 1, 2, 3, 2, 1, {0, 0, 2}, rng), ShapeError);
}

TEST_CASE("dense identity and mse hand values")
{
    DenseLayer dense{Tensor({2, 2}, std::vector<double>{1, 0, 0, 1}), Tensor({2})};
    const Tensor x({1, 2}, std::vector<double>{1, 2});
    CHECK(dense_forward(dense, x) == x);

    const auto zero = mse_loss(x, x);
    CHECK(zero.value == 0.0);
    for (double g : zero.grad.values()) CHECK(g == 0.0);

    const auto loss = mse_loss(x, Tensor({1, 2}));
    CHECK(loss.value == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(loss.grad[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(loss.grad[1] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(mse_loss(x, Tensor({2, 1})), ShapeError);
}

TEST_CASE("flatten and unflatten are inverse")
{
    Rng rng(8);
    const Tensor x = oracle::random_tensor({2, 3, 4, 5}, rng);
    const Tensor f = flatten(x);
    CHECK(f.shape() == Shape{2, 60});
    CHECK(unflatten(f, {3, 4, 5}) == x);
}

TEST_CASE("adam first step and zero gradient")
{
    Tensor p({1}, 0.7);
    AdamState state;
    state.lr = 0.1;
    std::vector<Tensor*> params{&p};
    adam_step(params, std::vector<Tensor>{Tensor({1}, 1.0)}, state);
    CHECK(p[0] == doctest::Approx(0.7 - 0.1 / (1.0 + 1e-8)).epsilon(1e-12));

    Tensor q({3}, 2.0);
    AdamState fresh;
    std::vector<Tensor*> qs{&q};
    adam_step(qs, std::vector<Tensor>{Tensor({3})}, fresh);
    for (double v : q.values()) CHECK(v == 2.0);

    std::vector<Tensor> bad{Tensor({3}, std::numeric_limits<double>::quiet_NaN())};
    CHECK_THROWS_AS(adam_step(qs, bad, fresh), DivergenceError);
}

namespace {

Network small_network(std::uint64_t seed)
{
    Rng rng(seed);
    Network net;
    net.add(make_conv(1, 2, 2, 3, 2, 1, rng));
    net.add(ActivationLayer{Activation::elu});
    net.add(ReshapeLayer{{2 * 3 * 3}});
    net.add(make_dense(18, 3, rng));
    return net;
}

std::vector<double> train_steps(std::uint64_t seed)
{
    Network net = small_network(seed);
    Rng rng(seed + 1);
    const Tensor x = oracle::random_tensor({4, 1, 6, 6}, rng);
    const Tensor target = oracle::random_tensor({4, 3}, rng);
    AdamState state;
    std::vector<Tensor> trace;
    for (int step = 0; step < 5; ++step) {
        const auto loss = mse_loss(net.forward(x, trace), target);
        std::vector<Tensor> grads;
        net.backward(trace, loss.grad, grads);
        adam_step(net.parameters(), grads, state);
    }
    std::vector<double> out;
    for (const Tensor* t : std::as_const(net).parameters()) out.insert(out.end(), t->values().begin(), t->values().end());
    return out;
}

} // namespace

TEST_CASE("training is bit-reproducible for a fixed seed")
{
    CHECK(train_steps(11) == train_steps(11));
    CHECK(train_steps(11) != train_steps(12));
}

TEST_CASE("network backward matches finite differences end to end")
{
    const Network net = small_network(21);
    Rng rng(22);
    const Tensor x = oracle::random_tensor({2, 1, 6, 6}, rng);
    const Tensor r = oracle::random_tensor({2, 3}, rng);
    std::vector<Tensor> trace, grads;
    net.forward(x, trace);
    const Tensor gx = net.backward(trace, r, grads);
    const auto report = grad_check(
        [&](std::span<const double> v) {
            return dot(net.forward(Tensor(x.shape(), std::vector<double>(v.begin(), v.end()))), r);
        },
        x.values(), gx.values(), 1e-6);
    CHECK(report.passed);
    CHECK(grads.size() == 4);
}

TEST_CASE("checkpoint round trip")
{
    const Network a = small_network(31), b = small_network(32);
    std::stringstream ss;
    save_checkpoint(ss, {&a, &b}, "key=value\n");
    const std::string bytes = ss.str();

    std::istringstream in(bytes);
    const auto ck = load_checkpoint(in, "memory");
    REQUIRE(ck.networks.size() == 2);
    CHECK(ck.manifest == "key=value\n");
    Rng rng(33);
    const Tensor x = oracle::random_tensor({1, 1, 6, 6}, rng);
    CHECK(ck.networks[0].forward(x) == a.forward(x));
    CHECK(ck.networks[1].forward(x) == b.forward(x));

    std::ostringstream again;
    save_checkpoint(again, {&ck.networks[0], &ck.networks[1]}, ck.manifest);
    CHECK(again.str() == bytes);

    std::istringstream cut(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(load_checkpoint(cut, "memory"), FormatError);
    std::istringstream junk("NOPE");
    CHECK_THROWS_AS(load_checkpoint(junk, "memory"), FormatError);
}
