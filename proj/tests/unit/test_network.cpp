#include <doctest.h>

#include <random>

#include "ltr/core/errors.hpp"
#include "ltr/network/network.hpp"
#include "support/oracles.hpp"

using namespace ltr;

namespace {

Network two_layer() {
    Network net;
    net.input_height = 1;
    net.input_width = 1;
    net.input_channels = 2;
    net.class_count = 2;
    net.layers.push_back(FullyConnectedLayer{2, 2, {1, -1, -1, 1}, {0, 0}, Activation::Relu});
    net.layers.push_back(FullyConnectedLayer{2, 2, {1, 0, 0, 1}, {0, 0}, Activation::ArgMax});
    return net;
}

}  // namespace

TEST_CASE("hand-evaluated fully connected network") {
    const Network net = two_layer();
    const auto r = forward(net, Tensor3(1, 1, 2, std::vector<double>{3.0, 1.0}));
    CHECK(r.trace[0].linear == std::vector<double>{2.0, -2.0});
    CHECK(r.trace[0].rectified == std::vector<double>{2.0, 0.0});
    CHECK(r.logits == std::vector<double>{2.0, 0.0});
    CHECK(r.label == 1);
}

TEST_CASE("hand-evaluated convolution and pooling") {
    ConvolutionalLayer conv;
    conv.kernels = {Tensor3(2, 2, 1, std::vector<double>{1, 0, 0, -1})};
    conv.biases = {0.5};
    conv.pool_height = 1;
    conv.pool_width = 2;
    // 3x3 input 1..9: out(u,v) = in(u,v) - in(u+1,v+1) + 0.5 = -3.5 everywhere.
    std::vector<double> v(9);
    for (int i = 0; i < 9; ++i) {
        v[i] = i + 1;
    }
    const Tensor3 lin = conv_linear(conv, Tensor3(3, 3, 1, v));
    REQUIRE(lin.height() == 2);
    for (double x : lin.values()) {
        CHECK(x == -3.5);
    }
    const Tensor3 pooled = maxpool(Tensor3(2, 2, 1, std::vector<double>{1, 4, 3, 2}), 1, 2);
    CHECK(pooled.values()[0] == 4.0);
    CHECK(pooled.values()[1] == 3.0);
    CHECK_THROWS_AS(maxpool(lin, 3, 1), DimensionError);
}

TEST_CASE("argmax ties go to the lowest class") {
    const std::vector<double> tie{1.0, 3.0, 3.0};
    CHECK(argmax_label(tie) == 2);
    CHECK_THROWS_AS(argmax_label(std::vector<double>{}), DimensionError);
}

TEST_CASE("validation reports every violation") {
    Network net = two_layer();
    net.layers[0] = FullyConnectedLayer{2, 3, std::vector<double>(6), {0}, Activation::ArgMax};
    const auto v = validate(net);
    CHECK(v.size() >= 3);  // bias length, input size, argmax before the end
    CHECK_THROWS_AS(require_valid(net), DimensionError);

    Network conv_last = two_layer();
    conv_last.layers.pop_back();
    ConvolutionalLayer c;
    c.kernels = {Tensor3(1, 1, 2, 1.0)};
    c.biases = {0.0};
    conv_last.layers.push_back(c);
    CHECK_FALSE(validate(conv_last).empty());
    CHECK(validate(two_layer()).empty());
    std::mt19937_64 rng(1);
    CHECK(validate(oracle::random_tiny_cnn(rng)).empty());
}

TEST_CASE("forward matches an independent loop implementation") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const Network net = trial % 2 ? oracle::random_tiny_cnn(rng) : oracle::random_cnn(rng, 8, 3, 3, 2, 6, 4);
        const Image im = oracle::random_image(rng, net.input_height, net.input_width, 1);
        const auto got = forward(net, im).logits;
        const auto want = oracle::naive_logits(net, im.data());
        REQUIRE(got.size() == want.size());
        for (std::size_t j = 0; j < got.size(); ++j) {
            CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("layer output shapes") {
    std::mt19937_64 rng(2);
    const auto shapes = layer_output_shapes(oracle::random_tiny_cnn(rng));
    REQUIRE(shapes.size() == 3);
    CHECK(shapes[0] == Shape{2, 2, 2});
    CHECK(shapes[1] == Shape{1, 1, 8});
    CHECK(shapes[2] == Shape{1, 1, 3});
}
