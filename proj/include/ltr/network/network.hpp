#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ltr/core/tensor.hpp"

namespace ltr {

enum class Activation { Relu, ArgMax };

/// Dense layer; weights are row-major out_size x in_size.
struct FullyConnectedLayer {
    std::size_t out_size = 0;
    std::size_t in_size = 0;
    std::vector<double> weights;
    std::vector<double> bias;
    Activation activation = Activation::Relu;

    std::span<const double> row(std::size_t j) const {
        return std::span<const double>(weights).subspan(j * in_size, in_size);
    }
    friend bool operator==(const FullyConnectedLayer&, const FullyConnectedLayer&) = default;
};

/// Valid-mode, stride-1 convolution bank followed by ReLU and disjoint max-pooling.
struct ConvolutionalLayer {
    std::vector<Tensor3> kernels;  // each kernel_height x kernel_width x in_channels
    std::vector<double> biases;    // one per kernel
    std::size_t pool_height = 1;
    std::size_t pool_width = 1;

    std::size_t kernel_count() const noexcept { return kernels.size(); }
    std::size_t kernel_height() const noexcept { return kernels.empty() ? 0 : kernels.front().height(); }
    std::size_t kernel_width() const noexcept { return kernels.empty() ? 0 : kernels.front().width(); }
    std::size_t kernel_channels() const noexcept { return kernels.empty() ? 0 : kernels.front().channels(); }
    friend bool operator==(const ConvolutionalLayer&, const ConvolutionalLayer&) = default;
};

using Layer = std::variant<FullyConnectedLayer, ConvolutionalLayer>;

struct Shape {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;

    std::size_t size() const noexcept { return height * width * channels; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

struct Network {
    std::size_t input_height = 0;
    std::size_t input_width = 0;
    std::size_t input_channels = 0;
    std::vector<Layer> layers;
    std::size_t class_count = 0;

    Shape input_shape() const noexcept { return {input_height, input_width, input_channels}; }
    friend bool operator==(const Network&, const Network&) = default;
};

struct ShapeViolation {
    std::size_t layer = 0;  // 0-based layer index
    std::string message;
};

/// Every invariant violation along the layer chain; empty means valid.
std::vector<ShapeViolation> validate(const Network& net);

/// Throws DimensionError carrying all violations when the network is invalid.
void require_valid(const Network& net);

/// Output shape of each layer (conv: pooled shape; fc: 1 x 1 x out_size).
/// Assumes validate(net) is empty.
std::vector<Shape> layer_output_shapes(const Network& net);

std::vector<double> fc_linear(const FullyConnectedLayer& layer, std::span<const double> input);

std::vector<double> relu(std::span<const double> v);

Tensor3 conv_linear(const ConvolutionalLayer& layer, const Tensor3& input);

Tensor3 maxpool(const Tensor3& t, std::size_t pool_height, std::size_t pool_width);

/// Values of one layer during inference, flattened in the global tensor order.
struct LayerTrace {
    std::vector<double> linear;     // weighted sums / convolution outputs
    std::vector<double> rectified;  // after ReLU (equals linear on the argmax layer)
    std::vector<double> output;     // layer output (pooled for conv layers)
};

struct ForwardResult {
    int label = 0;                // 1-based class in [1, class_count]
    std::vector<double> logits;   // final weighted sums
    std::vector<LayerTrace> trace;
};

/// Index (1-based) of the largest logit, ties resolved towards the lowest index.
int argmax_label(std::span<const double> logits);

ForwardResult forward(const Network& net, const Tensor3& input);
ForwardResult forward(const Network& net, const Image& im);

}  // namespace ltr
