#include "ltr/network/network.hpp"

#include <sstream>

#include "ltr/core/errors.hpp"
#include "ltr/kernels/kernels.hpp"

namespace ltr {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

std::string str(const Shape& s) {
    return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" + std::to_string(s.channels);
}

}  // namespace

std::vector<ShapeViolation> validate(const Network& net) {
    std::vector<ShapeViolation> out;
    auto fail = [&](std::size_t layer, std::string msg) { out.push_back({layer, std::move(msg)}); };

    Shape current = net.input_shape();
    if (current.height == 0 || current.width == 0 || current.channels == 0) {
        fail(0, "input shape must be positive, got " + str(current));
        return out;
    }
    if (net.layers.empty()) {
        fail(0, "network has no layers");
        return out;
    }
    if (net.class_count == 0) {
        fail(net.layers.size() - 1, "class_count must be positive");
    }

    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const bool last = i + 1 == net.layers.size();
        std::visit(Overloaded{
                       [&](const FullyConnectedLayer& fc) {
                           if (fc.bias.size() != fc.out_size || fc.out_size == 0) {
                               fail(i, "bias length " + std::to_string(fc.bias.size()) + " differs from weight rows " +
                                           std::to_string(fc.out_size));
                           }
                           if (fc.weights.size() != fc.out_size * fc.in_size) {
                               fail(i, "weights hold " + std::to_string(fc.weights.size()) + " values, expected " +
                                           std::to_string(fc.out_size) + "x" + std::to_string(fc.in_size));
                           }
                           if (fc.in_size != current.size()) {
                               fail(i, "expects " + std::to_string(fc.in_size) + " inputs but previous layer produces " +
                                           std::to_string(current.size()));
                           }
                           if (fc.activation == Activation::ArgMax && !last) {
                               fail(i, "argmax activation is only legal on the final layer");
                           }
                           if (last) {
                               if (fc.activation != Activation::ArgMax) {
                                   fail(i, "final layer must use argmax activation");
                               }
                               if (fc.out_size != net.class_count) {
                                   fail(i, "final layer has " + std::to_string(fc.out_size) + " outputs but class_count is " +
                                               std::to_string(net.class_count));
                               }
                           }
                           current = {1, 1, fc.out_size};
                       },
                       [&](const ConvolutionalLayer& conv) {
                           if (last) {
                               fail(i, "final layer must be fully connected with argmax activation");
                           }
                           if (conv.kernels.empty()) {
                               fail(i, "convolutional layer needs at least one kernel");
                               return;
                           }
                           const Tensor3& k0 = conv.kernels.front();
                           bool uniform = true;
                           for (const Tensor3& k : conv.kernels) {
                               uniform = uniform && k.same_shape(k0);
                           }
                           if (!uniform) {
                               fail(i, "kernels do not share one shape");
                               return;
                           }
                           if (conv.biases.size() != conv.kernels.size()) {
                               fail(i, "expected " + std::to_string(conv.kernels.size()) + " biases, got " +
                                           std::to_string(conv.biases.size()));
                           }
                           if (k0.channels() != current.channels) {
                               fail(i, "kernel channels " + std::to_string(k0.channels()) + " differ from input channels " +
                                           std::to_string(current.channels));
                           }
                           if (k0.height() > current.height || k0.width() > current.width) {
                               fail(i, "kernel " + std::to_string(k0.height()) + "x" + std::to_string(k0.width()) +
                                           " larger than input " + str(current));
                               return;
                           }
                           if (conv.pool_height == 0 || conv.pool_width == 0) {
                               fail(i, "pool dimensions must be positive");
                               return;
                           }
                           const std::size_t rows = current.height - k0.height() + 1;
                           const std::size_t cols = current.width - k0.width() + 1;
                           if (rows % conv.pool_height != 0 || cols % conv.pool_width != 0) {
                               fail(i, "convolution output " + std::to_string(rows) + "x" + std::to_string(cols) +
                                           " not divisible by pool " + std::to_string(conv.pool_height) + "x" +
                                           std::to_string(conv.pool_width));
                               return;
                           }
                           current = {rows / conv.pool_height, cols / conv.pool_width, conv.kernels.size()};
                       },
                   },
                   net.layers[i]);
    }
    return out;
}

void require_valid(const Network& net) {
    const auto violations = validate(net);
    if (violations.empty()) {
        return;
    }
    std::ostringstream msg;
    msg << "invalid network:";
    for (const auto& v : violations) {
        msg << " [layer " << v.layer << "] " << v.message << ";";
    }
    throw DimensionError(msg.str());
}

std::vector<Shape> layer_output_shapes(const Network& net) {
    std::vector<Shape> shapes;
    Shape current = net.input_shape();
    for (const Layer& layer : net.layers) {
        if (const auto* fc = std::get_if<FullyConnectedLayer>(&layer)) {
            current = {1, 1, fc->out_size};
        } else {
            const auto& conv = std::get<ConvolutionalLayer>(layer);
            current = {(current.height - conv.kernel_height() + 1) / conv.pool_height,
                       (current.width - conv.kernel_width() + 1) / conv.pool_width, conv.kernel_count()};
        }
        shapes.push_back(current);
    }
    return shapes;
}

std::vector<double> fc_linear(const FullyConnectedLayer& layer, std::span<const double> input) {
    if (input.size() != layer.in_size) {
        throw DimensionError("fc_linear: input length " + std::to_string(input.size()) + ", layer expects " +
                             std::to_string(layer.in_size));
    }
    std::vector<double> out(layer.out_size);
    for (std::size_t j = 0; j < layer.out_size; ++j) {
        out[j] = kernels::dot(layer.row(j), input) + layer.bias[j];
    }
    return out;
}

std::vector<double> relu(std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    kernels::relu_inplace(out);
    return out;
}

Tensor3 conv_linear(const ConvolutionalLayer& layer, const Tensor3& input) {
    if (layer.kernels.empty()) {
        throw DimensionError("conv_linear: layer has no kernels");
    }
    const std::size_t p = layer.kernel_height();
    const std::size_t q = layer.kernel_width();
    const std::size_t ch = input.channels();
    if (layer.kernel_channels() != ch || p > input.height() || q > input.width()) {
        throw DimensionError("conv_linear: kernel " + std::to_string(p) + "x" + std::to_string(q) + "x" +
                             std::to_string(layer.kernel_channels()) + " incompatible with input " +
                             std::to_string(input.height()) + "x" + std::to_string(input.width()) + "x" +
                             std::to_string(ch));
    }
    const std::size_t rows = input.height() - p + 1;
    const std::size_t cols = input.width() - q + 1;
    const std::size_t k = layer.kernel_count();
    Tensor3 out(rows, cols, k);
    auto in = input.values();
    const std::size_t span_len = q * ch;
    for (std::size_t j = 0; j < k; ++j) {
        auto kern = layer.kernels[j].values();
        for (std::size_t u = 0; u < rows; ++u) {
            for (std::size_t v = 0; v < cols; ++v) {
                double sum = layer.biases[j];
                for (std::size_t a = 0; a < p; ++a) {
                    sum += kernels::dot(kern.subspan(a * span_len, span_len),
                                        in.subspan(((u + a) * input.width() + v) * ch, span_len));
                }
                out.at(u, v, j) = sum;
            }
        }
    }
    return out;
}

Tensor3 maxpool(const Tensor3& t, std::size_t pool_height, std::size_t pool_width) {
    if (pool_height == 0 || pool_width == 0 || t.height() % pool_height != 0 || t.width() % pool_width != 0) {
        throw DimensionError("maxpool: " + std::to_string(t.height()) + "x" + std::to_string(t.width()) +
                             " not divisible by pool " + std::to_string(pool_height) + "x" + std::to_string(pool_width));
    }
    Tensor3 out(t.height() / pool_height, t.width() / pool_width, t.channels());
    for (std::size_t u = 0; u < out.height(); ++u) {
        for (std::size_t v = 0; v < out.width(); ++v) {
            for (std::size_t r = 0; r < t.channels(); ++r) {
                double best = t.at(u * pool_height, v * pool_width, r);
                for (std::size_t a = 0; a < pool_height; ++a) {
                    for (std::size_t b = 0; b < pool_width; ++b) {
                        const double x = t.at(u * pool_height + a, v * pool_width + b, r);
                        best = x > best ? x : best;
                    }
                }
                out.at(u, v, r) = best;
            }
        }
    }
    return out;
}

int argmax_label(std::span<const double> logits) {
    if (logits.empty()) {
        throw DimensionError("argmax of empty logits");
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.size(); ++j) {
        if (logits[j] > logits[best]) {
            best = j;
        }
    }
    return static_cast<int>(best) + 1;
}

ForwardResult forward(const Network& net, const Tensor3& input) {
    if (input.height() != net.input_height || input.width() != net.input_width ||
        input.channels() != net.input_channels) {
        throw DimensionError("forward: image shape does not match the network input");
    }
    ForwardResult result;
    Tensor3 current = input;
    for (const Layer& layer : net.layers) {
        LayerTrace trace;
        if (const auto* fc = std::get_if<FullyConnectedLayer>(&layer)) {
            trace.linear = fc_linear(*fc, current.values());
            trace.rectified = fc->activation == Activation::Relu ? relu(trace.linear) : trace.linear;
            trace.output = trace.rectified;
            current = Tensor3(1, 1, trace.output.size(), trace.output);
        } else {
            const auto& conv = std::get<ConvolutionalLayer>(layer);
            Tensor3 lin = conv_linear(conv, current);
            trace.linear = reshape_to_vector(lin);
            kernels::relu_inplace(lin.values());
            trace.rectified = reshape_to_vector(lin);
            current = maxpool(lin, conv.pool_height, conv.pool_width);
            trace.output = reshape_to_vector(current);
        }
        result.trace.push_back(std::move(trace));
    }
    result.logits = result.trace.back().linear;
    result.label = argmax_label(result.logits);
    return result;
}

ForwardResult forward(const Network& net, const Image& im) { return forward(net, im.data()); }

}  // namespace ltr
