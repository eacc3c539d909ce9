#include <cmath>

#include "json_util.hpp"
#include "ltr/io/io.hpp"

namespace ltr::io {

using detail::json;

namespace {

std::vector<double> numbers(const json& v, const std::string& ctx) {
    std::vector<double> out;
    const json& a = detail::array(v, ctx);
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.push_back(detail::number(a[i], detail::at(ctx, i)));
    }
    return out;
}

FullyConnectedLayer parse_fc(const json& j, const std::string& ctx) {
    FullyConnectedLayer fc;
    const json& rows = detail::array(detail::field(j, "weights", ctx), ctx + ".weights");
    fc.out_size = rows.size();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto row = numbers(rows[r], detail::at(ctx + ".weights", r));
        if (r == 0) {
            fc.in_size = row.size();
        } else if (row.size() != fc.in_size) {
            throw ParseError(detail::at(ctx + ".weights", r) + ": row length " + std::to_string(row.size()) +
                             " differs from " + std::to_string(fc.in_size));
        }
        fc.weights.insert(fc.weights.end(), row.begin(), row.end());
    }
    fc.bias = numbers(detail::field(j, "bias", ctx), ctx + ".bias");
    const std::string act = detail::text(detail::field(j, "activation", ctx), ctx + ".activation");
    if (act == "relu") {
        fc.activation = Activation::Relu;
    } else if (act == "argmax") {
        fc.activation = Activation::ArgMax;
    } else {
        throw ParseError(ctx + ".activation: unknown activation '" + act + "'");
    }
    return fc;
}

ConvolutionalLayer parse_conv(const json& j, const std::string& ctx) {
    ConvolutionalLayer conv;
    const std::string kctx = ctx + ".kernels";
    const json& ks = detail::array(detail::field(j, "kernels", ctx), kctx);
    for (std::size_t k = 0; k < ks.size(); ++k) {
        const json& rows = detail::array(ks[k], detail::at(kctx, k));
        std::size_t p = rows.size();
        std::size_t q = 0;
        std::size_t c = 0;
        std::vector<double> values;
        for (std::size_t a = 0; a < p; ++a) {
            const json& cols = detail::array(rows[a], detail::at(detail::at(kctx, k), a));
            if (a == 0) {
                q = cols.size();
            } else if (cols.size() != q) {
                throw ParseError(detail::at(detail::at(kctx, k), a) + ": ragged kernel");
            }
            for (std::size_t b = 0; b < q; ++b) {
                auto chans = numbers(cols[b], detail::at(detail::at(detail::at(kctx, k), a), b));
                if (a == 0 && b == 0) {
                    c = chans.size();
                } else if (chans.size() != c) {
                    throw ParseError(detail::at(kctx, k) + ": ragged kernel channels");
                }
                values.insert(values.end(), chans.begin(), chans.end());
            }
        }
        if (p == 0 || q == 0 || c == 0) {
            throw ParseError(detail::at(kctx, k) + ": empty kernel");
        }
        conv.kernels.emplace_back(p, q, c, std::move(values));
    }
    conv.biases = numbers(detail::field(j, "biases", ctx), ctx + ".biases");
    auto pool = numbers(detail::field(j, "pool", ctx), ctx + ".pool");
    if (pool.size() != 2 || pool[0] < 1 || pool[1] < 1 || pool[0] != std::floor(pool[0]) ||
        pool[1] != std::floor(pool[1])) {
        throw ParseError(ctx + ".pool: expected two positive integers");
    }
    conv.pool_height = static_cast<std::size_t>(pool[0]);
    conv.pool_width = static_cast<std::size_t>(pool[1]);
    return conv;
}

}  // namespace

Network parse_network(std::string_view text) {
    const json doc = detail::parse_json(text, "network");
    Network net;
    const json& shape = detail::array(detail::field(doc, "input_shape", "network"), "network.input_shape");
    if (shape.size() != 3) {
        throw ParseError("network.input_shape: expected [height, width, channels]");
    }
    net.input_height = detail::count(shape[0], "network.input_shape[0]");
    net.input_width = detail::count(shape[1], "network.input_shape[1]");
    net.input_channels = detail::count(shape[2], "network.input_shape[2]");
    net.class_count = detail::count(detail::field(doc, "class_count", "network"), "network.class_count");
    const json& layers = detail::array(detail::field(doc, "layers", "network"), "network.layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string ctx = detail::at("network.layers", i);
        const std::string type = detail::text(detail::field(layers[i], "type", ctx), ctx + ".type");
        if (type == "fc") {
            net.layers.emplace_back(parse_fc(layers[i], ctx));
        } else if (type == "conv") {
            net.layers.emplace_back(parse_conv(layers[i], ctx));
        } else {
            throw ParseError(ctx + ".type: unknown layer type '" + type + "'");
        }
    }
    require_valid(net);
    return net;
}

std::string serialize_network(const Network& net) {
    json doc;
    doc["input_shape"] = {net.input_height, net.input_width, net.input_channels};
    doc["class_count"] = net.class_count;
    doc["layers"] = json::array();
    for (const Layer& layer : net.layers) {
        json j;
        if (const auto* fc = std::get_if<FullyConnectedLayer>(&layer)) {
            j["type"] = "fc";
            j["weights"] = json::array();
            for (std::size_t r = 0; r < fc->out_size; ++r) {
                auto row = fc->row(r);
                j["weights"].push_back(std::vector<double>(row.begin(), row.end()));
            }
            j["bias"] = fc->bias;
            j["activation"] = fc->activation == Activation::Relu ? "relu" : "argmax";
        } else {
            const auto& conv = std::get<ConvolutionalLayer>(layer);
            j["type"] = "conv";
            j["kernels"] = json::array();
            for (const Tensor3& k : conv.kernels) {
                json rows = json::array();
                for (std::size_t a = 0; a < k.height(); ++a) {
                    json cols = json::array();
                    for (std::size_t b = 0; b < k.width(); ++b) {
                        std::vector<double> ch;
                        for (std::size_t c = 0; c < k.channels(); ++c) {
                            ch.push_back(k.at(a, b, c));
                        }
                        cols.push_back(ch);
                    }
                    rows.push_back(cols);
                }
                j["kernels"].push_back(rows);
            }
            j["biases"] = conv.biases;
            j["pool"] = {conv.pool_height, conv.pool_width};
        }
        doc["layers"].push_back(j);
    }
    return doc.dump(1) + "\n";
}

Network load_network(const std::string& path) {
    try {
        return parse_network(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_network(const Network& net, const std::string& path) { write_file(path, serialize_network(net)); }

}  // namespace ltr::io
