#include <algorithm>
#include <cmath>

#include "geometry.hpp"
#include "ltr/core/errors.hpp"
#include "ltr/encoder/encoder.hpp"

namespace ltr::encoder {

namespace {

BoundVector clip_to_pixels(BoundVector b, double p_max) {
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double lo = std::max(b.lo[i], 0.0);
        const double hi = std::min(b.hi[i], p_max);
        // An empty intersection means no instantiation keeps this pixel in
        // range; keep the full pixel range and let the rows decide.
        if (lo <= hi) {
            b.lo[i] = lo;
            b.hi[i] = hi;
        } else {
            b.lo[i] = 0.0;
            b.hi[i] = p_max;
        }
    }
    return b;
}

BoundVector photometric_bounds(const BoundVector& in, const TransformationSpec& spec, double p_max) {
    BoundVector out(in.size());
    const double mus[2] = {spec.contrast.lo, spec.contrast.hi};
    const double nus[2] = {spec.luminosity.lo, spec.luminosity.hi};
    for (std::size_t i = 0; i < in.size(); ++i) {
        double lo = INFINITY;
        double hi = -INFINITY;
        for (double p : {in.lo[i], in.hi[i]}) {
            for (double mu : mus) {
                for (double nu : nus) {
                    lo = std::min(lo, mu * p + nu);
                    hi = std::max(hi, mu * p + nu);
                }
            }
        }
        out.lo[i] = lo;
        out.hi[i] = hi;
    }
    return clip_to_pixels(std::move(out), p_max);
}

BoundVector geometric_bounds(const BoundVector& in, const TransformationSpec& spec, const Shape& s) {
    BoundVector out(in.size(), INFINITY, -INFINITY);
    for (const auto& point : spec.discrete_points()) {
        for (std::size_t u = 0; u < s.height; ++u) {
            for (std::size_t v = 0; v < s.width; ++v) {
                for (std::size_t r = 0; r < s.channels; ++r) {
                    const auto src = detail::geometric_source(spec.kind, point, s, u, v, r);
                    double lo = 0.0;
                    double hi = 0.0;
                    for (auto k : src.inputs) {
                        lo += in.lo[k];
                        hi += in.hi[k];
                    }
                    const std::size_t t = (u * s.width + v) * s.channels + r;
                    out.lo[t] = std::min(out.lo[t], lo * src.scale);
                    out.hi[t] = std::max(out.hi[t], hi * src.scale);
                }
            }
        }
    }
    return out;
}

BoundVector relu_bounds(const BoundVector& b) {
    BoundVector out = b;
    for (std::size_t i = 0; i < b.size(); ++i) {
        out.lo[i] = std::max(0.0, b.lo[i]);
        out.hi[i] = std::max(0.0, b.hi[i]);
    }
    return out;
}

}  // namespace

Interval widen(Interval v) {
    return {v.lo - 1e-7 * (1.0 + std::abs(v.lo)), v.hi + 1e-7 * (1.0 + std::abs(v.hi))};
}

std::vector<LayerBounds> propagate_network_bounds(const Network& net, const BoundVector& input) {
    require_valid(net);
    if (input.size() != net.input_shape().size()) {
        throw DimensionError("input bounds cover " + std::to_string(input.size()) + " nodes, network expects " +
                             std::to_string(net.input_shape().size()));
    }
    std::vector<LayerBounds> layers;
    BoundVector current = input;
    Shape shape = net.input_shape();
    for (const Layer& layer : net.layers) {
        LayerBounds lb;
        if (const auto* fc = std::get_if<FullyConnectedLayer>(&layer)) {
            lb.linear = BoundVector(fc->out_size);
            for (std::size_t j = 0; j < fc->out_size; ++j) {
                auto iv = kernels::interval_dot(fc->row(j), current.lo, current.hi);
                lb.linear.set(j, {iv.lo + fc->bias[j], iv.hi + fc->bias[j]});
            }
            lb.rectified = fc->activation == Activation::Relu ? relu_bounds(lb.linear) : lb.linear;
            lb.output = lb.rectified;
            shape = {1, 1, fc->out_size};
        } else {
            const auto& conv = std::get<ConvolutionalLayer>(layer);
            const std::size_t p = conv.kernel_height();
            const std::size_t q = conv.kernel_width();
            const std::size_t ch = shape.channels;
            const std::size_t rows = shape.height - p + 1;
            const std::size_t cols = shape.width - q + 1;
            const std::size_t k = conv.kernel_count();
            const std::size_t span_len = q * ch;
            lb.linear = BoundVector(rows * cols * k);
            std::span<const double> lo(current.lo);
            std::span<const double> hi(current.hi);
            for (std::size_t j = 0; j < k; ++j) {
                auto kern = conv.kernels[j].values();
                for (std::size_t u = 0; u < rows; ++u) {
                    for (std::size_t v = 0; v < cols; ++v) {
                        double l = conv.biases[j];
                        double h = conv.biases[j];
                        for (std::size_t a = 0; a < p; ++a) {
                            const std::size_t base = ((u + a) * shape.width + v) * ch;
                            auto iv = kernels::interval_dot(kern.subspan(a * span_len, span_len),
                                                            lo.subspan(base, span_len), hi.subspan(base, span_len));
                            l += iv.lo;
                            h += iv.hi;
                        }
                        lb.linear.set((u * cols + v) * k + j, {l, h});
                    }
                }
            }
            lb.rectified = relu_bounds(lb.linear);
            const std::size_t ph = conv.pool_height;
            const std::size_t pw = conv.pool_width;
            const Shape pooled{rows / ph, cols / pw, k};
            lb.output = BoundVector(pooled.size(), -INFINITY, -INFINITY);
            for (std::size_t u = 0; u < pooled.height; ++u) {
                for (std::size_t v = 0; v < pooled.width; ++v) {
                    for (std::size_t r = 0; r < k; ++r) {
                        const std::size_t t = (u * pooled.width + v) * k + r;
                        for (std::size_t a = 0; a < ph; ++a) {
                            for (std::size_t b = 0; b < pw; ++b) {
                                const std::size_t s = ((u * ph + a) * cols + v * pw + b) * k + r;
                                lb.output.lo[t] = std::max(lb.output.lo[t], lb.rectified.lo[s]);
                                lb.output.hi[t] = std::max(lb.output.hi[t], lb.rectified.hi[s]);
                            }
                        }
                    }
                }
            }
            shape = pooled;
        }
        current = lb.output;
        layers.push_back(std::move(lb));
    }
    return layers;
}

NodeBounds propagate_bounds(const VerificationQuery& query) {
    validate_query(query);
    NodeBounds nb;
    const Image& im = query.image;
    const Shape shape{im.height(), im.width(), im.channels()};
    auto pixels = im.data().values();
    nb.input.lo.assign(pixels.begin(), pixels.end());
    nb.input.hi = nb.input.lo;

    const BoundVector* current = &nb.input;
    for (const auto& spec : query.transformations) {
        if (spec.kind == TransformKind::Photometric) {
            nb.transforms.push_back(photometric_bounds(*current, spec, im.p_max()));
        } else {
            nb.transforms.push_back(geometric_bounds(*current, spec, shape));
        }
        current = &nb.transforms.back();
    }
    nb.perturbation = *current;
    for (std::size_t i = 0; i < nb.perturbation.size(); ++i) {
        nb.perturbation.lo[i] -= query.perturbation_radius;
        nb.perturbation.hi[i] += query.perturbation_radius;
    }
    nb.perturbation = clip_to_pixels(std::move(nb.perturbation), im.p_max());
    nb.layers = propagate_network_bounds(query.network, nb.perturbation);
    return nb;
}

void validate_query(const VerificationQuery& query) {
    require_valid(query.network);
    const Image& im = query.image;
    if (im.height() != query.network.input_height || im.width() != query.network.input_width ||
        im.channels() != query.network.input_channels) {
        throw DimensionError("image shape " + std::to_string(im.height()) + "x" + std::to_string(im.width()) + "x" +
                             std::to_string(im.channels()) + " does not match the network input");
    }
    const auto c = static_cast<int>(query.network.class_count);
    if (c < 2) {
        throw DomainError("robustness needs at least two classes");
    }
    if (query.label < 1 || query.label > c) {
        throw DomainError("label " + std::to_string(query.label) + " outside [1, " + std::to_string(c) + "]");
    }
    if (!std::isfinite(query.perturbation_radius) || query.perturbation_radius < 0.0) {
        throw DomainError("perturbation radius must be finite and non-negative");
    }
    for (std::size_t i = 0; i < query.transformations.size(); ++i) {
        const auto& spec = query.transformations[i];
        if (spec.kind == TransformKind::Perturbation) {
            throw DomainError("perturbation is set through the query radius, not the transformation list");
        }
        if (spec.kind == TransformKind::Photometric && i != 0) {
            throw DomainError("photometric transformation must come first: its product with a non-constant pixel "
                              "is not linear");
        }
        validate_spec(spec, im.height(), im.width());
    }
}

}  // namespace ltr::encoder
