#include <algorithm>
#include <cmath>

#include "geometry.hpp"
#include "ltr/core/errors.hpp"
#include "ltr/encoder/encoder.hpp"

namespace ltr::encoder {

using milp::LinearExpr;
using milp::Sense;

namespace {

std::size_t code_bits(std::size_t count) {
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < count) {
        ++bits;
    }
    return bits;
}

// sum_k [code_k + (1 - 2 code_k) delta_k]: zero exactly when delta spells `code`.
LinearExpr mismatch(std::size_t code, const std::vector<VarId>& bits) {
    LinearExpr e;
    for (std::size_t k = 0; k < bits.size(); ++k) {
        if ((code >> k) & 1U) {
            e.add_constant(1.0);
            e.add(-1.0, bits[k]);
        } else {
            e.add(1.0, bits[k]);
        }
    }
    return e;
}

VarId add_node(MilpModel& model, const std::string& name, Interval b) {
    const Interval w = widen(b);
    return model.add_continuous(name, w.lo, w.hi);
}

VarId add_pixel(MilpModel& model, const std::string& name, Interval b, double p_max) {
    const Interval w = widen(b);
    return model.add_continuous(name, std::max(0.0, w.lo), std::min(p_max, w.hi));
}

void encode_geometric(MilpModel& model, TransformKind kind, const char* tag, const Shape& shape,
                      const std::vector<std::vector<double>>& points, const std::vector<VarId>& in,
                      const BoundVector& in_bounds, const std::vector<VarId>& out, const BoundVector& out_bounds,
                      const std::vector<VarId>& delta) {
    if (points.size() != delta.size() || in.size() != shape.size() || out.size() != shape.size()) {
        throw DimensionError("geometric encoding: inconsistent sizes");
    }
    for (std::size_t u = 0; u < shape.height; ++u) {
        for (std::size_t v = 0; v < shape.width; ++v) {
            for (std::size_t r = 0; r < shape.channels; ++r) {
                const std::size_t t = (u * shape.width + v) * shape.channels + r;
                const Interval tb = widen(out_bounds.at(t));
                for (std::size_t d = 0; d < points.size(); ++d) {
                    const auto src = detail::geometric_source(kind, points[d], shape, u, v, r);
                    // diff = t - e_d
                    LinearExpr diff;
                    diff.add(1.0, out[t]);
                    double elo = 0.0;
                    double ehi = 0.0;
                    for (auto k : src.inputs) {
                        diff.add(-src.scale, in[k]);
                        const Interval ib = widen(in_bounds.at(k));
                        elo += src.scale * ib.lo;
                        ehi += src.scale * ib.hi;
                    }
                    const double m = std::max({tb.hi - elo, ehi - tb.lo, 0.0});
                    // t - e_d >= -M (1 - delta_d)  and  t - e_d <= M (1 - delta_d)
                    LinearExpr lower = diff;
                    lower.add(-m, delta[d]);
                    model.add_constraint(std::move(lower), Sense::GreaterEqual, -m, tag);
                    LinearExpr upper = diff;
                    upper.add(m, delta[d]);
                    model.add_constraint(std::move(upper), Sense::LessEqual, m, tag);
                }
            }
        }
    }
}

}  // namespace

std::vector<VarId> encode_dof_bounds(MilpModel& model, const TransformationSpec& spec, const std::string& prefix) {
    const auto names = spec.dof_names();
    std::vector<Interval> ranges;
    if (spec.kind == TransformKind::Photometric) {
        ranges = {{spec.contrast.lo, spec.contrast.hi}, {spec.luminosity.lo, spec.luminosity.hi}};
    } else {
        const auto points = spec.discrete_points();
        ranges.assign(names.size(), {INFINITY, -INFINITY});
        for (const auto& p : points) {
            for (std::size_t j = 0; j < names.size(); ++j) {
                ranges[j].lo = std::min(ranges[j].lo, p[j]);
                ranges[j].hi = std::max(ranges[j].hi, p[j]);
            }
        }
    }
    std::vector<VarId> lambda;
    for (std::size_t j = 0; j < names.size(); ++j) {
        const VarId id = model.add_continuous(prefix + "lam_" + names[j], ranges[j].lo, ranges[j].hi);
        model.add_constraint(LinearExpr().add(1.0, id), Sense::GreaterEqual, ranges[j].lo, "C1");
        model.add_constraint(LinearExpr().add(1.0, id), Sense::LessEqual, ranges[j].hi, "C1");
        lambda.push_back(id);
    }
    return lambda;
}

std::vector<VarId> encode_selector(MilpModel& model, const std::vector<std::vector<double>>& points,
                                   const std::vector<VarId>& lambda, const std::string& prefix) {
    if (points.empty()) {
        throw DomainError("selector over an empty domain");
    }
    std::vector<VarId> delta;
    LinearExpr one;
    for (std::size_t d = 0; d < points.size(); ++d) {
        if (points[d].size() != lambda.size()) {
            throw DimensionError("domain point arity differs from the degrees of freedom");
        }
        delta.push_back(model.add_binary(prefix + "delta_" + std::to_string(d)));
        // Fixing the instantiation fixes everything downstream, so decide it first.
        model.set_branch_priority(delta.back(), 1);
        one.add(1.0, delta.back());
    }
    model.add_constraint(std::move(one), Sense::Equal, 1.0, "C3");
    for (std::size_t j = 0; j < lambda.size(); ++j) {
        LinearExpr e;
        for (std::size_t d = 0; d < points.size(); ++d) {
            e.add(points[d][j], delta[d]);
        }
        e.add(-1.0, lambda[j]);
        model.add_constraint(std::move(e), Sense::Equal, 0.0, "C4");
    }
    return delta;
}

void encode_photometric(MilpModel& model, const Image& im, VarId mu, VarId nu, const std::vector<VarId>& out) {
    auto pixels = im.data().values();
    if (out.size() != pixels.size()) {
        throw DimensionError("photometric encoding: output count differs from the image");
    }
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        LinearExpr e;
        e.add(1.0, out[i]).add(-pixels[i], mu).add(-1.0, nu);
        model.add_constraint(std::move(e), Sense::Equal, 0.0, "C2");
    }
}

void encode_translation(MilpModel& model, const Shape& shape, const std::vector<std::vector<double>>& points,
                        const std::vector<VarId>& in, const BoundVector& in_bounds, const std::vector<VarId>& out,
                        const BoundVector& out_bounds, const std::vector<VarId>& delta) {
    encode_geometric(model, TransformKind::Translation, "C5", shape, points, in, in_bounds, out, out_bounds, delta);
}

void encode_subsample(MilpModel& model, const Shape& shape, const std::vector<std::vector<double>>& points,
                      const std::vector<VarId>& in, const BoundVector& in_bounds, const std::vector<VarId>& out,
                      const BoundVector& out_bounds, const std::vector<VarId>& delta) {
    encode_geometric(model, TransformKind::Subsample, "C6", shape, points, in, in_bounds, out, out_bounds, delta);
}

void encode_zoom(MilpModel& model, const Shape& shape, const std::vector<std::vector<double>>& points,
                 const std::vector<VarId>& in, const BoundVector& in_bounds, const std::vector<VarId>& out,
                 const BoundVector& out_bounds, const std::vector<VarId>& delta) {
    encode_geometric(model, TransformKind::Zoom, "C7", shape, points, in, in_bounds, out, out_bounds, delta);
}

void encode_perturbation(MilpModel& model, double rho, const std::vector<VarId>& in, const std::vector<VarId>& out) {
    if (in.size() != out.size()) {
        throw DimensionError("perturbation encoding: input and output counts differ");
    }
    for (std::size_t i = 0; i < in.size(); ++i) {
        model.add_constraint(LinearExpr().add(1.0, out[i]).add(-1.0, in[i]), Sense::LessEqual, rho, "C8");
        model.add_constraint(LinearExpr().add(1.0, out[i]).add(-1.0, in[i]), Sense::GreaterEqual, -rho, "C9");
    }
}

ReluVars encode_relu(MilpModel& model, VarId ws, Interval b, const std::string& name) {
    ReluVars out;
    out.y = add_node(model, name, {std::max(0.0, b.lo), std::max(0.0, b.hi)});
    model.add_constraint(LinearExpr().add(1.0, out.y), Sense::GreaterEqual, 0.0, "C11");
    if (b.hi <= 0.0) {
        model.add_constraint(LinearExpr().add(1.0, out.y), Sense::LessEqual, 0.0, "C14");
        return out;
    }
    model.add_constraint(LinearExpr().add(1.0, out.y).add(-1.0, ws), Sense::GreaterEqual, 0.0, "C12");
    if (b.lo >= 0.0) {
        model.add_constraint(LinearExpr().add(1.0, out.y).add(-1.0, ws), Sense::LessEqual, 0.0, "C13");
        return out;
    }
    const Interval w = widen(b);
    const double m = std::max(std::abs(w.lo), std::abs(w.hi));
    const VarId delta = model.add_binary(name + "_off");
    out.inactive = delta;
    // y <= ws + M delta;  y <= M (1 - delta)
    model.add_constraint(LinearExpr().add(1.0, out.y).add(-1.0, ws).add(-m, delta), Sense::LessEqual, 0.0, "C13");
    model.add_constraint(LinearExpr().add(1.0, out.y).add(m, delta), Sense::LessEqual, m, "C14");
    return out;
}

MaxpoolVars encode_maxpool_block(MilpModel& model, const std::vector<VarId>& window, const BoundVector& bounds,
                                 const std::string& name) {
    if (window.empty() || bounds.size() != window.size()) {
        throw DimensionError("maxpool block: window and bounds differ in size");
    }
    double ylo = -INFINITY;
    double yhi = -INFINITY;
    for (std::size_t z = 0; z < window.size(); ++z) {
        ylo = std::max(ylo, bounds.lo[z]);
        yhi = std::max(yhi, bounds.hi[z]);
    }
    MaxpoolVars out;
    out.y = add_node(model, name, {ylo, yhi});
    const std::size_t bits = code_bits(window.size());
    for (std::size_t k = 0; k < bits; ++k) {
        out.codes.push_back(model.add_binary(name + "_c" + std::to_string(k)));
    }
    const Interval yw = widen({ylo, yhi});
    double m = 0.0;
    for (std::size_t z = 0; z < window.size(); ++z) {
        m = std::max(m, yw.hi - widen(bounds.at(z)).lo);
    }
    for (std::size_t z = 0; z < window.size(); ++z) {
        model.add_constraint(LinearExpr().add(1.0, out.y).add(-1.0, window[z]), Sense::GreaterEqual, 0.0, "C16");
    }
    for (std::size_t z = 0; z < window.size(); ++z) {
        // y <= x_z + M * mismatch(z)
        LinearExpr e;
        e.add(1.0, out.y).add(-1.0, window[z]).add(mismatch(z, out.codes), -m);
        model.add_constraint(std::move(e), Sense::LessEqual, 0.0, "C17");
    }
    for (std::size_t z = window.size(); z < (std::size_t{1} << bits); ++z) {
        model.add_constraint(mismatch(z, out.codes), Sense::GreaterEqual, 1.0, "C18");
    }
    return out;
}

NetworkLayerVars encode_fc(MilpModel& model, const FullyConnectedLayer& layer, const std::vector<VarId>& in,
                           const LayerBounds& bounds, const std::string& prefix) {
    if (in.size() != layer.in_size) {
        throw DimensionError("fc encoding: " + std::to_string(in.size()) + " inputs for a layer of width " +
                             std::to_string(layer.in_size));
    }
    NetworkLayerVars out;
    for (std::size_t j = 0; j < layer.out_size; ++j) {
        const VarId ws = add_node(model, prefix + "ws_" + std::to_string(j), bounds.linear.at(j));
        LinearExpr e;
        e.add(1.0, ws);
        auto w = layer.row(j);
        for (std::size_t i = 0; i < layer.in_size; ++i) {
            e.add(-w[i], in[i]);
        }
        model.add_constraint(std::move(e), Sense::Equal, layer.bias[j], "C10");
        out.linear.push_back(ws);
    }
    if (layer.activation == Activation::ArgMax) {
        out.rectified = out.linear;
        out.relu_binary.assign(layer.out_size, std::nullopt);
    } else {
        for (std::size_t j = 0; j < layer.out_size; ++j) {
            auto r = encode_relu(model, out.linear[j], bounds.linear.at(j), prefix + "y_" + std::to_string(j));
            out.rectified.push_back(r.y);
            out.relu_binary.push_back(r.inactive);
        }
    }
    out.output = out.rectified;
    return out;
}

NetworkLayerVars encode_conv(MilpModel& model, const ConvolutionalLayer& layer, const Shape& in_shape,
                             const std::vector<VarId>& in, const LayerBounds& bounds, const std::string& prefix) {
    if (in.size() != in_shape.size() || layer.kernel_channels() != in_shape.channels) {
        throw DimensionError("conv encoding: input does not match the kernel bank");
    }
    const std::size_t p = layer.kernel_height();
    const std::size_t q = layer.kernel_width();
    const std::size_t ch = in_shape.channels;
    const std::size_t rows = in_shape.height - p + 1;
    const std::size_t cols = in_shape.width - q + 1;
    const std::size_t k = layer.kernel_count();
    NetworkLayerVars out;
    out.linear.resize(rows * cols * k);
    for (std::size_t u = 0; u < rows; ++u) {
        for (std::size_t v = 0; v < cols; ++v) {
            for (std::size_t j = 0; j < k; ++j) {
                const std::size_t t = (u * cols + v) * k + j;
                const VarId ws = add_node(model, prefix + "ws_" + std::to_string(t), bounds.linear.at(t));
                LinearExpr e;
                e.add(1.0, ws);
                const Tensor3& kern = layer.kernels[j];
                for (std::size_t a = 0; a < p; ++a) {
                    for (std::size_t b = 0; b < q; ++b) {
                        for (std::size_t r = 0; r < ch; ++r) {
                            e.add(-kern.at(a, b, r), in[((u + a) * in_shape.width + v + b) * ch + r]);
                        }
                    }
                }
                model.add_constraint(std::move(e), Sense::Equal, layer.biases[j], "C15");
                out.linear[t] = ws;
            }
        }
    }
    for (std::size_t t = 0; t < out.linear.size(); ++t) {
        auto r = encode_relu(model, out.linear[t], bounds.linear.at(t), prefix + "y_" + std::to_string(t));
        out.rectified.push_back(r.y);
        out.relu_binary.push_back(r.inactive);
    }
    const std::size_t ph = layer.pool_height;
    const std::size_t pw = layer.pool_width;
    if (ph * pw == 1) {
        out.output = out.rectified;
        out.pool_codes.assign(out.output.size(), {});
        return out;
    }
    const std::size_t prow = rows / ph;
    const std::size_t pcol = cols / pw;
    for (std::size_t u = 0; u < prow; ++u) {
        for (std::size_t v = 0; v < pcol; ++v) {
            for (std::size_t r = 0; r < k; ++r) {
                const std::size_t t = (u * pcol + v) * k + r;
                std::vector<VarId> window;
                BoundVector wb;
                for (std::size_t a = 0; a < ph; ++a) {
                    for (std::size_t b = 0; b < pw; ++b) {
                        const std::size_t s = ((u * ph + a) * cols + v * pw + b) * k + r;
                        window.push_back(out.rectified[s]);
                        wb.lo.push_back(bounds.rectified.lo[s]);
                        wb.hi.push_back(bounds.rectified.hi[s]);
                    }
                }
                auto block = encode_maxpool_block(model, window, wb, prefix + "pool_" + std::to_string(t));
                out.output.push_back(block.y);
                out.pool_codes.push_back(std::move(block.codes));
            }
        }
    }
    return out;
}

std::vector<VarId> encode_robustness(MilpModel& model, int label, const std::vector<VarId>& logits,
                                     const BoundVector& bounds) {
    const std::size_t c = logits.size();
    if (c < 2) {
        throw DomainError("robustness needs at least two classes");
    }
    if (label < 1 || static_cast<std::size_t>(label) > c || bounds.size() != c) {
        throw DomainError("label " + std::to_string(label) + " outside [1, " + std::to_string(c) + "]");
    }
    const std::size_t bits = code_bits(c);
    std::vector<VarId> codes;
    for (std::size_t k = 0; k < bits; ++k) {
        codes.push_back(model.add_binary("out_code_" + std::to_string(k)));
    }
    const auto l = static_cast<std::size_t>(label - 1);
    const Interval lb = widen(bounds.at(l));
    for (std::size_t j = 0; j < c; ++j) {
        if (j == l) {
            continue;
        }
        const double m = std::max(0.0, lb.hi - widen(bounds.at(j)).lo);
        // ws_label <= ws_{j+1} + M * mismatch(j)
        LinearExpr e;
        e.add(1.0, logits[l]).add(-1.0, logits[j]).add(mismatch(j, codes), -m);
        model.add_constraint(std::move(e), Sense::LessEqual, 0.0, "C19");
    }
    model.add_constraint(mismatch(l, codes), Sense::GreaterEqual, 1.0, "C20");
    for (std::size_t j = c; j < (std::size_t{1} << bits); ++j) {
        model.add_constraint(mismatch(j, codes), Sense::GreaterEqual, 1.0, "C20");
    }
    return codes;
}

EncodedQuery encode_query(const VerificationQuery& query) {
    EncodedQuery eq;
    eq.bounds = propagate_bounds(query);
    MilpModel& model = eq.model;
    VariableMap& map = eq.map;
    const NodeBounds& nb = eq.bounds;
    const Image& im = query.image;
    const double p_max = im.p_max();
    const Shape shape{im.height(), im.width(), im.channels()};
    auto pixels = im.data().values();

    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const VarId v = model.add_continuous("im_" + std::to_string(i), pixels[i], pixels[i]);
        model.add_constraint(LinearExpr().add(1.0, v), Sense::Equal, pixels[i], "Cim");
        map.input.push_back(v);
    }

    const std::vector<VarId>* current = &map.input;
    const BoundVector* current_bounds = &nb.input;
    for (std::size_t t = 0; t < query.transformations.size(); ++t) {
        const auto& spec = query.transformations[t];
        const std::string prefix = "t" + std::to_string(t + 1) + "_";
        TransformVars tv;
        tv.kind = spec.kind;
        tv.lambda = encode_dof_bounds(model, spec, prefix);
        if (spec.kind != TransformKind::Photometric) {
            tv.points = spec.discrete_points();
            tv.delta = encode_selector(model, tv.points, tv.lambda, prefix);
        }
        const BoundVector& ob = nb.transforms[t];
        for (std::size_t i = 0; i < ob.size(); ++i) {
            tv.output.push_back(add_pixel(model, prefix + "v_" + std::to_string(i), ob.at(i), p_max));
        }
        switch (spec.kind) {
            case TransformKind::Photometric:
                encode_photometric(model, im, tv.lambda[0], tv.lambda[1], tv.output);
                break;
            case TransformKind::Translation:
                encode_translation(model, shape, tv.points, *current, *current_bounds, tv.output, ob, tv.delta);
                break;
            case TransformKind::Subsample:
                encode_subsample(model, shape, tv.points, *current, *current_bounds, tv.output, ob, tv.delta);
                break;
            case TransformKind::Zoom:
                encode_zoom(model, shape, tv.points, *current, *current_bounds, tv.output, ob, tv.delta);
                break;
            case TransformKind::Perturbation:
                break;
        }
        map.transforms.push_back(std::move(tv));
        current = &map.transforms.back().output;
        current_bounds = &ob;
    }

    for (std::size_t i = 0; i < nb.perturbation.size(); ++i) {
        map.perturbation.push_back(add_pixel(model, "p_v_" + std::to_string(i), nb.perturbation.at(i), p_max));
    }
    encode_perturbation(model, query.perturbation_radius, *current, map.perturbation);

    current = &map.perturbation;
    Shape layer_shape = shape;
    const auto shapes = layer_output_shapes(query.network);
    for (std::size_t l = 0; l < query.network.layers.size(); ++l) {
        const std::string prefix = "n" + std::to_string(l + 1) + "_";
        const Layer& layer = query.network.layers[l];
        if (const auto* fc = std::get_if<FullyConnectedLayer>(&layer)) {
            map.layers.push_back(encode_fc(model, *fc, *current, nb.layers[l], prefix));
        } else {
            map.layers.push_back(
                encode_conv(model, std::get<ConvolutionalLayer>(layer), layer_shape, *current, nb.layers[l], prefix));
        }
        current = &map.layers.back().output;
        layer_shape = shapes[l];
    }
    map.output_codes = encode_robustness(model, query.label, map.layers.back().linear, nb.layers.back().linear);

    map.reverse.assign(model.variable_count(), NodeRef{});
    auto mark = [&](const std::vector<VarId>& ids, NodeRef::Part part, std::size_t layer) {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            map.reverse[ids[i].index] = {part, layer, i};
        }
    };
    mark(map.input, NodeRef::Part::Input, 0);
    for (std::size_t t = 0; t < map.transforms.size(); ++t) {
        mark(map.transforms[t].lambda, NodeRef::Part::Lambda, t);
        mark(map.transforms[t].delta, NodeRef::Part::Delta, t);
        mark(map.transforms[t].output, NodeRef::Part::TransformOutput, t);
    }
    mark(map.perturbation, NodeRef::Part::Perturbation, 0);
    for (std::size_t l = 0; l < map.layers.size(); ++l) {
        const auto& lv = map.layers[l];
        // Order matters where vectors alias: outputs last so they win.
        mark(lv.linear, NodeRef::Part::Linear, l);
        mark(lv.rectified, NodeRef::Part::Rectified, l);
        if (lv.output != lv.rectified) {
            mark(lv.output, NodeRef::Part::LayerOutput, l);
        }
        for (std::size_t i = 0; i < lv.relu_binary.size(); ++i) {
            if (lv.relu_binary[i]) {
                map.reverse[lv.relu_binary[i]->index] = {NodeRef::Part::ReluBinary, l, i};
            }
        }
        for (std::size_t i = 0; i < lv.pool_codes.size(); ++i) {
            for (std::size_t b = 0; b < lv.pool_codes[i].size(); ++b) {
                map.reverse[lv.pool_codes[i][b].index] = {NodeRef::Part::PoolCode, l, i, b};
            }
        }
    }
    for (std::size_t b = 0; b < map.output_codes.size(); ++b) {
        map.reverse[map.output_codes[b].index] = {NodeRef::Part::OutputCode, 0, 0, b};
    }
    return eq;
}

const NodeRef& VariableMap::locate(VarId id) const {
    if (id.index >= reverse.size()) {
        throw ModelError("variable " + std::to_string(id.index) + " is not part of this encoding");
    }
    return reverse[id.index];
}

void pin_instantiation(MilpModel& model, const VariableMap& map, const std::vector<Instantiation>& insts,
                       const Tensor3* perturbed) {
    if (insts.size() != map.transforms.size()) {
        throw DimensionError("pin_instantiation: " + std::to_string(insts.size()) + " instantiations for " +
                             std::to_string(map.transforms.size()) + " transformations");
    }
    for (std::size_t t = 0; t < insts.size(); ++t) {
        const auto& tv = map.transforms[t];
        const auto& values = insts[t].values;
        if (values.size() != tv.lambda.size()) {
            throw DimensionError("pin_instantiation: wrong number of degrees of freedom");
        }
        if (tv.kind == TransformKind::Photometric) {
            for (std::size_t j = 0; j < values.size(); ++j) {
                model.tighten_bounds(tv.lambda[j], values[j], values[j]);
            }
            continue;
        }
        const auto it = std::find(tv.points.begin(), tv.points.end(), values);
        if (it == tv.points.end()) {
            throw DomainError("pin_instantiation: instantiation outside the domain");
        }
        const auto chosen = static_cast<std::size_t>(it - tv.points.begin());
        for (std::size_t d = 0; d < tv.delta.size(); ++d) {
            const double v = d == chosen ? 1.0 : 0.0;
            model.tighten_bounds(tv.delta[d], v, v);
        }
    }
    if (perturbed != nullptr) {
        auto values = perturbed->values();
        if (values.size() != map.perturbation.size()) {
            throw DimensionError("pin_instantiation: perturbed tensor has the wrong size");
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            model.tighten_bounds(map.perturbation[i], values[i], values[i]);
        }
    }
}

}  // namespace ltr::encoder
