#pragma once

// Which input pixels feed an output pixel of a geometric transformation under
// one domain point. Shared by bound propagation and the MILP encoding.

#include <cstddef>
#include <vector>

#include "ltr/network/network.hpp"
#include "ltr/transforms/transforms.hpp"

namespace ltr::encoder::detail {

struct Source {
    std::vector<std::size_t> inputs;  // empty: the constant 0
    double scale = 1.0;
};

inline Source geometric_source(TransformKind kind, const std::vector<double>& point, const Shape& s,
                               std::size_t u, std::size_t v, std::size_t r) {
    Source out;
    auto flat = [&](std::size_t a, std::size_t b) { return (a * s.width + b) * s.channels + r; };
    switch (kind) {
        case TransformKind::Translation: {
            const long su = static_cast<long>(u) + static_cast<long>(point[0]);
            const long sv = static_cast<long>(v) + static_cast<long>(point[1]);
            if (su >= 0 && sv >= 0 && su < static_cast<long>(s.height) && sv < static_cast<long>(s.width)) {
                out.inputs.push_back(flat(static_cast<std::size_t>(su), static_cast<std::size_t>(sv)));
            }
            break;
        }
        case TransformKind::Subsample: {
            const auto d = static_cast<std::size_t>(point[0]);
            if (u < s.height / d && v < s.width / d) {
                for (std::size_t a = 0; a < d; ++a) {
                    for (std::size_t b = 0; b < d; ++b) {
                        out.inputs.push_back(flat(u * d + a, v * d + b));
                    }
                }
                out.scale = 1.0 / static_cast<double>(d * d);
            }
            break;
        }
        case TransformKind::Zoom: {
            const auto d = static_cast<std::size_t>(point[0]);
            out.inputs.push_back(flat(u / d, v / d));
            break;
        }
        default:
            break;
    }
    return out;
}

}  // namespace ltr::encoder::detail
