#include "ltr/transforms/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "ltr/core/errors.hpp"

namespace ltr {

std::string to_string(TransformKind kind) {
    switch (kind) {
        case TransformKind::Photometric:
            return "photometric";
        case TransformKind::Translation:
            return "translation";
        case TransformKind::Subsample:
            return "subsample";
        case TransformKind::Zoom:
            return "zoom";
        case TransformKind::Perturbation:
            return "perturbation";
    }
    return "unknown";
}

TransformationSpec TransformationSpec::photometric(RealInterval contrast, RealInterval luminosity) {
    TransformationSpec s;
    s.kind = TransformKind::Photometric;
    s.contrast = contrast;
    s.luminosity = luminosity;
    return s;
}

TransformationSpec TransformationSpec::translation_box(int tx_lo, int tx_hi, int ty_lo, int ty_hi) {
    std::vector<std::pair<int, int>> shifts;
    for (int tx = tx_lo; tx <= tx_hi; ++tx) {
        for (int ty = ty_lo; ty <= ty_hi; ++ty) {
            shifts.emplace_back(tx, ty);
        }
    }
    return translation(std::move(shifts));
}

TransformationSpec TransformationSpec::translation(std::vector<std::pair<int, int>> shifts) {
    TransformationSpec s;
    s.kind = TransformKind::Translation;
    s.shifts = std::move(shifts);
    return s;
}

TransformationSpec TransformationSpec::subsample(std::vector<int> factors) {
    TransformationSpec s;
    s.kind = TransformKind::Subsample;
    s.factors = std::move(factors);
    return s;
}

TransformationSpec TransformationSpec::zoom(std::vector<int> factors) {
    TransformationSpec s;
    s.kind = TransformKind::Zoom;
    s.factors = std::move(factors);
    return s;
}

TransformationSpec TransformationSpec::perturbation(double radius) {
    TransformationSpec s;
    s.kind = TransformKind::Perturbation;
    s.radius = radius;
    return s;
}

std::size_t TransformationSpec::dof_count() const noexcept {
    switch (kind) {
        case TransformKind::Photometric:
        case TransformKind::Translation:
            return 2;
        case TransformKind::Subsample:
        case TransformKind::Zoom:
            return 1;
        case TransformKind::Perturbation:
            return 0;
    }
    return 0;
}

std::vector<std::string> TransformationSpec::dof_names() const {
    switch (kind) {
        case TransformKind::Photometric:
            return {"mu", "nu"};
        case TransformKind::Translation:
            return {"tx", "ty"};
        case TransformKind::Subsample:
        case TransformKind::Zoom:
            return {"d"};
        case TransformKind::Perturbation:
            return {};
    }
    return {};
}

bool TransformationSpec::is_discrete() const noexcept {
    return kind == TransformKind::Translation || kind == TransformKind::Subsample || kind == TransformKind::Zoom;
}

std::vector<std::vector<double>> TransformationSpec::discrete_points() const {
    std::vector<std::vector<double>> points;
    if (kind == TransformKind::Translation) {
        for (auto [tx, ty] : shifts) {
            points.push_back({static_cast<double>(tx), static_cast<double>(ty)});
        }
    } else if (kind == TransformKind::Subsample || kind == TransformKind::Zoom) {
        for (int d : factors) {
            points.push_back({static_cast<double>(d)});
        }
    }
    return points;
}

void validate_spec(const TransformationSpec& spec, std::size_t height, std::size_t width) {
    const std::string name = to_string(spec.kind);
    auto check_interval = [&](RealInterval iv, const char* what) {
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi) {
            throw DomainError(name + ": " + what + " interval must be finite and non-empty");
        }
    };
    switch (spec.kind) {
        case TransformKind::Photometric:
            check_interval(spec.contrast, "contrast");
            check_interval(spec.luminosity, "luminosity");
            break;
        case TransformKind::Translation: {
            if (spec.shifts.empty()) {
                throw DomainError("translation: empty shift domain");
            }
            for (auto [tx, ty] : spec.shifts) {
                if (static_cast<std::size_t>(std::abs(tx)) >= height ||
                    static_cast<std::size_t>(std::abs(ty)) >= width) {
                    throw DomainError("translation: shift (" + std::to_string(tx) + "," + std::to_string(ty) +
                                      ") not smaller than the image");
                }
            }
            auto sorted = spec.shifts;
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
                throw DomainError("translation: duplicate shift in domain");
            }
            break;
        }
        case TransformKind::Subsample:
        case TransformKind::Zoom: {
            if (spec.factors.empty()) {
                throw DomainError(name + ": empty factor domain");
            }
            for (int d : spec.factors) {
                if (d < 2 || static_cast<std::size_t>(d) > std::min(height, width)) {
                    throw DomainError(name + ": factor " + std::to_string(d) + " outside [2, min(height, width)]");
                }
            }
            auto sorted = spec.factors;
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
                throw DomainError(name + ": duplicate factor in domain");
            }
            break;
        }
        case TransformKind::Perturbation:
            if (!(spec.radius >= 0.0) || !std::isfinite(spec.radius)) {
                throw DomainError("perturbation: radius must be finite and non-negative");
            }
            break;
    }
}

bool in_domain(const TransformationSpec& spec, const Instantiation& inst, double tolerance) {
    switch (spec.kind) {
        case TransformKind::Photometric:
            return inst.values.size() == 2 && inst.values[0] >= spec.contrast.lo - tolerance &&
                   inst.values[0] <= spec.contrast.hi + tolerance && inst.values[1] >= spec.luminosity.lo - tolerance &&
                   inst.values[1] <= spec.luminosity.hi + tolerance;
        case TransformKind::Translation:
        case TransformKind::Subsample:
        case TransformKind::Zoom: {
            for (const auto& p : spec.discrete_points()) {
                if (p == inst.values) {
                    return true;
                }
            }
            return false;
        }
        case TransformKind::Perturbation:
            for (double o : inst.offsets.values()) {
                if (std::abs(o) > spec.radius + tolerance) {
                    return false;
                }
            }
            return true;
    }
    return false;
}

Image apply_photometric(const Image& im, double contrast, double luminosity) {
    Tensor3 out = im.data();
    for (double& p : out.values()) {
        p = contrast * p + luminosity;
    }
    return clamp_to_image(std::move(out), im.p_max());
}

Image apply_translation(const Image& im, int t_x, int t_y) {
    const auto h = static_cast<long>(im.height());
    const auto w = static_cast<long>(im.width());
    if (std::abs(t_x) >= h || std::abs(t_y) >= w) {
        throw DomainError("apply_translation: shift (" + std::to_string(t_x) + "," + std::to_string(t_y) +
                          ") not smaller than the image");
    }
    Tensor3 out(im.height(), im.width(), im.channels(), 0.0);
    for (long u = 0; u < h; ++u) {
        for (long v = 0; v < w; ++v) {
            const long su = u + t_x;
            const long sv = v + t_y;
            if (su < 0 || su >= h || sv < 0 || sv >= w) {
                continue;
            }
            for (std::size_t r = 0; r < im.channels(); ++r) {
                out.at(u, v, r) = im.at(su, sv, r);
            }
        }
    }
    return Image(std::move(out), im.p_max());
}

Image apply_subsample(const Image& im, int factor) {
    if (factor < 2 || static_cast<std::size_t>(factor) > std::min(im.height(), im.width())) {
        throw DomainError("apply_subsample: factor " + std::to_string(factor) + " outside [2, min(height, width)]");
    }
    const auto d = static_cast<std::size_t>(factor);
    Tensor3 out(im.height(), im.width(), im.channels(), 0.0);
    const double inv = 1.0 / static_cast<double>(d * d);
    for (std::size_t u = 0; u < im.height() / d; ++u) {
        for (std::size_t v = 0; v < im.width() / d; ++v) {
            for (std::size_t r = 0; r < im.channels(); ++r) {
                double sum = 0.0;
                for (std::size_t a = 0; a < d; ++a) {
                    for (std::size_t b = 0; b < d; ++b) {
                        sum += im.at(u * d + a, v * d + b, r);
                    }
                }
                // Guard the [0, p_max] invariant against rounding of the mean.
                out.at(u, v, r) = std::min(sum * inv, im.p_max());
            }
        }
    }
    return Image(std::move(out), im.p_max());
}

Image apply_zoom(const Image& im, int factor) {
    if (factor < 2) {
        throw DomainError("apply_zoom: factor must be at least 2");
    }
    const auto d = static_cast<std::size_t>(factor);
    Tensor3 out(im.height(), im.width(), im.channels(), 0.0);
    for (std::size_t u = 0; u < im.height(); ++u) {
        for (std::size_t v = 0; v < im.width(); ++v) {
            for (std::size_t r = 0; r < im.channels(); ++r) {
                out.at(u, v, r) = im.at(u / d, v / d, r);
            }
        }
    }
    return Image(std::move(out), im.p_max());
}

Image apply_perturbation(const Image& im, const Tensor3& offsets, double radius) {
    if (!offsets.same_shape(im.data())) {
        throw DimensionError("apply_perturbation: offsets shape differs from image");
    }
    Tensor3 out = im.data();
    auto ov = offsets.values();
    auto pv = out.values();
    for (std::size_t i = 0; i < pv.size(); ++i) {
        if (std::abs(ov[i]) > radius) {
            throw DomainError("apply_perturbation: offset " + std::to_string(ov[i]) + " exceeds radius " +
                              std::to_string(radius));
        }
        pv[i] += ov[i];
    }
    return clamp_to_image(std::move(out), im.p_max());
}

namespace {

int as_int(double v) { return static_cast<int>(std::lround(v)); }

void require_values(const TransformationSpec& spec, const Instantiation& inst) {
    if (inst.values.size() != spec.dof_count()) {
        throw DomainError(to_string(spec.kind) + ": instantiation needs " + std::to_string(spec.dof_count()) +
                          " values, got " + std::to_string(inst.values.size()));
    }
}

}  // namespace

Image apply(const Image& im, const TransformationSpec& spec, const Instantiation& inst) {
    require_values(spec, inst);
    switch (spec.kind) {
        case TransformKind::Photometric:
            return apply_photometric(im, inst.values[0], inst.values[1]);
        case TransformKind::Translation:
            return apply_translation(im, as_int(inst.values[0]), as_int(inst.values[1]));
        case TransformKind::Subsample:
            return apply_subsample(im, as_int(inst.values[0]));
        case TransformKind::Zoom:
            return apply_zoom(im, as_int(inst.values[0]));
        case TransformKind::Perturbation:
            return apply_perturbation(im, inst.offsets, spec.radius);
    }
    return im;
}

Image apply_sequence(const Image& im, const std::vector<TransformationSpec>& specs,
                     const std::vector<Instantiation>& insts) {
    if (specs.size() != insts.size()) {
        throw DimensionError("apply_sequence: " + std::to_string(specs.size()) + " specs but " +
                             std::to_string(insts.size()) + " instantiations");
    }
    Image current = im;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        current = apply(current, specs[i], insts[i]);
    }
    return current;
}

bool sequence_within_pixel_range(const Image& im, const std::vector<TransformationSpec>& specs,
                                 const std::vector<Instantiation>& insts, double tolerance) {
    if (specs.size() != insts.size()) {
        throw DimensionError("sequence_within_pixel_range: length mismatch");
    }
    Image current = im;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& spec = specs[i];
        const auto& inst = insts[i];
        if (spec.kind == TransformKind::Photometric) {
            require_values(spec, inst);
            for (double p : current.data().values()) {
                const double q = inst.values[0] * p + inst.values[1];
                if (q < -tolerance || q > current.p_max() + tolerance) {
                    return false;
                }
            }
        } else if (spec.kind == TransformKind::Perturbation) {
            auto pv = current.data().values();
            auto ov = inst.offsets.values();
            for (std::size_t k = 0; k < pv.size(); ++k) {
                const double q = pv[k] + ov[k];
                if (q < -tolerance || q > current.p_max() + tolerance) {
                    return false;
                }
            }
        }
        current = apply(current, spec, inst);
    }
    return true;
}

Enumeration enumerate_instantiations(const TransformationSpec& spec, int grid, std::size_t height, std::size_t width,
                                     std::size_t channels) {
    Enumeration out;
    switch (spec.kind) {
        case TransformKind::Translation:
        case TransformKind::Subsample:
        case TransformKind::Zoom:
            for (auto& p : spec.discrete_points()) {
                out.instantiations.push_back({std::move(p), {}});
            }
            break;
        case TransformKind::Photometric: {
            if (grid < 2) {
                throw DomainError("enumerate_instantiations: photometric grid must be at least 2");
            }
            auto lattice = [grid](RealInterval iv, int k) {
                if (k == grid - 1) {
                    return iv.hi;
                }
                return iv.lo + (iv.hi - iv.lo) * static_cast<double>(k) / static_cast<double>(grid - 1);
            };
            for (int a = 0; a < grid; ++a) {
                for (int b = 0; b < grid; ++b) {
                    out.instantiations.push_back({{lattice(spec.contrast, a), lattice(spec.luminosity, b)}, {}});
                }
            }
            out.exhaustive = false;
            break;
        }
        case TransformKind::Perturbation:
            out.instantiations.push_back({{}, Tensor3(height, width, channels, 0.0)});
            out.exhaustive = spec.radius == 0.0;
            break;
    }
    return out;
}

}  // namespace ltr
