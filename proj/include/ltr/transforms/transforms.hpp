#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ltr/core/tensor.hpp"

namespace ltr {

enum class TransformKind { Photometric, Translation, Subsample, Zoom, Perturbation };

std::string to_string(TransformKind kind);

struct RealInterval {
    double lo = 0.0;
    double hi = 0.0;
    friend bool operator==(const RealInterval&, const RealInterval&) = default;
};

/// One transformation together with the domain of its degrees of freedom.
///
/// Photometric: pixel p -> contrast * p + luminosity, both drawn from intervals.
/// Translation: finite set of integer shifts (t_x along rows, t_y along columns).
/// Subsample / Zoom: finite set of integer factors >= 2.
/// Perturbation: per-pixel offsets in [-radius, radius].
struct TransformationSpec {
    TransformKind kind = TransformKind::Translation;
    RealInterval contrast{1.0, 1.0};
    RealInterval luminosity{0.0, 0.0};
    std::vector<std::pair<int, int>> shifts;
    std::vector<int> factors;
    double radius = 0.0;

    static TransformationSpec photometric(RealInterval contrast, RealInterval luminosity);
    /// Integer lattice [tx_lo, tx_hi] x [ty_lo, ty_hi], t_x-major order.
    static TransformationSpec translation_box(int tx_lo, int tx_hi, int ty_lo, int ty_hi);
    static TransformationSpec translation(std::vector<std::pair<int, int>> shifts);
    static TransformationSpec subsample(std::vector<int> factors);
    static TransformationSpec zoom(std::vector<int> factors);
    static TransformationSpec perturbation(double radius);

    /// Number of scalar degrees of freedom (perturbation has none).
    std::size_t dof_count() const noexcept;
    std::vector<std::string> dof_names() const;
    /// The discrete domain as dof tuples (translation/subsample/zoom only).
    std::vector<std::vector<double>> discrete_points() const;
    bool is_discrete() const noexcept;

    friend bool operator==(const TransformationSpec&, const TransformationSpec&) = default;
};

/// Throws DomainError if the domain is empty, non-finite or illegal for an
/// image of the given height and width.
void validate_spec(const TransformationSpec& spec, std::size_t height, std::size_t width);

/// Concrete values for every degree of freedom of one spec.
/// Photometric: {contrast, luminosity}; translation: {t_x, t_y};
/// subsample/zoom: {factor}; perturbation: empty values plus offsets.
struct Instantiation {
    std::vector<double> values;
    Tensor3 offsets;

    friend bool operator==(const Instantiation&, const Instantiation&) = default;
};

bool in_domain(const TransformationSpec& spec, const Instantiation& inst, double tolerance = 1e-9);

/// Every pixel p becomes contrast * p + luminosity, clamped to [0, p_max].
Image apply_photometric(const Image& im, double contrast, double luminosity);
/// output(u, v) = input(u + t_x, v + t_y); sources outside the image read as 0.
Image apply_translation(const Image& im, int t_x, int t_y);
/// Mean over disjoint factor x factor windows, written to the top-left corner; rest 0.
Image apply_subsample(const Image& im, int factor);
/// output(u, v) = input(floor(u / factor), floor(v / factor)) with 0-based coordinates.
Image apply_zoom(const Image& im, int factor);
/// Pixel-wise sum with offsets in [-radius, radius], clamped to [0, p_max].
Image apply_perturbation(const Image& im, const Tensor3& offsets, double radius);

Image apply(const Image& im, const TransformationSpec& spec, const Instantiation& inst);

/// Left fold over the specs in order (specs[0] is applied first).
Image apply_sequence(const Image& im, const std::vector<TransformationSpec>& specs,
                     const std::vector<Instantiation>& insts);

/// True when no pixel needs clamping anywhere along the sequence, i.e. the
/// instantiation lies in the region the MILP encoding represents.
bool sequence_within_pixel_range(const Image& im, const std::vector<TransformationSpec>& specs,
                                 const std::vector<Instantiation>& insts, double tolerance = 1e-9);

struct Enumeration {
    std::vector<Instantiation> instantiations;
    bool exhaustive = true;  // false for gridded photometric and perturbation
};

/// Discrete kinds: the exact domain. Photometric: grid x grid lattice over the
/// box including its corners. Perturbation: only the zero offset (flagged).
Enumeration enumerate_instantiations(const TransformationSpec& spec, int grid, std::size_t height = 1,
                                     std::size_t width = 1, std::size_t channels = 1);

}  // namespace ltr
