#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ltr/kernels/kernels.hpp"
#include "ltr/milp/model.hpp"
#include "ltr/network/network.hpp"
#include "ltr/transforms/transforms.hpp"

namespace ltr::encoder {

using kernels::Interval;
using milp::MilpModel;
using milp::VarId;

/// Interval per node, stored as parallel lo/hi arrays (flat tensor order).
struct BoundVector {
    std::vector<double> lo;
    std::vector<double> hi;

    BoundVector() = default;
    explicit BoundVector(std::size_t n, double l = 0.0, double h = 0.0) : lo(n, l), hi(n, h) {}
    std::size_t size() const noexcept { return lo.size(); }
    Interval at(std::size_t i) const { return {lo[i], hi[i]}; }
    void set(std::size_t i, Interval v) {
        lo[i] = v.lo;
        hi[i] = v.hi;
    }
};

struct LayerBounds {
    BoundVector linear;     // weighted sums / convolution outputs
    BoundVector rectified;  // after ReLU (equals linear on the output layer)
    BoundVector output;     // pooled for conv layers
};

struct NodeBounds {
    BoundVector input;
    std::vector<BoundVector> transforms;  // output of each transformation layer
    BoundVector perturbation;
    std::vector<LayerBounds> layers;
};

struct VerificationQuery {
    Network network;
    Image image;
    int label = 1;  // 1-based
    std::vector<TransformationSpec> transformations;
    double perturbation_radius = 0.0;
};

/// Throws DimensionError / DomainError for shape mismatches, labels outside
/// [1, c], c < 2, a negative radius, invalid domains, a photometric layer that
/// is not first, or a perturbation spec inside the transformation list.
void validate_query(const VerificationQuery& query);

/// Interval bounds for every node, starting from the exact image.
NodeBounds propagate_bounds(const VerificationQuery& query);

/// Interval bounds through the network layers for an arbitrary input box.
std::vector<LayerBounds> propagate_network_bounds(const Network& net, const BoundVector& input);

/// Pads an interval by a relative epsilon so that rounding in the forward
/// pass cannot push a value outside a variable bound or big-M.
Interval widen(Interval v);

struct TransformVars {
    TransformKind kind = TransformKind::Translation;
    std::vector<VarId> lambda;                // one per degree of freedom
    std::vector<VarId> delta;                 // one per domain point (discrete kinds)
    std::vector<std::vector<double>> points;  // domain point of each delta
    std::vector<VarId> output;
};

struct NetworkLayerVars {
    std::vector<VarId> linear;
    std::vector<VarId> rectified;
    std::vector<VarId> output;
    std::vector<std::optional<VarId>> relu_binary;  // empty for stable nodes
    std::vector<std::vector<VarId>> pool_codes;     // per pooled output
};

struct NodeRef {
    enum class Part {
        Input,
        Lambda,
        Delta,
        TransformOutput,
        Perturbation,
        Linear,
        Rectified,
        LayerOutput,
        ReluBinary,
        PoolCode,
        OutputCode,
    };
    Part part = Part::Input;
    std::size_t layer = 0;  // transformation or network layer index (0-based)
    std::size_t index = 0;  // node, dof or domain point
    std::size_t bit = 0;    // code bit for PoolCode / OutputCode
};

struct VariableMap {
    std::vector<VarId> input;
    std::vector<TransformVars> transforms;
    std::vector<VarId> perturbation;
    std::vector<NetworkLayerVars> layers;
    std::vector<VarId> output_codes;

    /// Reverse lookup; throws ModelError for a variable the map does not own.
    const NodeRef& locate(VarId id) const;

    std::vector<NodeRef> reverse;  // indexed by VarId::index
};

// Building blocks. Each appends variables and tagged rows to `model`.

/// Degree-of-freedom variables lambda_d with C1 range rows.
std::vector<VarId> encode_dof_bounds(MilpModel& model, const TransformationSpec& spec, const std::string& prefix);

/// One binary per domain point, sum = 1 (C3), and sum_d d_j delta_d = lambda_j (C4).
std::vector<VarId> encode_selector(MilpModel& model, const std::vector<std::vector<double>>& points,
                                   const std::vector<VarId>& lambda, const std::string& prefix);

/// out_px = lambda_mu * im_px + lambda_nu (C2); the input must be the constant image.
void encode_photometric(MilpModel& model, const Image& im, VarId mu, VarId nu, const std::vector<VarId>& out);

/// Disjunctive big-M linearization of out = e_d when delta_d = 1 (C5 / C6 / C7).
void encode_translation(MilpModel& model, const Shape& shape, const std::vector<std::vector<double>>& points,
                        const std::vector<VarId>& in, const BoundVector& in_bounds, const std::vector<VarId>& out,
                        const BoundVector& out_bounds, const std::vector<VarId>& delta);
void encode_subsample(MilpModel& model, const Shape& shape, const std::vector<std::vector<double>>& points,
                      const std::vector<VarId>& in, const BoundVector& in_bounds, const std::vector<VarId>& out,
                      const BoundVector& out_bounds, const std::vector<VarId>& delta);
void encode_zoom(MilpModel& model, const Shape& shape, const std::vector<std::vector<double>>& points,
                 const std::vector<VarId>& in, const BoundVector& in_bounds, const std::vector<VarId>& out,
                 const BoundVector& out_bounds, const std::vector<VarId>& delta);

/// |out - in| <= rho per pixel (C8, C9).
void encode_perturbation(MilpModel& model, double rho, const std::vector<VarId>& in, const std::vector<VarId>& out);

struct ReluVars {
    VarId y;
    std::optional<VarId> inactive;  // 1 forces y = 0
};

/// y = max(0, ws) via C11-C14, big-M max(|lb|, |ub|); no binary when the sign is provable.
ReluVars encode_relu(MilpModel& model, VarId ws, Interval ws_bounds, const std::string& name);

struct MaxpoolVars {
    VarId y;
    std::vector<VarId> codes;  // bit k of the window position
};

/// y = max(window) via C16-C18 with ceil(log2(window size)) code binaries.
MaxpoolVars encode_maxpool_block(MilpModel& model, const std::vector<VarId>& window, const BoundVector& bounds,
                                 const std::string& name);

NetworkLayerVars encode_fc(MilpModel& model, const FullyConnectedLayer& layer, const std::vector<VarId>& in,
                           const LayerBounds& bounds, const std::string& prefix);
NetworkLayerVars encode_conv(MilpModel& model, const ConvolutionalLayer& layer, const Shape& in_shape,
                             const std::vector<VarId>& in, const LayerBounds& bounds, const std::string& prefix);

/// Some class other than `label` has a weighted sum >= the label's (C19, C20).
/// Returns the ceil(log2 c) output-code binaries; throws DomainError for c < 2.
std::vector<VarId> encode_robustness(MilpModel& model, int label, const std::vector<VarId>& logits,
                                     const BoundVector& bounds);

struct EncodedQuery {
    MilpModel model;
    VariableMap map;
    NodeBounds bounds;
};

/// Whole transformational network plus the robustness property; feasible iff
/// some in-domain instantiation (and perturbation) is not classified as `label`.
EncodedQuery encode_query(const VerificationQuery& query);

/// Fixes the selectors, photometric parameters and perturbation outputs to one
/// concrete instantiation. `perturbed` is the perturbation layer output
/// (nullptr keeps the perturbation free).
void pin_instantiation(MilpModel& model, const VariableMap& map, const std::vector<Instantiation>& insts,
                       const Tensor3* perturbed);

}  // namespace ltr::encoder
