#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ltr/network/network.hpp"
#include "ltr/solver/solver.hpp"
#include "ltr/transforms/transforms.hpp"

namespace ltr::io {

// Networks: JSON with input_shape [h, w, c], class_count and a layer list.
// fc:   {"type": "fc", "weights": [[...] per output], "bias": [...], "activation": "relu" | "argmax"}
// conv: {"type": "conv", "kernels": [k][p][q][c_in], "biases": [...], "pool": [p', q']}

Network parse_network(std::string_view text);
std::string serialize_network(const Network& net);
Network load_network(const std::string& path);
void save_network(const Network& net, const std::string& path);

enum class ImageFormat { PgmAscii, PgmBinary, Idx, Json };

/// Detects PGM (P2/P5), IDX (magic 0x00000803) or the JSON tensor format.
/// `index` selects the image inside an IDX file.
Image parse_image(std::string_view bytes, std::size_t index = 0);
Image load_image(const std::string& path, std::size_t index = 0);

/// PGM keeps maxval = p_max for integer images with p_max in [255, 65535] and
/// otherwise rescales to 255; IDX requires p_max = 255 and integer
/// pixels; JSON is lossless. Multi-channel PGM/IDX is rejected.
std::string encode_image(const Image& im, ImageFormat format);
void save_image(const Image& im, const std::string& path, ImageFormat format);

/// Number of images in an IDX image file.
std::size_t idx_image_count(std::string_view bytes);
std::string encode_idx_images(const std::vector<Image>& images);
std::vector<int> parse_idx_labels(std::string_view bytes);
std::string encode_idx_labels(const std::vector<int>& labels);

struct SolverOverrides {
    std::optional<double> timeout_seconds;
    std::optional<milp::BranchingRule> branching_rule;
    std::optional<std::size_t> node_limit;

    milp::SolverConfig apply(milp::SolverConfig config) const;
    friend bool operator==(const SolverOverrides&, const SolverOverrides&) = default;
};

struct QueryDocument {
    std::string network_path;
    std::string image_path;
    std::size_t image_index = 0;
    std::optional<int> label;  // defaults to the network's own prediction
    bool normalize = false;    // divide pixels by p_max
    std::string domain;        // report grouping key
    std::vector<TransformationSpec> transformations;
    double rho = 0.0;
    SolverOverrides solver;

    friend bool operator==(const QueryDocument&, const QueryDocument&) = default;
};

QueryDocument parse_query(std::string_view text);
std::string serialize_query(const QueryDocument& doc);
QueryDocument load_query(const std::string& path);

struct TransformationRecord {
    TransformKind kind = TransformKind::Translation;
    std::vector<double> values;
    friend bool operator==(const TransformationRecord&, const TransformationRecord&) = default;
};

/// Result of one verify run as written to disk (no timings, so reruns match byte for byte).
struct OutcomeDocument {
    std::string name;
    std::string verdict;  // "robust" | "not_robust" | "undecided"
    std::string reason;   // undecided reason, empty otherwise
    int label = 0;
    int adversarial_label = 0;
    bool replay_confirmed = false;
    std::vector<TransformationRecord> instantiation;
    std::optional<Image> counterexample;

    friend bool operator==(const OutcomeDocument&, const OutcomeDocument&) = default;
};

OutcomeDocument parse_outcome(std::string_view text);
std::string serialize_outcome(const OutcomeDocument& doc);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

std::string format_instantiation(const std::vector<TransformationRecord>& records);

}  // namespace ltr::io
