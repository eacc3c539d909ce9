#pragma once

// Activity-based bound propagation plus case splitting over small groups of
// binaries that share the same rows (ReLU phase, max-pool codes, output codes).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ltr/milp/model.hpp"

namespace ltr::milp::detail {

struct CompiledRow {
    std::vector<std::uint32_t> cols;
    std::vector<double> coeffs;
    double lo = 0.0;
    double hi = 0.0;
};

/// Rows whose binary support is exactly `binaries`, rewritten over local indices.
struct ProbeGroup {
    std::vector<std::uint32_t> binaries;  // global indices
    std::vector<std::uint32_t> vars;      // local -> global
    std::vector<char> local_binary;
    std::vector<CompiledRow> rows;        // cols are local indices
};

struct CompiledModel {
    std::size_t n = 0;
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<char> binary;
    std::vector<int> priority;
    std::vector<CompiledRow> rows;
    std::vector<std::vector<std::uint32_t>> col_rows;
    std::vector<ProbeGroup> groups;
    std::vector<std::vector<std::uint32_t>> var_groups;

    static CompiledModel compile(const MilpModel& model, std::size_t group_bits);
};

class Propagator {
public:
    Propagator(const CompiledModel& model, double integrality_tolerance);

    /// Tightens lo/hi in place. `changed` seeds the work list; when `everything`
    /// is set all rows and groups are processed. Returns false when the bounds
    /// prove infeasibility.
    bool run(std::vector<double>& lo, std::vector<double>& hi, std::span<const std::uint32_t> changed,
             bool everything);

private:
    bool propagate_rows(std::vector<double>& lo, std::vector<double>& hi);
    bool probe(std::vector<double>& lo, std::vector<double>& hi);
    void mark_changed(std::uint32_t var);

    const CompiledModel& model_;
    double int_tol_;
    std::vector<std::uint32_t> queue_;
    std::vector<char> queued_;
    std::vector<char> group_dirty_;
    std::vector<std::uint32_t> dirty_list_;
};

}  // namespace ltr::milp::detail
