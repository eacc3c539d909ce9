#pragma once

// Bounded-variable primal simplex, phase 1 only (feasibility).
//
// Internal to the solver: the public entry points in ltr/solver/solver.hpp
// translate a MilpModel (or a branch-and-bound node of one) into an
// LpProblem.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace ltr::milp::detail {

struct LpRow {
    std::vector<std::uint32_t> cols;
    std::vector<double> coeffs;
    double lo = 0.0;  // may be -inf
    double hi = 0.0;  // may be +inf
};

struct LpProblem {
    std::vector<double> col_lo;
    std::vector<double> col_hi;
    std::vector<LpRow> rows;

    std::size_t cols() const noexcept { return col_lo.size(); }
};

enum class LpStatus { Feasible, Infeasible, NumericalFailure, IterationLimit, TimeLimit, TooLarge };

struct LpOptions {
    double primal_tolerance = 1e-9;
    double pivot_tolerance = 1e-9;
    /// Accepted residual of the final point against the original rows.
    double residual_tolerance = 1e-7;
    std::size_t max_iterations = 0;  // 0: derived from the problem size
    std::size_t max_dense_entries = 16'000'000;
    std::size_t degenerate_before_bland = 50;
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct LpResult {
    LpStatus status = LpStatus::NumericalFailure;
    std::vector<double> x;       // structural values when Feasible
    std::size_t iterations = 0;
    double infeasibility = 0.0;  // phase-1 objective at termination
};

LpResult solve_feasibility(const LpProblem& problem, const LpOptions& options);

}  // namespace ltr::milp::detail
