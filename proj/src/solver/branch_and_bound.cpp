#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ltr/core/errors.hpp"
#include "ltr/solver/solver.hpp"
#include "propagation.hpp"
#include "simplex.hpp"

namespace ltr::milp {

using detail::CompiledModel;
using detail::CompiledRow;
using detail::LpProblem;
using detail::LpRow;
using detail::LpStatus;
using detail::Propagator;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool is_fixed(double lo, double hi) { return hi - lo <= 1e-11 * (1.0 + std::abs(lo)); }

double fixed_value(double lo, double hi) { return lo == hi ? lo : 0.5 * (lo + hi); }

struct ReducedLp {
    LpProblem problem;
    std::vector<std::uint32_t> active;  // LP column -> model variable
    bool infeasible = false;
};

// LP over the variables a node leaves free; fixed variables are folded into
// the row bounds and rows that cannot bind are dropped.
ReducedLp build_reduced(const CompiledModel& cm, const std::vector<double>& lo, const std::vector<double>& hi) {
    ReducedLp out;
    std::vector<std::int64_t> local(cm.n, -1);
    for (std::uint32_t k = 0; k < cm.n; ++k) {
        if (!is_fixed(lo[k], hi[k])) {
            local[k] = static_cast<std::int64_t>(out.active.size());
            out.active.push_back(k);
            out.problem.col_lo.push_back(lo[k]);
            out.problem.col_hi.push_back(hi[k]);
        }
    }
    for (const CompiledRow& row : cm.rows) {
        LpRow lr;
        double fixed = 0.0;
        double min_act = 0.0;
        double max_act = 0.0;
        double magnitude = 0.0;
        for (std::size_t e = 0; e < row.cols.size(); ++e) {
            const auto k = row.cols[e];
            const double a = row.coeffs[e];
            if (local[k] < 0) {
                fixed += a * fixed_value(lo[k], hi[k]);
                magnitude += std::abs(a * lo[k]);
            } else {
                lr.cols.push_back(static_cast<std::uint32_t>(local[k]));
                lr.coeffs.push_back(a);
                min_act += std::min(a * lo[k], a * hi[k]);
                max_act += std::max(a * lo[k], a * hi[k]);
                magnitude += std::max(std::abs(a * lo[k]), std::abs(a * hi[k]));
            }
        }
        const double tol = 1e-9 * (1.0 + magnitude);
        const double rlo = row.lo - fixed;
        const double rhi = row.hi - fixed;
        if (lr.cols.empty()) {
            if (0.0 < rlo - tol || 0.0 > rhi + tol) {
                out.infeasible = true;
                return out;
            }
            continue;
        }
        if (min_act >= rlo && max_act <= rhi) {
            continue;
        }
        lr.lo = rlo;
        lr.hi = rhi;
        out.problem.rows.push_back(std::move(lr));
    }
    return out;
}

class BranchAndBound {
public:
    BranchAndBound(const MilpModel& model, const SolverConfig& config)
        : model_(model),
          config_(config),
          cm_(CompiledModel::compile(model, config.probing_group_bits)),
          propagator_(cm_, config.integrality_tolerance),
          start_(Clock::now()),
          deadline_(start_ + std::chrono::duration_cast<Clock::duration>(
                                 std::chrono::duration<double>(config.timeout_seconds))) {}

    SolveResult run() {
        SolveResult result;
        struct Node {
            std::vector<double> lo;
            std::vector<double> hi;
            std::int64_t changed = -1;
        };
        std::vector<Node> stack;
        stack.push_back({cm_.lo, cm_.hi, -1});
        bool root = true;

        while (!stack.empty()) {
            if (Clock::now() > deadline_ || (config_.node_limit && stats_.nodes >= *config_.node_limit)) {
                return finish(result, SolveStatus::TimedOut,
                              last_issue_.empty() ? "time or node limit reached"
                                                  : "time or node limit reached; last issue: " + last_issue_);
            }
            Node node = std::move(stack.back());
            stack.pop_back();
            ++stats_.nodes;

            std::vector<std::uint32_t> seed;
            if (node.changed >= 0) {
                seed.push_back(static_cast<std::uint32_t>(node.changed));
            }
            if (!propagator_.run(node.lo, node.hi, seed, root)) {
                root = false;
                continue;
            }
            root = false;

            std::vector<std::uint32_t> free_binaries;
            int top_priority = std::numeric_limits<int>::min();
            for (std::uint32_t k = 0; k < cm_.n; ++k) {
                if (cm_.binary[k] && node.lo[k] < node.hi[k]) {
                    free_binaries.push_back(k);
                    top_priority = std::max(top_priority, cm_.priority[k]);
                }
            }

            if (free_binaries.empty()) {
                // Propagation usually pins every variable at a leaf; try that point first.
                Assignment guess;
                guess.values.resize(cm_.n);
                for (std::uint32_t k = 0; k < cm_.n; ++k) {
                    guess.values[k] = cm_.binary[k] ? node.lo[k] : 0.5 * (node.lo[k] + node.hi[k]);
                }
                if (check_assignment(model_, guess, {config_.feasibility_tolerance, config_.integrality_tolerance})
                        .empty()) {
                    result.assignment = std::move(guess);
                    return finish(result, SolveStatus::Feasible, "");
                }
                auto leaf = solve_node_lp(node.lo, node.hi, std::numeric_limits<std::size_t>::max());
                if (leaf.status == LpStatus::TimeLimit) {
                    return finish(result, SolveStatus::TimedOut, "time limit inside LP");
                }
                if (leaf.status == LpStatus::Feasible) {
                    auto violations = check_assignment(model_, leaf.assignment,
                                                       {config_.feasibility_tolerance, config_.integrality_tolerance});
                    if (violations.empty()) {
                        result.assignment = std::move(leaf.assignment);
                        return finish(result, SolveStatus::Feasible, "");
                    }
                    ++stats_.numerical_failures;
                    last_issue_ = "leaf LP point failed the substitution check (" + violations.front().tag + ")";
                } else if (leaf.status != LpStatus::Infeasible) {
                    ++stats_.numerical_failures;
                    last_issue_ = "leaf LP could not be decided";
                }
                continue;
            }

            auto relax = solve_node_lp(node.lo, node.hi, config_.max_node_lp_entries);
            if (relax.status == LpStatus::TimeLimit) {
                return finish(result, SolveStatus::TimedOut, "time limit inside LP");
            }
            if (relax.status == LpStatus::Infeasible) {
                continue;
            }
            if (relax.status == LpStatus::NumericalFailure || relax.status == LpStatus::IterationLimit) {
                ++stats_.numerical_failures_relaxation;
                last_issue_ = relax.status == LpStatus::IterationLimit ? "node LP hit the iteration limit"
                                                                      : "node LP failed numerically";
            }
            const bool have_lp = relax.status == LpStatus::Feasible;

            // Only the highest-priority free binaries are branching candidates.
            std::vector<std::uint32_t> candidates;
            for (auto k : free_binaries) {
                if (cm_.priority[k] == top_priority) {
                    candidates.push_back(k);
                }
            }
            std::uint32_t branch_var = candidates.front();
            double preferred = 1.0;
            bool integral = have_lp;
            if (have_lp) {
                double best = -1.0;
                for (auto k : candidates) {
                    const double v = relax.assignment.values[k];
                    const double frac = std::min(v, 1.0 - v);
                    if (frac <= config_.integrality_tolerance) {
                        continue;
                    }
                    const bool better = config_.branching_rule == BranchingRule::MostFractional
                                            ? frac > best + 1e-12
                                            : best < 0.0;
                    if (better) {
                        best = frac;
                        branch_var = k;
                    }
                }
                preferred = relax.assignment.values[branch_var] >= 0.5 ? 1.0 : 0.0;
                for (auto k : free_binaries) {
                    const double v = relax.assignment.values[k];
                    integral = integral && std::min(v, 1.0 - v) <= config_.integrality_tolerance;
                }
            }

            Node other{node.lo, node.hi, branch_var};
            other.lo[branch_var] = other.hi[branch_var] = 1.0 - preferred;
            Node first{std::move(node.lo), std::move(node.hi), branch_var};
            first.lo[branch_var] = first.hi[branch_var] = preferred;
            stack.push_back(std::move(other));
            if (integral) {
                // Dive: try the LP's own binary pattern before anything else.
                Node dive = first;
                for (auto k : free_binaries) {
                    dive.lo[k] = dive.hi[k] = std::round(relax.assignment.values[k]);
                }
                dive.changed = -1;
                stack.push_back(std::move(first));
                stack.push_back(std::move(dive));
                // The dive fixes many binaries at once, so propagate from scratch.
                root = true;
            } else {
                stack.push_back(std::move(first));
            }
        }
        if (stats_.numerical_failures > 0) {
            return finish(result, SolveStatus::NumericalFailure, last_issue_);
        }
        return finish(result, SolveStatus::Infeasible, "");
    }

private:
    struct NodeLp {
        LpStatus status = LpStatus::NumericalFailure;
        Assignment assignment;
    };

    NodeLp solve_node_lp(const std::vector<double>& lo, const std::vector<double>& hi, std::size_t max_entries) {
        NodeLp out;
        ReducedLp reduced = build_reduced(cm_, lo, hi);
        if (reduced.infeasible) {
            out.status = LpStatus::Infeasible;
            return out;
        }
        detail::LpOptions options;
        options.deadline = deadline_;
        options.max_dense_entries = max_entries;
        auto lp = detail::solve_feasibility(reduced.problem, options);
        if (lp.status != LpStatus::TooLarge) {
            ++stats_.lp_solves;
        }
        stats_.lp_iterations += lp.iterations;
        out.status = lp.status;
        if (lp.status != LpStatus::Feasible) {
            return out;
        }
        out.assignment.values.resize(cm_.n);
        for (std::uint32_t k = 0; k < cm_.n; ++k) {
            out.assignment.values[k] = fixed_value(lo[k], hi[k]);
        }
        for (std::size_t j = 0; j < reduced.active.size(); ++j) {
            out.assignment.values[reduced.active[j]] = lp.x[j];
        }
        return out;
    }

    SolveResult& finish(SolveResult& result, SolveStatus status, std::string diagnostic) {
        result.status = status;
        result.diagnostic = std::move(diagnostic);
        stats_.elapsed_seconds = seconds_since(start_);
        result.stats = stats_;
        result.stats.numerical_failures += stats_.numerical_failures_relaxation;
        return result;
    }

    struct InternalStats : SolveStats {
        std::size_t numerical_failures_relaxation = 0;
    };

    const MilpModel& model_;
    const SolverConfig& config_;
    CompiledModel cm_;
    Propagator propagator_;
    Clock::time_point start_;
    Clock::time_point deadline_;
    InternalStats stats_;
    std::string last_issue_;
};

}  // namespace

void SolverConfig::validate() const {
    if (!(timeout_seconds > 0.0)) {
        throw DomainError("solver timeout must be positive");
    }
    if (!(feasibility_tolerance > 0.0) || !(integrality_tolerance > 0.0)) {
        throw DomainError("solver tolerances must be positive");
    }
}

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Feasible:
            return "feasible";
        case SolveStatus::Infeasible:
            return "infeasible";
        case SolveStatus::TimedOut:
            return "timed_out";
        case SolveStatus::NumericalFailure:
            return "numerical_failure";
    }
    return "unknown";
}

SolveResult solve(const MilpModel& model, const SolverConfig& config) {
    config.validate();
    BranchAndBound bb(model, config);
    return bb.run();
}

LpRelaxationResult solve_lp_relaxation(const MilpModel& model, const SolverConfig& config) {
    config.validate();
    LpProblem problem;
    for (const Variable& v : model.variables()) {
        problem.col_lo.push_back(v.lo);
        problem.col_hi.push_back(v.hi);
    }
    for (const Constraint& c : model.constraints()) {
        LpRow row;
        for (const Term& t : c.expr.terms()) {
            row.cols.push_back(t.var.index);
            row.coeffs.push_back(t.coeff);
        }
        row.lo = c.sense == Sense::LessEqual ? -kInf : c.rhs;
        row.hi = c.sense == Sense::GreaterEqual ? kInf : c.rhs;
        problem.rows.push_back(std::move(row));
    }
    detail::LpOptions options;
    options.deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                          std::chrono::duration<double>(config.timeout_seconds));
    auto lp = detail::solve_feasibility(problem, options);
    LpRelaxationResult out;
    switch (lp.status) {
        case LpStatus::Feasible:
            out.status = LpRelaxationStatus::Feasible;
            out.assignment.values = std::move(lp.x);
            break;
        case LpStatus::Infeasible:
            out.status = LpRelaxationStatus::Infeasible;
            break;
        default:
            out.status = LpRelaxationStatus::NumericalFailure;
            out.diagnostic = "simplex did not reach a certified verdict";
            break;
    }
    return out;
}

TightenedBounds tighten_bounds(const MilpModel& model, const SolverConfig& config) {
    const CompiledModel cm = CompiledModel::compile(model, config.probing_group_bits);
    Propagator propagator(cm, config.integrality_tolerance);
    TightenedBounds out{false, cm.lo, cm.hi};
    out.infeasible = !propagator.run(out.lo, out.hi, {}, true);
    return out;
}

SolveResult BuiltinBackend::solve(const MilpModel& model, const SolverConfig& config) {
    return milp::solve(model, config);
}

}  // namespace ltr::milp
