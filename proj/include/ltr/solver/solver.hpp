#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ltr/milp/model.hpp"

namespace ltr::milp {

enum class BranchingRule {
    MostFractional,   // binary whose LP value is closest to 0.5
    FirstFractional,  // lowest-index fractional binary (creation order)
};

struct SolverConfig {
    double timeout_seconds = 200.0;
    double feasibility_tolerance = 1e-6;
    double integrality_tolerance = 1e-5;
    BranchingRule branching_rule = BranchingRule::MostFractional;
    std::optional<std::size_t> node_limit;
    /// Node relaxations whose dense dictionary would exceed this many entries
    /// are skipped (the node is branched on without an LP bound).
    std::size_t max_node_lp_entries = 2'000'000;
    /// Binary groups up to this size are case-split during bound propagation.
    std::size_t probing_group_bits = 4;

    /// Throws DomainError when a tolerance or the timeout is not positive.
    void validate() const;
};

enum class SolveStatus { Feasible, Infeasible, TimedOut, NumericalFailure };

std::string to_string(SolveStatus status);

struct SolveStats {
    std::size_t nodes = 0;
    std::size_t lp_solves = 0;
    std::size_t lp_iterations = 0;
    std::size_t numerical_failures = 0;
    double elapsed_seconds = 0.0;
};

struct SolveResult {
    SolveStatus status = SolveStatus::NumericalFailure;
    Assignment assignment;  // set when Feasible
    SolveStats stats;
    std::string diagnostic;
};

enum class LpRelaxationStatus { Feasible, Infeasible, NumericalFailure };

struct LpRelaxationResult {
    LpRelaxationStatus status = LpRelaxationStatus::NumericalFailure;
    Assignment assignment;
    std::string diagnostic;
};

/// Phase-1 simplex on the relaxation (binaries treated as continuous in [0, 1]).
LpRelaxationResult solve_lp_relaxation(const MilpModel& model, const SolverConfig& config = {});

/// Branch-and-bound feasibility decision.
SolveResult solve(const MilpModel& model, const SolverConfig& config = {});

struct Violation {
    enum class Kind { Constraint, Bound, Integrality };
    Kind kind = Kind::Constraint;
    std::size_t index = 0;  // constraint id or variable index
    std::string tag;        // constraint tag or variable name
    double amount = 0.0;
};

struct CheckTolerances {
    double feasibility = 1e-6;
    double integrality = 1e-5;
};

/// Re-evaluates every bound, integrality requirement and constraint by direct
/// substitution. Throws ModelError when the assignment does not cover every variable.
std::vector<Violation> check_assignment(const MilpModel& model, const Assignment& assignment,
                                        const CheckTolerances& tolerances = {});

/// Result of bound propagation on a whole model.
struct TightenedBounds {
    bool infeasible = false;
    std::vector<double> lo;
    std::vector<double> hi;
};

/// Runs the solver's bound propagation (including binary case splits) once
/// on the model's root bounds. Sound: every feasible point lies within the result.
TightenedBounds tighten_bounds(const MilpModel& model, const SolverConfig& config = {});

/// Pluggable decision procedure over a MilpModel.
class SolverBackend {
public:
    virtual ~SolverBackend() = default;
    virtual std::string name() const = 0;
    virtual SolveResult solve(const MilpModel& model, const SolverConfig& config) = 0;
};

class BuiltinBackend final : public SolverBackend {
public:
    std::string name() const override { return "builtin"; }
    SolveResult solve(const MilpModel& model, const SolverConfig& config) override;
};

/// Runs an external LP-format solver as a subprocess.
///
/// The command template may contain {lp} and {sol}; they are replaced by the
/// model file and the expected solution file. The solution file's first token
/// is a status word: "optimal" or "feasible" map to Feasible, "infeasible" to
/// Infeasible, "timelimit" to TimedOut; anything else is a NumericalFailure.
/// For Feasible, the remaining lines are "<variable name> <value>".
class ExternalLpBackend final : public SolverBackend {
public:
    ExternalLpBackend(std::string command_template, std::string work_directory);
    std::string name() const override { return "external"; }
    SolveResult solve(const MilpModel& model, const SolverConfig& config) override;

private:
    std::string command_template_;
    std::string work_directory_;
};

/// Parses a solution file in the ExternalLpBackend format.
SolveResult parse_solution_file(const MilpModel& model, const std::string& text);

}  // namespace ltr::milp
