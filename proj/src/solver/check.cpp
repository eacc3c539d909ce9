#include <cmath>
#include <limits>

#include "ltr/core/errors.hpp"
#include "ltr/solver/solver.hpp"

namespace ltr::milp {

std::vector<Violation> check_assignment(const MilpModel& model, const Assignment& assignment,
                                        const CheckTolerances& tolerances) {
    if (assignment.values.size() != model.variable_count()) {
        throw ModelError("assignment has " + std::to_string(assignment.values.size()) + " values for " +
                         std::to_string(model.variable_count()) + " variables");
    }
    std::vector<Violation> out;
    const auto& vars = model.variables();
    for (std::size_t k = 0; k < vars.size(); ++k) {
        const double v = assignment.values[k];
        const Variable& var = vars[k];
        if (!std::isfinite(v)) {
            out.push_back({Violation::Kind::Bound, k, var.name, std::numeric_limits<double>::infinity()});
            continue;
        }
        const double excess = std::max(var.lo - v, v - var.hi);
        if (excess > tolerances.feasibility) {
            out.push_back({Violation::Kind::Bound, k, var.name, excess});
        }
        if (var.kind == VarKind::Binary) {
            const double frac = std::abs(v - std::round(v));
            if (frac > tolerances.integrality) {
                out.push_back({Violation::Kind::Integrality, k, var.name, frac});
            }
        }
    }
    const auto& rows = model.constraints();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Constraint& c = rows[i];
        double lhs = 0.0;
        double scale = 1.0;
        for (const Term& t : c.expr.terms()) {
            const double p = t.coeff * assignment.values[t.var.index];
            lhs += p;
            scale = std::max(scale, std::abs(p));
        }
        double amount = 0.0;
        switch (c.sense) {
            case Sense::LessEqual:
                amount = lhs - c.rhs;
                break;
            case Sense::GreaterEqual:
                amount = c.rhs - lhs;
                break;
            case Sense::Equal:
                amount = std::abs(lhs - c.rhs);
                break;
        }
        // Relative to the magnitude of the summed products, so large big-M rows
        // are not held to an absolute standard they cannot meet in doubles.
        if (amount > tolerances.feasibility * scale) {
            out.push_back({Violation::Kind::Constraint, i, c.tag, amount});
        }
    }
    return out;
}

}  // namespace ltr::milp
