#include <cmath>
#include <cstdio>
#include <sstream>

#include "ltr/milp/model.hpp"

namespace ltr::milp {

namespace {

constexpr std::size_t kTermsPerLine = 8;

std::string number(double v) {
    if (v == 0.0) {
        return "0";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_terms(std::ostringstream& out, const MilpModel& model, const LinearExpr& expr) {
    const auto& terms = expr.terms();
    if (terms.empty()) {
        // LP format needs at least one variable on the left-hand side.
        out << " 0 " << model.variables().front().name;
        return;
    }
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i > 0 && i % kTermsPerLine == 0) {
            out << "\n  ";
        }
        const double c = terms[i].coeff;
        const std::string& name = model.variable(terms[i].var).name;
        if (i == 0) {
            out << ' ' << (c < 0 ? "-" : "") << number(std::abs(c)) << ' ' << name;
        } else {
            out << (c < 0 ? " - " : " + ") << number(std::abs(c)) << ' ' << name;
        }
    }
}

}  // namespace

std::string lp_constraint_name(const MilpModel& model, ConstraintId id) {
    return model.constraint(id).tag + "_" + std::to_string(id);
}

std::string export_lp(const MilpModel& model) {
    std::ostringstream out;
    out << "\\ feasibility model: objective is constant\n";
    out << "Minimize\n obj: 0\n";
    out << "Subject To\n";
    const auto& constraints = model.constraints();
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const Constraint& c = constraints[i];
        if (model.variables().empty()) {
            break;
        }
        out << ' ' << lp_constraint_name(model, i) << ':';
        write_terms(out, model, c.expr);
        out << ' ' << sense_symbol(c.sense) << ' ' << number(c.rhs) << '\n';
    }
    out << "Bounds\n";
    for (const Variable& v : model.variables()) {
        out << ' ' << number(v.lo) << " <= " << v.name << " <= " << number(v.hi) << '\n';
    }
    bool header = false;
    for (const Variable& v : model.variables()) {
        if (v.kind != VarKind::Binary) {
            continue;
        }
        if (!header) {
            out << "Binaries\n";
            header = true;
        }
        out << ' ' << v.name << '\n';
    }
    out << "End\n";
    return out.str();
}

}  // namespace ltr::milp
