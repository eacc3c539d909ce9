#include "ltr/milp/model.hpp"

#include <algorithm>
#include <cmath>

#include "ltr/core/errors.hpp"

namespace ltr::milp {

LinearExpr& LinearExpr::add(double coeff, VarId var) {
    for (Term& t : terms_) {
        if (t.var == var) {
            t.coeff += coeff;
            return *this;
        }
    }
    terms_.push_back({coeff, var});
    return *this;
}

LinearExpr& LinearExpr::add(const LinearExpr& other, double scale) {
    for (const Term& t : other.terms()) {
        add(scale * t.coeff, t.var);
    }
    constant_ += scale * other.constant();
    return *this;
}

double LinearExpr::evaluate(const std::vector<double>& values) const {
    double sum = constant_;
    for (const Term& t : terms_) {
        sum += t.coeff * values.at(t.var.index);
    }
    return sum;
}

const char* sense_symbol(Sense s) {
    switch (s) {
        case Sense::LessEqual:
            return "<=";
        case Sense::GreaterEqual:
            return ">=";
        case Sense::Equal:
            return "=";
    }
    return "?";
}

VarId MilpModel::register_variable(const std::string& name, VarKind kind, double lo, double hi) {
    if (name.empty()) {
        throw ModelError("variable name must not be empty");
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw ModelError("variable '" + name + "' has non-finite bounds");
    }
    if (lo > hi) {
        throw ModelError("variable '" + name + "' has lower bound " + std::to_string(lo) + " above upper bound " +
                         std::to_string(hi));
    }
    if (names_.count(name) != 0) {
        throw ModelError("duplicate variable name '" + name + "'");
    }
    const auto index = static_cast<std::uint32_t>(variables_.size());
    variables_.push_back({name, kind, lo, hi});
    names_.emplace(name, index);
    return VarId{index};
}

VarId MilpModel::add_continuous(const std::string& name, double lo, double hi) {
    return register_variable(name, VarKind::Continuous, lo, hi);
}

VarId MilpModel::add_binary(const std::string& name) { return register_variable(name, VarKind::Binary, 0.0, 1.0); }

ConstraintId MilpModel::add_constraint(LinearExpr expr, Sense sense, double rhs, std::string tag) {
    if (!std::isfinite(rhs) || !std::isfinite(expr.constant())) {
        throw ModelError("constraint " + tag + " has a non-finite right-hand side");
    }
    for (const Term& t : expr.terms()) {
        if (!contains(t.var)) {
            throw ModelError("constraint " + tag + " references unregistered variable #" + std::to_string(t.var.index));
        }
        if (!std::isfinite(t.coeff)) {
            throw ModelError("constraint " + tag + " has a non-finite coefficient");
        }
    }
    Constraint c;
    c.rhs = rhs - expr.constant();
    LinearExpr folded;
    for (const Term& t : expr.terms()) {
        if (t.coeff != 0.0) {
            folded.add(t.coeff, t.var);
        }
    }
    c.expr = std::move(folded);
    c.sense = sense;
    c.tag = std::move(tag);
    constraints_.push_back(std::move(c));
    return constraints_.size() - 1;
}

VarId MilpModel::find(const std::string& name) const {
    auto it = names_.find(name);
    if (it == names_.end()) {
        throw ModelError("unknown variable '" + name + "'");
    }
    return VarId{it->second};
}

void MilpModel::shift_rhs(ConstraintId id, double delta) {
    Constraint& c = constraints_.at(id);
    if (!std::isfinite(c.rhs + delta)) {
        throw ModelError("constraint " + c.tag + " would get a non-finite right-hand side");
    }
    c.rhs += delta;
}

void MilpModel::tighten_bounds(VarId id, double lo, double hi) {
    Variable& v = variables_.at(id.index);
    const double new_lo = std::max(v.lo, lo);
    const double new_hi = std::min(v.hi, hi);
    if (new_lo > new_hi) {
        throw ModelError("tightening '" + v.name + "' leaves an empty interval");
    }
    v.lo = new_lo;
    v.hi = new_hi;
}

ModelStats MilpModel::stats() const {
    ModelStats s;
    s.variables = variables_.size();
    s.binaries = static_cast<std::size_t>(
        std::count_if(variables_.begin(), variables_.end(), [](const Variable& v) { return v.kind == VarKind::Binary; }));
    s.constraints = constraints_.size();
    return s;
}

std::set<std::string> MilpModel::tags() const {
    std::set<std::string> out;
    for (const auto& c : constraints_) {
        out.insert(c.tag);
    }
    return out;
}

std::map<std::string, std::size_t> MilpModel::tag_census() const {
    std::map<std::string, std::size_t> out;
    for (const auto& c : constraints_) {
        ++out[c.tag];
    }
    return out;
}

}  // namespace ltr::milp
