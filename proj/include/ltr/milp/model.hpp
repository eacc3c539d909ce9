#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace ltr::milp {

/// Dense handle into a MilpModel's variable table.
struct VarId {
    std::uint32_t index = 0;
    friend auto operator<=>(const VarId&, const VarId&) = default;
};

enum class VarKind { Continuous, Binary };

struct Variable {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lo = 0.0;
    double hi = 0.0;
    int branch_priority = 0;  // binaries with higher priority are branched on first
};

struct Term {
    double coeff = 0.0;
    VarId var;
};

/// sum(coeff * var) + constant, with at most one term per variable.
class LinearExpr {
public:
    LinearExpr() = default;
    explicit LinearExpr(double constant) : constant_(constant) {}

    LinearExpr& add(double coeff, VarId var);
    LinearExpr& add(const LinearExpr& other, double scale = 1.0);
    LinearExpr& add_constant(double c) {
        constant_ += c;
        return *this;
    }

    const std::vector<Term>& terms() const noexcept { return terms_; }
    double constant() const noexcept { return constant_; }

    double evaluate(const std::vector<double>& values) const;

private:
    std::vector<Term> terms_;
    double constant_ = 0.0;
};

enum class Sense { LessEqual, GreaterEqual, Equal };

const char* sense_symbol(Sense s);

/// expr sense rhs, stored with the expression constant folded into rhs.
struct Constraint {
    LinearExpr expr;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
    std::string tag;
};

using ConstraintId = std::size_t;

struct ModelStats {
    std::size_t variables = 0;
    std::size_t binaries = 0;
    std::size_t constraints = 0;
    friend bool operator==(const ModelStats&, const ModelStats&) = default;
};

/// Feasibility MILP: bounded continuous variables, binaries, tagged linear
/// constraints and the constant objective 0.
class MilpModel {
public:
    VarId add_continuous(const std::string& name, double lo, double hi);
    VarId add_binary(const std::string& name);

    ConstraintId add_constraint(LinearExpr expr, Sense sense, double rhs, std::string tag);

    const std::vector<Variable>& variables() const noexcept { return variables_; }
    const Variable& variable(VarId id) const { return variables_.at(id.index); }
    const std::vector<Constraint>& constraints() const noexcept { return constraints_; }
    const Constraint& constraint(ConstraintId id) const { return constraints_.at(id); }

    std::size_t variable_count() const noexcept { return variables_.size(); }
    bool contains(VarId id) const noexcept { return id.index < variables_.size(); }
    /// Throws ModelError if no variable has that name.
    VarId find(const std::string& name) const;
    bool has_name(const std::string& name) const { return names_.count(name) != 0; }

    void set_branch_priority(VarId id, int priority) { variables_.at(id.index).branch_priority = priority; }

    /// Adds `delta` to a constraint's right-hand side.
    void shift_rhs(ConstraintId id, double delta);

    /// Narrows a variable's bounds (never widens). Throws ModelError on an empty result.
    void tighten_bounds(VarId id, double lo, double hi);

    ModelStats stats() const;
    std::set<std::string> tags() const;
    std::map<std::string, std::size_t> tag_census() const;

private:
    VarId register_variable(const std::string& name, VarKind kind, double lo, double hi);

    std::vector<Variable> variables_;
    std::vector<Constraint> constraints_;
    std::unordered_map<std::string, std::uint32_t> names_;
};

/// Value per variable, indexed by VarId::index.
struct Assignment {
    std::vector<double> values;

    double operator[](VarId id) const { return values.at(id.index); }
    double& operator[](VarId id) { return values.at(id.index); }
};

/// Standard LP-format text: Minimize / Subject To / Bounds / Binaries / End,
/// in variable and constraint creation order.
std::string export_lp(const MilpModel& model);

/// Name used for constraint `id` in export_lp output.
std::string lp_constraint_name(const MilpModel& model, ConstraintId id);

}  // namespace ltr::milp
