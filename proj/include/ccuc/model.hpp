#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ccuc {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class VarKind { continuous, binary };
enum class Sense { less_equal, equal, greater_equal };

struct Variable {
    std::string name;
    VarKind kind = VarKind::continuous;
    double lower = 0.0;
    double upper = kInfinity;
};

struct Term {
    int var = 0;
    double coef = 0.0;
};

struct LinearConstraint {
    std::string name;
    std::vector<Term> terms;  // sorted by variable, no duplicates, no zeros
    Sense sense = Sense::less_equal;
    double rhs = 0.0;
};

/// constant + sum_i linear[i] x_i + sum_i quadratic[i] x_i^2, quadratic >= 0.
struct Objective {
    std::vector<double> linear;
    std::vector<double> quadratic;
    double constant = 0.0;
};

/// Mixed-integer program with linear constraints and a separable convex
/// quadratic objective. Variable and row order is insertion order.
class MiqpModel {
public:
    int add_variable(std::string name, VarKind kind, double lower, double upper, double linear_cost = 0.0,
                     double quadratic_cost = 0.0);

    /// Merges repeated variables and drops zero coefficients.
    std::size_t add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs);

    std::size_t num_variables() const { return variables_.size(); }
    std::size_t num_constraints() const { return constraints_.size(); }
    std::size_t num_binaries() const;

    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<LinearConstraint>& constraints() const { return constraints_; }
    const Objective& objective() const { return objective_; }

    Variable& variable(int i) { return variables_[static_cast<std::size_t>(i)]; }
    const Variable& variable(int i) const { return variables_[static_cast<std::size_t>(i)]; }
    Objective& objective() { return objective_; }

    bool is_convex() const;
    std::vector<int> binary_indices() const;

    double evaluate_objective(std::span<const double> x) const;
    static double activity(const LinearConstraint& row, std::span<const double> x);

    /// Amount by which `row` is violated at x (0 when satisfied).
    static double violation(const LinearConstraint& row, std::span<const double> x);

    /// Structural problems: dangling references, bad binary bounds,
    /// negative quadratic coefficients. Empty when the model is well formed.
    std::vector<std::string> check() const;

private:
    std::vector<Variable> variables_;
    std::vector<LinearConstraint> constraints_;
    Objective objective_;
};

struct WorstViolation {
    enum class Where { none, bound, constraint };
    Where where = Where::none;
    std::size_t index = 0;  // variable or row index
    double residual = 0.0;
    std::string name;
};

/// Largest bound or row violation of x; `where == none` if x is feasible
/// within `tolerance`.
WorstViolation worst_violation(const MiqpModel& model, std::span<const double> x, double tolerance);

std::string_view to_string(Sense s);

}  // namespace ccuc
