#include "ccuc/model.hpp"

#include "ccuc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace ccuc {

int MiqpModel::add_variable(std::string name, VarKind kind, double lower, double upper, double linear_cost,
                            double quadratic_cost) {
    variables_.push_back(Variable{std::move(name), kind, lower, upper});
    objective_.linear.push_back(linear_cost);
    objective_.quadratic.push_back(quadratic_cost);
    return static_cast<int>(variables_.size() - 1);
}

std::size_t MiqpModel::add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs) {
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    std::vector<Term> merged;
    merged.reserve(terms.size());
    for (const Term& t : terms) {
        if (!merged.empty() && merged.back().var == t.var)
            merged.back().coef += t.coef;
        else
            merged.push_back(t);
    }
    std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
    constraints_.push_back(LinearConstraint{std::move(name), std::move(merged), sense, rhs});
    return constraints_.size() - 1;
}

std::size_t MiqpModel::num_binaries() const {
    return static_cast<std::size_t>(
        std::count_if(variables_.begin(), variables_.end(), [](const Variable& v) { return v.kind == VarKind::binary; }));
}

bool MiqpModel::is_convex() const {
    return std::all_of(objective_.quadratic.begin(), objective_.quadratic.end(), [](double q) { return q >= 0.0; });
}

std::vector<int> MiqpModel::binary_indices() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < variables_.size(); ++i)
        if (variables_[i].kind == VarKind::binary) out.push_back(static_cast<int>(i));
    return out;
}

double MiqpModel::evaluate_objective(std::span<const double> x) const {
    if (x.size() != variables_.size())
        throw InputError(fmt::format("assignment has {} entries, model has {} variables", x.size(), variables_.size()));
    double value = objective_.constant;
    for (std::size_t i = 0; i < x.size(); ++i) value += (objective_.linear[i] + objective_.quadratic[i] * x[i]) * x[i];
    return value;
}

double MiqpModel::activity(const LinearConstraint& row, std::span<const double> x) {
    double a = 0.0;
    for (const Term& t : row.terms) a += t.coef * x[static_cast<std::size_t>(t.var)];
    return a;
}

double MiqpModel::violation(const LinearConstraint& row, std::span<const double> x) {
    const double a = activity(row, x);
    switch (row.sense) {
        case Sense::less_equal: return std::max(0.0, a - row.rhs);
        case Sense::greater_equal: return std::max(0.0, row.rhs - a);
        case Sense::equal: return std::abs(a - row.rhs);
    }
    return 0.0;
}

std::vector<std::string> MiqpModel::check() const {
    std::vector<std::string> problems;
    const auto n = static_cast<int>(variables_.size());
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        const Variable& v = variables_[i];
        if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper)
            problems.push_back(fmt::format("variable {}: invalid bounds [{}, {}]", v.name, v.lower, v.upper));
        if (v.kind == VarKind::binary && (v.lower < 0.0 || v.upper > 1.0))
            problems.push_back(fmt::format("variable {}: binary bounds outside [0, 1]", v.name));
        if (!std::isfinite(objective_.linear[i]) || !std::isfinite(objective_.quadratic[i]))
            problems.push_back(fmt::format("variable {}: non-finite objective coefficient", v.name));
        if (objective_.quadratic[i] < 0.0)
            problems.push_back(fmt::format("variable {}: negative quadratic coefficient {}", v.name,
                                           objective_.quadratic[i]));
    }
    for (const LinearConstraint& row : constraints_) {
        if (!std::isfinite(row.rhs)) problems.push_back(fmt::format("row {}: non-finite right-hand side", row.name));
        for (const Term& t : row.terms) {
            if (t.var < 0 || t.var >= n)
                problems.push_back(fmt::format("row {}: reference to unknown variable {}", row.name, t.var));
            else if (!std::isfinite(t.coef))
                problems.push_back(fmt::format("row {}: non-finite coefficient", row.name));
        }
    }
    return problems;
}

WorstViolation worst_violation(const MiqpModel& model, std::span<const double> x, double tolerance) {
    WorstViolation worst;
    double largest = tolerance;
    const auto& vars = model.variables();
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const double r = std::max(vars[i].lower - x[i], x[i] - vars[i].upper);
        if (r > largest) {
            largest = r;
            worst = {WorstViolation::Where::bound, i, r, vars[i].name};
        }
    }
    const auto& rows = model.constraints();
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const double r = MiqpModel::violation(rows[k], x);
        if (r > largest) {
            largest = r;
            worst = {WorstViolation::Where::constraint, k, r, rows[k].name};
        }
    }
    return worst;
}

std::string_view to_string(Sense s) {
    switch (s) {
        case Sense::less_equal: return "<=";
        case Sense::equal: return "=";
        case Sense::greater_equal: return ">=";
    }
    return "?";
}

}  // namespace ccuc
