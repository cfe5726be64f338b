#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "bnblab/rational.hpp"

namespace bnblab {

struct Variable {
  int index = 0;
  Rational lower;
  Rational upper;
  bool is_integer = false;
  std::string name;
};

enum class Sense { LessEqual, GreaterEqual, Equal };

inline const char* sense_text(Sense s) {
  switch (s) {
    case Sense::LessEqual: return "<=";
    case Sense::GreaterEqual: return ">=";
    case Sense::Equal: return "=";
  }
  return "?";
}

// Sparse row: variable index -> coefficient. Zero coefficients are not stored.
using LinearExpr = std::map<int, Rational>;

struct LinearConstraint {
  LinearExpr coefficients;
  Sense sense = Sense::LessEqual;
  Rational rhs;
  std::string label;
};

/// A mixed-integer linear program. The objective sense is always maximize;
/// callers with minimization problems negate the objective themselves.
struct MipInstance {
  std::vector<Variable> variables;
  std::vector<LinearConstraint> constraints;
  LinearExpr objective;
  std::string name;

  int num_variables() const { return static_cast<int>(variables.size()); }
};

struct OptResult {
  enum class Status { Optimal, Infeasible };
  Status status = Status::Infeasible;
  Rational value;                // meaningful iff optimal
  std::vector<Rational> point;   // meaningful iff optimal

  bool optimal() const { return status == Status::Optimal; }
};

inline Rational eval_expr(const LinearExpr& expr, const std::vector<Rational>& point) {
  Rational acc = 0;
  for (const auto& [var, coef] : expr) acc += coef * point[static_cast<size_t>(var)];
  return acc;
}

inline bool satisfies(const LinearConstraint& con, const std::vector<Rational>& point) {
  const Rational lhs = eval_expr(con.coefficients, point);
  switch (con.sense) {
    case Sense::LessEqual: return lhs <= con.rhs;
    case Sense::GreaterEqual: return lhs >= con.rhs;
    case Sense::Equal: return lhs == con.rhs;
  }
  return false;
}

/// Checks every structural invariant of the instance. Returns one message per
/// violation; an empty list means the instance is well formed.
inline std::vector<std::string> validate(const MipInstance& instance) {
  std::vector<std::string> violations;
  if (instance.name.empty())
    violations.push_back("instance name must be non-empty");
  if (instance.variables.empty())
    violations.push_back("instance has no variables");

  const int n = instance.num_variables();
  for (int i = 0; i < n; ++i) {
    const Variable& v = instance.variables[static_cast<size_t>(i)];
    if (v.index != i)
      violations.push_back("variable '" + v.name + "' has index " +
                           std::to_string(v.index) + ", expected " + std::to_string(i));
    if (v.name.empty())
      violations.push_back("variable " + std::to_string(i) + " has an empty name");
    if (v.lower > v.upper)
      violations.push_back("variable '" + v.name + "' has lower " + to_string(v.lower) +
                           " > upper " + to_string(v.upper));
  }

  const auto check_expr = [&](const LinearExpr& expr, const std::string& where) {
    for (const auto& [var, coef] : expr) {
      if (var < 0 || var >= n)
        violations.push_back(where + " references variable index " + std::to_string(var) +
                             " outside [0, " + std::to_string(n) + ")");
      if (coef == 0)
        violations.push_back(where + " stores a zero coefficient for variable " +
                             std::to_string(var));
    }
  };

  for (size_t j = 0; j < instance.constraints.size(); ++j) {
    const LinearConstraint& con = instance.constraints[j];
    const std::string where = "constraint '" +
        (con.label.empty() ? "#" + std::to_string(j) : con.label) + "'";
    if (con.label.empty())
      violations.push_back(where + " has an empty label");
    check_expr(con.coefficients, where);
  }
  check_expr(instance.objective, "objective");
  return violations;
}

}  // namespace bnblab
