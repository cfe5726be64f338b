#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bnblab/engine.hpp"
#include "bnblab/lp.hpp"
#include "bnblab/model.hpp"
#include "bnblab/rational.hpp"

namespace bnblab {

/// A violated cover: sum_{i in C} x_i <= |C| - 1, derived from one knapsack
/// row whose weights over C exceed its capacity.
struct CoverCut {
  std::set<int> cover;
  std::string source_label;
  Rational violation;  // d* of the separation problem, > 0 for emitted cuts

  LinearConstraint as_constraint(const std::string& label) const {
    LinearConstraint con;
    con.label = label;
    con.sense = Sense::LessEqual;
    con.rhs = Rational(static_cast<int64_t>(cover.size()) - 1);
    for (int i : cover) con.coefficients[i] = Rational(1);
    return con;
  }
};

struct SeparationResult {
  enum class Kind { Cut, NoViolatedCover, RedundantRow };
  Kind kind = Kind::NoViolatedCover;
  std::optional<CoverCut> cut;
};

/// Solves the cover separation problem for constraint `row` at the LP point
/// x*: maximize sum x*_i w_i - sum w_i + 1 over binary w with
/// sum a_i w_i >= b + 1, restricted to the row's support. The optimum d* is
/// the cut violation; d* <= 0 means no violated cover exists, and an
/// infeasible separation problem means the row can never be violated by a
/// binary point, i.e. it is redundant.
///
/// The separation IP is solved exactly by the in-repo engine with the
/// most-fractional rule.
inline SeparationResult separate_cover(const MipInstance& instance, size_t row,
                                       const std::vector<Rational>& x_star) {
  if (row >= instance.constraints.size())
    throw std::out_of_range("separate_cover: bad row index");
  const LinearConstraint& con = instance.constraints[row];
  if (con.sense != Sense::LessEqual)
    throw std::invalid_argument("separate_cover: row '" + con.label + "' is not a <= row");
  for (const auto& [var, coef] : con.coefficients) {
    if (coef < 0 || !is_integer(coef))
      throw std::invalid_argument("separate_cover: row '" + con.label +
                                  "' has a non-integral or negative weight");
    const Variable& v = instance.variables[static_cast<size_t>(var)];
    if (!v.is_integer || v.lower != 0 || v.upper != 1)
      throw std::invalid_argument("separate_cover: variable '" + v.name + "' is not binary");
  }
  if (!is_integer(con.rhs) || con.rhs < 0)
    throw std::invalid_argument("separate_cover: row '" + con.label +
                                "' has a non-integral or negative capacity");

  MipInstance cgip;
  cgip.name = instance.name + ":cgip:" + con.label;
  LinearConstraint knap;
  knap.label = "exceed";
  knap.sense = Sense::GreaterEqual;
  knap.rhs = con.rhs + 1;
  int w = 0;
  std::vector<int> original;  // cgip variable -> instance variable
  for (const auto& [var, coef] : con.coefficients) {
    cgip.variables.push_back({w, Rational(0), Rational(1),
                              true, instance.variables[static_cast<size_t>(var)].name});
    knap.coefficients[w] = coef;
    // objective term (x*_i - 1) w_i; the +1 constant is added afterwards
    const Rational c = x_star[static_cast<size_t>(var)] - 1;
    if (c != 0) cgip.objective[w] = c;
    original.push_back(var);
    ++w;
  }
  cgip.constraints.push_back(std::move(knap));

  SeparationResult res;
  if (cgip.variables.empty()) {
    // Empty support: the row is 0 <= b, violated by nothing.
    res.kind = SeparationResult::Kind::RedundantRow;
    return res;
  }

  EngineOptions opts;
  opts.rule = BranchRule::MostFractional;
  opts.workers = 1;
  const BnbResult sol = solve(cgip, opts);
  if (sol.status == BnbResult::Status::Infeasible) {
    res.kind = SeparationResult::Kind::RedundantRow;
    return res;
  }
  const Rational d_star = sol.incumbent.value + 1;
  if (d_star <= 0) {
    res.kind = SeparationResult::Kind::NoViolatedCover;
    return res;
  }
  CoverCut cut;
  cut.source_label = con.label;
  cut.violation = d_star;
  for (size_t k = 0; k < original.size(); ++k)
    if (sol.incumbent.point[k] == 1) cut.cover.insert(original[k]);
  res.kind = SeparationResult::Kind::Cut;
  res.cut = std::move(cut);
  return res;
}

/// One separation per row; cuts with d* > 0, deduplicated by cover set
/// (first row wins).
inline std::vector<CoverCut> find_all_covers(const MipInstance& instance,
                                             const std::vector<Rational>& x_star) {
  std::vector<CoverCut> cuts;
  std::set<std::set<int>> seen;
  for (size_t j = 0; j < instance.constraints.size(); ++j) {
    SeparationResult r = separate_cover(instance, j, x_star);
    if (r.kind != SeparationResult::Kind::Cut) continue;
    if (!seen.insert(r.cut->cover).second) continue;
    cuts.push_back(std::move(*r.cut));
  }
  return cuts;
}

/// New instance with the cuts appended as rows; the input is untouched.
inline MipInstance apply_cuts(const MipInstance& instance, const std::vector<CoverCut>& cuts) {
  MipInstance out = instance;
  for (const CoverCut& cut : cuts) {
    const std::string label = "cover" + std::to_string(out.constraints.size() + 1);
    out.constraints.push_back(cut.as_constraint(label));
  }
  return out;
}

/// Euclidean distance from x* to the cut's hyperplane:
/// (sum_{i in C} x*_i - (|C| - 1)) / sqrt(|C|) = d* / sqrt(|C|).
/// The only floating-point quantity in this module; reporting only.
inline double cut_depth(const CoverCut& cut, const std::vector<Rational>& x_star) {
  Rational violation = Rational(1) - static_cast<int64_t>(cut.cover.size());
  for (int i : cut.cover) violation += x_star[static_cast<size_t>(i)];
  if (violation <= 0)
    throw std::invalid_argument("cut_depth: cut is not violated at the given point");
  return to_double(violation) / std::sqrt(static_cast<double>(cut.cover.size()));
}

/// Root-node separation rounds: element 0 is the input; round k + 1 is round
/// k tightened by every cover cut violated at its root LP optimum. Stops
/// early when nothing separates (in particular when the root LP is integral).
inline std::vector<MipInstance> rounds_of_cuts(const MipInstance& instance, int max_rounds) {
  if (max_rounds < 0) throw std::invalid_argument("rounds_of_cuts: negative round count");
  std::vector<MipInstance> rounds;
  rounds.push_back(instance);
  for (int k = 0; k < max_rounds; ++k) {
    auto shared = std::make_shared<MipInstance>(rounds.back());
    const LpOutcome root = solve_lp(LpProblem::relaxation_of(shared));
    if (root.status != LpStatus::Optimal)
      throw std::runtime_error("rounds_of_cuts: root LP not optimal");
    const std::vector<CoverCut> cuts = find_all_covers(rounds.back(), root.point);
    if (cuts.empty()) break;
    rounds.push_back(apply_cuts(rounds.back(), cuts));
  }
  return rounds;
}

}  // namespace bnblab
