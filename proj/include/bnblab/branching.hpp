#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bnblab/lp.hpp"
#include "bnblab/model.hpp"
#include "bnblab/rational.hpp"

namespace bnblab {

enum class BranchRule { FsbProduct, FsbLinear, FsbRatio, MostFractional, FixedOrder };

inline const char* rule_name(BranchRule r) {
  switch (r) {
    case BranchRule::FsbProduct: return "fsb-product";
    case BranchRule::FsbLinear: return "fsb-linear";
    case BranchRule::FsbRatio: return "fsb-ratio";
    case BranchRule::MostFractional: return "most-fractional";
    case BranchRule::FixedOrder: return "fixed-order";
  }
  return "?";
}

inline std::optional<BranchRule> rule_from_name(const std::string& name) {
  if (name == "fsb-product") return BranchRule::FsbProduct;
  if (name == "fsb-linear") return BranchRule::FsbLinear;
  if (name == "fsb-ratio") return BranchRule::FsbRatio;
  if (name == "most-fractional") return BranchRule::MostFractional;
  if (name == "fixed-order") return BranchRule::FixedOrder;
  return std::nullopt;
}

/// True for rules that branch only on fractional variables and score them
/// by tentative child LPs.
inline bool rule_uses_strong_branching(BranchRule r) {
  return r == BranchRule::FsbProduct || r == BranchRule::FsbLinear || r == BranchRule::FsbRatio;
}

struct RuleParams {
  Rational product_eps = Rational(1, 1000000);
  Rational linear_mu = Rational(1, 6);
  Rational ratio_floor = Rational(1, 1000000);
  double ratio_tol = 1e-12;
  std::vector<int> priority;  // fixed-order only; defaults to index order
};

/// Tentative LP gains of the two children of a branching candidate. A child
/// whose LP is infeasible has no finite gain.
struct GainPair {
  bool down_infeasible = false;
  bool up_infeasible = false;
  Rational down;  // parent value - down-child value, when feasible
  Rational up;

  int infeasible_children() const {
    return (down_infeasible ? 1 : 0) + (up_infeasible ? 1 : 0);
  }
};

/// Three-tier branching score. Tier 2: both children infeasible. Tier 1:
/// exactly one child infeasible, keyed by the feasible child's gain. Tier 0:
/// both feasible, keyed by the rule's numeric score. Higher is better;
/// comparison is lexicographic on (tier, key).
struct BranchScore {
  int tier = 0;
  Rational key;

  friend bool operator==(const BranchScore& a, const BranchScore& b) {
    return a.tier == b.tier && a.key == b.key;
  }
  friend bool operator<(const BranchScore& a, const BranchScore& b) {
    if (a.tier != b.tier) return a.tier < b.tier;
    return a.key < b.key;
  }
};

/// Exactly the integer-flagged variables whose value is non-integral (exact
/// denominator test, no tolerance).
inline std::vector<int> fractional_candidates(const std::vector<Rational>& point,
                                              const MipInstance& instance) {
  std::vector<int> out;
  for (const Variable& v : instance.variables)
    if (v.is_integer && !is_integer(point[static_cast<size_t>(v.index)]))
      out.push_back(v.index);
  return out;
}

/// Full tentative-branch gains of `var` by two cold child LP solves.
inline GainPair lp_gains(const LpProblem& node, const LpOutcome& parent, int var) {
  const Rational& v = parent.point[static_cast<size_t>(var)];
  GainPair g;
  const LpOutcome down =
      solve_lp(node.with_bounds(var, node.lower[static_cast<size_t>(var)], floor_rational(v)));
  const LpOutcome up =
      solve_lp(node.with_bounds(var, ceil_rational(v), node.upper[static_cast<size_t>(var)]));
  if (down.status == LpStatus::Unbounded || up.status == LpStatus::Unbounded)
    throw std::runtime_error("lp_gains: unbounded child LP");
  g.down_infeasible = down.status == LpStatus::Infeasible;
  g.up_infeasible = up.status == LpStatus::Infeasible;
  if (!g.down_infeasible) g.down = parent.value - down.value;
  if (!g.up_infeasible) g.up = parent.value - up.value;
  return g;
}

namespace detail {

/// Tier-1/2 handling shared by the strong-branching scores.
inline std::optional<BranchScore> infeasibility_tier(const GainPair& g) {
  switch (g.infeasible_children()) {
    case 2: return BranchScore{2, Rational(0)};
    case 1: return BranchScore{1, g.down_infeasible ? g.up : g.down};
    default: return std::nullopt;
  }
}

}  // namespace detail

/// score = max(down, eps) * max(up, eps).
inline BranchScore product_score(const GainPair& g, const Rational& eps) {
  if (eps <= 0) throw std::invalid_argument("product_score: eps must be positive");
  if (auto t = detail::infeasibility_tier(g)) return *t;
  const Rational d = g.down > eps ? g.down : eps;
  const Rational u = g.up > eps ? g.up : eps;
  return BranchScore{0, d * u};
}

/// score = (1 - mu) * min(down, up) + mu * max(down, up).
inline BranchScore linear_score(const GainPair& g, const Rational& mu) {
  if (mu < 0 || mu > 1) throw std::invalid_argument("linear_score: mu must lie in [0, 1]");
  if (auto t = detail::infeasibility_tier(g)) return *t;
  const Rational& lo = g.down <= g.up ? g.down : g.up;
  const Rational& hi = g.down <= g.up ? g.up : g.down;
  return BranchScore{0, (Rational(1) - mu) * lo + mu * hi};
}

/// score = 1 / phi*, with phi* the unique root > 1 of
/// p(phi) = phi^max - phi^|down-up| - 1. Gains are floored at floor_eps (the
/// root does not exist when the smaller gain is 0) and the root is found by
/// bisection on doubles to absolute tolerance tol; this is the one scoring
/// path that leaves exact arithmetic.
inline BranchScore ratio_score(const GainPair& g, const Rational& floor_eps, double tol) {
  if (floor_eps <= 0) throw std::invalid_argument("ratio_score: floor_eps must be positive");
  if (tol <= 0) throw std::invalid_argument("ratio_score: tol must be positive");
  if (auto t = detail::infeasibility_tier(g)) return *t;
  const Rational dq = g.down > floor_eps ? g.down : floor_eps;
  const Rational uq = g.up > floor_eps ? g.up : floor_eps;
  const double big = to_double(dq >= uq ? dq : uq);
  const double small = to_double(dq >= uq ? uq : dq);
  const double diff = big - small;
  const auto p = [&](double phi) { return std::pow(phi, big) - std::pow(phi, diff) - 1.0; };

  double lo = 1.0 + 1e-12;
  // Bracket the root: p(1+) = -1 and p(2^(1/small)) >= 0; expand by doubling
  // to dodge overflow when small is tiny.
  double hi = 2.0;
  while (p(hi) < 0) {
    hi *= 2;
    if (!std::isfinite(hi)) throw std::runtime_error("ratio_score: bracket overflow");
  }
  while (hi - lo > tol) {
    const double mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;  // double resolution floor
    if (p(mid) < 0) lo = mid;
    else hi = mid;
  }
  const double root = lo + (hi - lo) / 2;
  return BranchScore{0, Rational(1) / Rational(root)};
}

/// score = min(f, 1-f) with f the fractional part.
inline BranchScore most_fractional_score(const Rational& value) {
  const Rational f = fractional_part(value);
  if (f == 0) throw std::invalid_argument("most_fractional_score: value is integral");
  const Rational other = Rational(1) - f;
  return BranchScore{0, f <= other ? f : other};
}

/// One audit row of a branching decision.
struct CandidateScore {
  int var = -1;
  BranchScore score;
  bool has_gains = false;
  GainPair gains;
};

struct BranchDecision {
  int var = -1;
  Rational floor_value;  // split point: down child keeps x <= floor_value
  BranchRule rule = BranchRule::FsbProduct;
  std::vector<CandidateScore> table;
};

namespace detail {

inline BranchScore strong_branch_score(BranchRule rule, const GainPair& g,
                                       const RuleParams& params) {
  switch (rule) {
    case BranchRule::FsbProduct: return product_score(g, params.product_eps);
    case BranchRule::FsbLinear: return linear_score(g, params.linear_mu);
    case BranchRule::FsbRatio: return ratio_score(g, params.ratio_floor, params.ratio_tol);
    default: throw std::logic_error("strong_branch_score: not a strong-branching rule");
  }
}

/// Highest score wins; ties go to the lowest variable index. Assumes the
/// table is ordered by ascending variable index.
inline BranchDecision reduce_scores(BranchRule rule, std::vector<CandidateScore> table,
                                    const std::vector<Rational>& point) {
  BranchDecision d;
  d.rule = rule;
  int best = -1;
  for (size_t i = 0; i < table.size(); ++i) {
    if (best < 0 || table[static_cast<size_t>(best)].score < table[i].score) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw std::logic_error("reduce_scores: no candidates");
  d.var = table[static_cast<size_t>(best)].var;
  d.floor_value = floor_rational(point[static_cast<size_t>(d.var)]);
  d.table = std::move(table);
  return d;
}

}  // namespace detail

/// Full branching decision at a node via cold child solves (the search
/// engine uses warm re-solves internally and must agree with this).
/// Fixed-order is the LP-independent baseline: it branches on the first
/// not-yet-fixed variable in the priority list whatever its LP value, so its
/// decisions do not depend on the relaxation.
inline BranchDecision select_branch_var(const LpProblem& node, BranchRule rule,
                                        const LpOutcome& outcome,
                                        const RuleParams& params = {}) {
  if (outcome.status != LpStatus::Optimal)
    throw std::invalid_argument("select_branch_var: node LP not optimal");

  if (rule == BranchRule::FixedOrder) {
    std::vector<int> order = params.priority;
    if (order.empty())
      for (const Variable& v : node.instance->variables)
        if (v.is_integer) order.push_back(v.index);
    for (int var : order) {
      const size_t v = static_cast<size_t>(var);
      if (!node.instance->variables[v].is_integer) continue;
      if (node.lower[v] == node.upper[v]) continue;
      BranchDecision d;
      d.rule = rule;
      d.var = var;
      const Rational& value = outcome.point[v];
      // Split so both children are strictly smaller than the node.
      Rational fl = floor_rational(value);
      if (fl >= node.upper[v]) fl = node.upper[v] - 1;
      if (fl < node.lower[v]) fl = node.lower[v];
      d.floor_value = fl;
      return d;
    }
    throw std::invalid_argument("select_branch_var: no unfixed integer variable");
  }

  const std::vector<int> candidates = fractional_candidates(outcome.point, *node.instance);
  if (candidates.empty())
    throw std::invalid_argument("select_branch_var: no fractional candidates");

  std::vector<CandidateScore> table;
  table.reserve(candidates.size());
  for (int var : candidates) {
    CandidateScore c;
    c.var = var;
    if (rule == BranchRule::MostFractional) {
      c.score = most_fractional_score(outcome.point[static_cast<size_t>(var)]);
    } else {
      c.gains = lp_gains(node, outcome, var);
      c.has_gains = true;
      c.score = detail::strong_branch_score(rule, c.gains, params);
    }
    table.push_back(std::move(c));
  }
  return detail::reduce_scores(rule, std::move(table), outcome.point);
}

}  // namespace bnblab
