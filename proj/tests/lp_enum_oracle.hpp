#pragma once

// Test-only brute-force LP oracle, independent of the simplex implementation:
// every vertex of a bounded feasible region is the intersection of n
// hyperplanes drawn from constraint boundaries and bound hyperplanes, so we
// enumerate all n-subsets, solve each linear system exactly, and keep the
// best feasible point.

#include <optional>
#include <vector>

#include "bnblab/model.hpp"
#include "bnblab/lp.hpp"
#include "bnblab/rational.hpp"

namespace bnblab_test {

struct EnumOracleResult {
  bool feasible = false;
  bnblab::Rational value;
  std::vector<bnblab::Rational> point;
};

// Solves M x = rhs by Gauss-Jordan; returns nullopt when singular.
inline std::optional<std::vector<bnblab::Rational>> solve_square(
    std::vector<std::vector<bnblab::Rational>> M, std::vector<bnblab::Rational> rhs) {
  const size_t n = M.size();
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    while (piv < n && M[piv][col] == 0) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(M[piv], M[col]);
    std::swap(rhs[piv], rhs[col]);
    const bnblab::Rational p = M[col][col];
    for (size_t c = 0; c < n; ++c) M[col][c] /= p;
    rhs[col] /= p;
    for (size_t r = 0; r < n; ++r) {
      if (r == col || M[r][col] == 0) continue;
      const bnblab::Rational f = M[r][col];
      for (size_t c = 0; c < n; ++c) M[r][c] -= f * M[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  return rhs;
}

inline EnumOracleResult enumerate_lp_optimum(const bnblab::LpProblem& problem) {
  using bnblab::Rational;
  const bnblab::MipInstance& inst = *problem.instance;
  const size_t n = inst.variables.size();

  // Hyperplane list: one per constraint boundary, two per variable bound.
  struct Plane {
    std::vector<Rational> coef;
    Rational rhs;
  };
  std::vector<Plane> planes;
  for (const auto& con : inst.constraints) {
    Plane p{std::vector<Rational>(n, Rational(0)), con.rhs};
    for (const auto& [var, coef] : con.coefficients) p.coef[static_cast<size_t>(var)] = coef;
    planes.push_back(std::move(p));
  }
  for (size_t i = 0; i < n; ++i) {
    Plane lo{std::vector<Rational>(n, Rational(0)), problem.lower[i]};
    lo.coef[i] = 1;
    planes.push_back(std::move(lo));
    Plane hi{std::vector<Rational>(n, Rational(0)), problem.upper[i]};
    hi.coef[i] = 1;
    planes.push_back(std::move(hi));
  }

  EnumOracleResult best;
  std::vector<size_t> pick(n, 0);

  const auto feasible = [&](const std::vector<Rational>& x) {
    for (size_t i = 0; i < n; ++i)
      if (x[i] < problem.lower[i] || x[i] > problem.upper[i]) return false;
    for (const auto& con : inst.constraints)
      if (!bnblab::satisfies(con, x)) return false;
    return true;
  };

  const auto consider = [&](const std::vector<size_t>& subset) {
    std::vector<std::vector<Rational>> M;
    std::vector<Rational> rhs;
    for (size_t idx : subset) {
      M.push_back(planes[idx].coef);
      rhs.push_back(planes[idx].rhs);
    }
    const auto x = solve_square(std::move(M), std::move(rhs));
    if (!x || !feasible(*x)) return;
    const Rational v = bnblab::eval_expr(inst.objective, *x);
    if (!best.feasible || v > best.value) {
      best.feasible = true;
      best.value = v;
      best.point = *x;
    }
  };

  // Enumerate all n-subsets of planes.
  std::vector<size_t> subset;
  const auto recurse = [&](auto&& self, size_t start) -> void {
    if (subset.size() == n) {
      consider(subset);
      return;
    }
    for (size_t i = start; i < planes.size(); ++i) {
      subset.push_back(i);
      self(self, i + 1);
      subset.pop_back();
    }
  };
  recurse(recurse, 0);
  return best;
}

}  // namespace bnblab_test
