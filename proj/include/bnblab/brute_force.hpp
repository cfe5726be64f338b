#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "bnblab/lp.hpp"
#include "bnblab/model.hpp"
#include "bnblab/rational.hpp"

namespace bnblab {

/// Thrown when the integer enumeration lattice exceeds the supported size.
struct LatticeTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline constexpr uint64_t kMaxLatticePoints = uint64_t(1) << 24;

struct IntegerLattice {
  std::vector<int> vars;            // integer variable indices
  std::vector<BigInt> base;         // lower bound per integer variable
  std::vector<uint64_t> range;      // upper - lower + 1
  uint64_t points = 1;

  static IntegerLattice build(const MipInstance& inst) {
    IntegerLattice lat;
    for (const Variable& v : inst.variables) {
      if (!v.is_integer) continue;
      const BigInt lo = ceil_int(v.lower);
      const BigInt hi = floor_int(v.upper);
      if (hi < lo) {
        lat.points = 0;
        return lat;
      }
      const BigInt count = hi - lo + 1;
      if (count > BigInt(kMaxLatticePoints))
        throw LatticeTooLarge("integer range of variable '" + v.name + "' too large");
      lat.vars.push_back(v.index);
      lat.base.push_back(lo);
      lat.range.push_back(count.convert_to<uint64_t>());
      const BigInt total = BigInt(lat.points) * count;
      if (total > BigInt(kMaxLatticePoints))
        throw LatticeTooLarge("integer enumeration lattice exceeds 2^24 points");
      lat.points = total.convert_to<uint64_t>();
    }
    return lat;
  }

  /// Writes the mixed-radix decoding of `index` into the integer slots of x.
  void assign(uint64_t index, std::vector<Rational>& x) const {
    for (size_t k = 0; k < vars.size(); ++k) {
      const uint64_t digit = index % range[k];
      index /= range[k];
      x[static_cast<size_t>(vars[k])] = Rational(base[k] + digit);
    }
  }
};

}  // namespace detail

/// Exhaustive optimality oracle: enumerates every integer assignment (the
/// lattice must stay within 2^24 points) and, when continuous variables are
/// present, solves the remaining LP per assignment. Used to certify the
/// search engine on small instances.
inline OptResult brute_force_opt(const MipInstance& instance) {
  const auto lat = detail::IntegerLattice::build(instance);
  OptResult best;
  best.status = OptResult::Status::Infeasible;
  if (lat.points == 0) return best;

  const size_t n = static_cast<size_t>(instance.num_variables());
  bool has_continuous = false;
  for (const Variable& v : instance.variables)
    if (!v.is_integer) has_continuous = true;

  if (!has_continuous) {
    std::vector<Rational> x(n, Rational(0));
    for (uint64_t idx = 0; idx < lat.points; ++idx) {
      lat.assign(idx, x);
      bool ok = true;
      for (const auto& con : instance.constraints)
        if (!satisfies(con, x)) { ok = false; break; }
      if (!ok) continue;
      const Rational value = eval_expr(instance.objective, x);
      if (!best.optimal() || value > best.value) {
        best.status = OptResult::Status::Optimal;
        best.value = value;
        best.point = x;
      }
    }
    return best;
  }

  // Mixed case: fix the integers, optimize the continuous rest by LP.
  auto shared = std::make_shared<MipInstance>(instance);
  const LpProblem root = LpProblem::relaxation_of(shared);
  std::vector<Rational> x(n, Rational(0));
  for (uint64_t idx = 0; idx < lat.points; ++idx) {
    lat.assign(idx, x);
    LpProblem fixed = root;
    bool in_bounds = true;
    for (size_t k = 0; k < lat.vars.size(); ++k) {
      const size_t v = static_cast<size_t>(lat.vars[k]);
      if (x[v] < root.lower[v] || x[v] > root.upper[v]) { in_bounds = false; break; }
      fixed.lower[v] = x[v];
      fixed.upper[v] = x[v];
    }
    if (!in_bounds) continue;
    const LpOutcome out = solve_lp(fixed);
    if (out.status != LpStatus::Optimal) continue;
    if (!best.optimal() || out.value > best.value) {
      best.status = OptResult::Status::Optimal;
      best.value = out.value;
      best.point = out.point;
    }
  }
  return best;
}

/// Enumerates all integer-feasible points of a pure-integer instance
/// (used by cut-validity checks). Requires the same lattice bound.
inline std::vector<std::vector<Rational>> enumerate_integer_points(const MipInstance& instance) {
  for (const Variable& v : instance.variables)
    if (!v.is_integer)
      throw std::invalid_argument("enumerate_integer_points: instance has continuous variables");
  const auto lat = detail::IntegerLattice::build(instance);
  std::vector<std::vector<Rational>> points;
  std::vector<Rational> x(static_cast<size_t>(instance.num_variables()), Rational(0));
  for (uint64_t idx = 0; idx < lat.points; ++idx) {
    lat.assign(idx, x);
    bool ok = true;
    for (const auto& con : instance.constraints)
      if (!satisfies(con, x)) { ok = false; break; }
    if (ok) points.push_back(x);
  }
  return points;
}

}  // namespace bnblab
