#pragma once

#include <cassert>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bnblab/model.hpp"
#include "bnblab/rational.hpp"

namespace bnblab {

// ---------------------------------------------------------------------------
// Problem view
// ---------------------------------------------------------------------------

/// LP relaxation of a MipInstance: integrality ignored, bounds possibly
/// tightened. Immutable; tightening produces a new view sharing the instance.
struct LpProblem {
  std::shared_ptr<const MipInstance> instance;
  std::vector<Rational> lower;
  std::vector<Rational> upper;

  static LpProblem relaxation_of(std::shared_ptr<const MipInstance> inst) {
    LpProblem p;
    p.lower.reserve(inst->variables.size());
    p.upper.reserve(inst->variables.size());
    for (const Variable& v : inst->variables) {
      p.lower.push_back(v.lower);
      p.upper.push_back(v.upper);
    }
    p.instance = std::move(inst);
    return p;
  }

  /// Returns a copy with variable `var` re-bounded. Overrides may only
  /// tighten; a crossed range (lo > hi) is permitted and yields an infeasible
  /// LP.
  LpProblem with_bounds(int var, const Rational& lo, const Rational& hi) const {
    const auto v = static_cast<size_t>(var);
    if (v >= lower.size()) throw std::out_of_range("with_bounds: bad variable index");
    if (lo < lower[v] || hi > upper[v])
      throw std::invalid_argument("with_bounds: overrides may only tighten");
    LpProblem p(*this);
    p.lower[v] = lo;
    p.upper[v] = hi;
    return p;
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

enum class VarStatus : uint8_t { Basic, AtLower, AtUpper };

struct LpOutcome {
  LpStatus status = LpStatus::Infeasible;
  Rational value;                      // iff optimal
  std::vector<Rational> point;         // iff optimal; structural variables
  std::vector<VarStatus> basis;        // iff optimal; structural variables

  bool optimal() const { return status == LpStatus::Optimal; }
};

namespace detail {

// Scaled integer problem data, shared by every solve on one instance. Rows
// are scaled to integers by the lcm of their coefficient denominators, the
// objective likewise; positive scalings leave the feasible region and all
// pivoting decisions unchanged.
struct LpCore {
  int n = 0;  // structural columns
  int m = 0;  // rows; slack j at column n + j, artificial j at n + m + j
  std::vector<std::vector<BigInt>> row_coef;  // m x n, scaled
  std::vector<BigInt> row_rhs;                // scaled, integral
  std::vector<Sense> row_sense;
  std::vector<BigInt> obj_coef;               // n, scaled
  std::shared_ptr<const MipInstance> instance;

  int num_cols() const { return n + 2 * m; }

  static LpCore build(std::shared_ptr<const MipInstance> inst_ptr) {
    const MipInstance& inst = *inst_ptr;
    LpCore core;
    core.instance = std::move(inst_ptr);
    core.n = inst.num_variables();
    core.m = static_cast<int>(inst.constraints.size());
    core.row_coef.assign(static_cast<size_t>(core.m),
                         std::vector<BigInt>(static_cast<size_t>(core.n), BigInt(0)));
    core.row_rhs.resize(static_cast<size_t>(core.m));
    core.row_sense.resize(static_cast<size_t>(core.m));

    for (int j = 0; j < core.m; ++j) {
      const LinearConstraint& con = inst.constraints[static_cast<size_t>(j)];
      BigInt scale = denominator(con.rhs);
      for (const auto& [var, coef] : con.coefficients)
        scale = boost::multiprecision::lcm(scale, denominator(coef));
      for (const auto& [var, coef] : con.coefficients)
        core.row_coef[static_cast<size_t>(j)][static_cast<size_t>(var)] =
            numerator(coef) * (scale / denominator(coef));
      core.row_rhs[static_cast<size_t>(j)] = numerator(con.rhs) * (scale / denominator(con.rhs));
      core.row_sense[static_cast<size_t>(j)] = con.sense;
    }

    core.obj_coef.assign(static_cast<size_t>(core.n), BigInt(0));
    BigInt oscale(1);
    for (const auto& [var, coef] : inst.objective)
      oscale = boost::multiprecision::lcm(oscale, denominator(coef));
    for (const auto& [var, coef] : inst.objective)
      core.obj_coef[static_cast<size_t>(var)] = numerator(coef) * (oscale / denominator(coef));
    return core;
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Simplex state over an integer-pivoted tableau.
//
//   W    = det(B) * B^-1 * [A | I | I]          (integer matrix)
//   obj_ = det * (c - c_B B^-1 [A|I|I])         (integer row)
//   ival_[r] = lam * det * x_basic[r]           (integer basic values)
//   blo_/bhi_[c] = lam * bound                  (integer bounds)
//
// lam is the lcm of the bound denominators, so the whole hot path is integer
// arithmetic: pivots and value updates are cross-multiplications with one
// exact division by the previous determinant, and ratio-test comparisons are
// integer cross-multiplications. No rounding exists anywhere.
//
// Pivot rule: Dantzig (largest scaled reduced cost), switching to Bland's
// rule after a run of degenerate pivots. Every tie-break uses the smallest
// variable index, so outcomes do not depend on internal row order.
//
// Columns of variables fixed by their bounds while nonbasic can never enter
// the basis; they are marked dead and skipped by pivot updates. Their stale
// entries are never read again because bounds only tighten over a state's
// lifetime. refactorize() updates every column and so restores a fully
// consistent tableau.
//
// Copyable; a copy is an independent tableau. The search engine copies
// states for strong-branching probes and re-solves with resolve_tighten.
// ---------------------------------------------------------------------------
class SimplexState {
 public:
  explicit SimplexState(std::shared_ptr<const detail::LpCore> core)
      : core_(std::move(core)) {}

  /// Cold solve: slack basis, textbook artificial-variable phase 1, then
  /// primal phase 2.
  LpStatus solve_cold(const std::vector<Rational>& lo, const std::vector<Rational>& hi) {
    init(lo, hi);
    if (crossed_) return finish(LpStatus::Infeasible);
    const LpStatus ph1 = phase_one();
    if (ph1 != LpStatus::Optimal) return finish(ph1);
    return finish(phase_two());
  }

  /// Warm re-solve after tightening one structural variable's bounds,
  /// starting from this state's optimal basis.
  LpStatus resolve_tighten(int var, const Rational& lo, const Rational& hi) {
    assert(status_ == LpStatus::Optimal);
    const auto v = static_cast<size_t>(var);
    if (!divides_lam(lo) || !divides_lam(hi)) {
      // New bound outside the current denominator lattice: rescale via a
      // cold solve. Branching bounds are integral and never take this path.
      auto rlo = rlo_;
      auto rhi = rhi_;
      rlo[v] = lo;
      rhi[v] = hi;
      return solve_cold(rlo, rhi);
    }
    // Capture the nonbasic resting value before the bounds move.
    const BigInt old_val = vstat_[v] == VarStatus::AtUpper ? bhi_[v] : blo_[v];
    rlo_[v] = lo;
    rhi_[v] = hi;
    blo_[v] = scaled_bound(lo);
    bhi_[v] = scaled_bound(hi);
    if (lo > hi) return finish(LpStatus::Infeasible);

    if (vstat_[v] == VarStatus::Basic) {
      if (basic_within_bounds(rowof_[v])) return finish(LpStatus::Optimal);
      const LpStatus restored = restore_basic_variable(var);
      if (restored != LpStatus::Optimal) return finish(restored);
      return finish(phase_two());
    }

    // Nonbasic: shift to the nearest admissible bound and re-optimize.
    if (lo == hi) live_[v] = 0;
    BigInt target = old_val;
    if (target < blo_[v]) target = blo_[v];
    if (target > bhi_[v]) target = bhi_[v];
    vstat_[v] = (target == bhi_[v] && lo != hi) ? VarStatus::AtUpper : VarStatus::AtLower;
    if (target != old_val) {
      const BigInt delta = target - old_val;  // lam-scaled
      bool violated = false;
      for (int r = 0; r < core_->m; ++r) {
        const BigInt& w = cell(r, var);
        if (w == 0) continue;
        ival_[static_cast<size_t>(r)] -= delta * w;
        if (!basic_within_bounds(r)) violated = true;
      }
      if (violated) {
        // Several basics knocked out of range at once; a cold solve is the
        // simple correct repair. Branching never hits this path (it always
        // re-bounds a basic variable).
        return solve_cold(rlo_, rhi_);
      }
    }
    return finish(phase_two());
  }

  LpStatus status() const { return status_; }

  /// Current value of a structural (or slack) variable.
  Rational value_of(int var) const {
    const size_t v = static_cast<size_t>(var);
    if (vstat_[v] == VarStatus::Basic)
      return Rational(ival_[static_cast<size_t>(rowof_[v])], lam_ * det_);
    return Rational(vstat_[v] == VarStatus::AtUpper ? bhi_[v] : blo_[v], lam_);
  }

  Rational objective_value() const {
    Rational acc = 0;
    for (const auto& [var, coef] : core_->instance->objective) acc += coef * value_of(var);
    return acc;
  }

  std::vector<Rational> point() const {
    std::vector<Rational> x;
    x.reserve(static_cast<size_t>(core_->n));
    for (int i = 0; i < core_->n; ++i) x.push_back(value_of(i));
    return x;
  }

  std::vector<VarStatus> structural_basis() const {
    return std::vector<VarStatus>(vstat_.begin(), vstat_.begin() + core_->n);
  }

  const std::vector<int>& basic_columns() const { return basic_; }
  const std::vector<VarStatus>& full_status() const { return vstat_; }
  const std::vector<Rational>& lower_bounds() const { return rlo_; }
  const std::vector<Rational>& upper_bounds() const { return rhi_; }
  const detail::LpCore& core() const { return *core_; }
  std::shared_ptr<const detail::LpCore> core_ptr() const { return core_; }

  /// Rebuilds the tableau for a basis recorded from an earlier solve on the
  /// same instance with the same bounds (used when a cached tableau has been
  /// evicted).
  void refactorize(const std::vector<Rational>& lo, const std::vector<Rational>& hi,
                   const std::vector<int>& basic, const std::vector<VarStatus>& vstat) {
    init(lo, hi);
    if (crossed_) throw std::logic_error("refactorize: crossed bounds");
    vstat_ = vstat;
    const int n = core_->n, m = core_->m;
    // Artificials are pinned to zero after any phase 1.
    for (int j = 0; j < m; ++j) {
      const size_t a = static_cast<size_t>(n + m + j);
      blo_[a] = 0;
      bhi_[a] = 0;
      lo_finite_[a] = 1;
      hi_finite_[a] = 1;
      live_[a] = vstat_[a] == VarStatus::Basic ? 1 : 0;
    }
    for (int c = 0; c < n + m; ++c) {
      const size_t cc = static_cast<size_t>(c);
      live_[cc] = (vstat_[cc] != VarStatus::Basic && lo_finite_[cc] && hi_finite_[cc] &&
                   blo_[cc] == bhi_[cc])
                      ? 0
                      : 1;
    }

    update_dead_ = true;
    std::vector<uint8_t> placed(static_cast<size_t>(m), 0);
    basic_.assign(static_cast<size_t>(m), -1);
    rowof_.assign(static_cast<size_t>(core_->num_cols()), -1);
    for (int q : basic) {
      int row = -1;
      for (int r = 0; r < m; ++r) {
        if (placed[static_cast<size_t>(r)]) continue;
        if (cell(r, q) != 0) { row = r; break; }
      }
      if (row < 0) throw std::logic_error("refactorize: singular basis");
      pivot(row, q);
      placed[static_cast<size_t>(row)] = 1;
      basic_[static_cast<size_t>(row)] = q;
      rowof_[static_cast<size_t>(q)] = row;
      vstat_[static_cast<size_t>(q)] = VarStatus::Basic;
    }
    update_dead_ = false;
    recompute_values();
    rebuild_objective_row();
    status_ = LpStatus::Optimal;
  }

  void dump(std::ostream& os) const {
    os << "det = " << det_.str() << "  lam = " << lam_.str() << "\n";
    for (int r = 0; r < core_->m; ++r) {
      os << "row " << r << " basic=" << basic_[static_cast<size_t>(r)] << " |";
      for (int c = 0; c < core_->num_cols(); ++c) os << " " << cell(r, c).str();
      os << "\n";
    }
    os << "obj |";
    for (int c = 0; c < core_->num_cols(); ++c) os << " " << obj_[static_cast<size_t>(c)].str();
    os << "\n";
    for (int c = 0; c < core_->num_cols(); ++c) {
      const size_t cc = static_cast<size_t>(c);
      os << "col " << c << " = " << to_string(value_of(c))
         << (vstat_[cc] == VarStatus::Basic ? " basic"
             : vstat_[cc] == VarStatus::AtLower ? " at-lower" : " at-upper")
         << (live_[cc] ? "" : " dead") << "\n";
    }
  }

 private:
  std::shared_ptr<const detail::LpCore> core_;
  std::vector<BigInt> tableau_;        // m x ncols, row-major
  std::vector<BigInt> obj_;            // scaled reduced-cost row
  BigInt det_{1};
  BigInt lam_{1};                      // bound denominator scale
  std::vector<int> basic_;             // row -> column
  std::vector<int> rowof_;             // column -> row, -1 when nonbasic
  std::vector<VarStatus> vstat_;       // column -> status
  std::vector<BigInt> ival_;           // row -> lam * det * value of basic var
  std::vector<BigInt> blo_, bhi_;      // column -> lam-scaled bounds
  std::vector<uint8_t> lo_finite_, hi_finite_;
  std::vector<Rational> rlo_, rhi_;    // structural bounds as given
  std::vector<uint8_t> live_;
  LpStatus status_ = LpStatus::Infeasible;
  bool crossed_ = false;
  bool update_dead_ = false;
  bool obj_fresh_ = false;
  int degenerate_run_ = 0;
  bool bland_ = false;
  // scratch
  BigInt t1_, t2_, t3_, t4_;

  static constexpr int kBlandTrigger = 64;

  BigInt& cell(int r, int c) {
    return tableau_[static_cast<size_t>(r) * static_cast<size_t>(core_->num_cols()) +
                    static_cast<size_t>(c)];
  }
  const BigInt& cell(int r, int c) const {
    return tableau_[static_cast<size_t>(r) * static_cast<size_t>(core_->num_cols()) +
                    static_cast<size_t>(c)];
  }

  bool divides_lam(const Rational& q) const { return lam_ % denominator(q) == 0; }
  BigInt scaled_bound(const Rational& q) const {
    return numerator(q) * (lam_ / denominator(q));
  }

  /// Nonbasic bound value (lam-scaled) the column currently sits at.
  const BigInt& nonbasic_value(size_t c) const {
    return vstat_[c] == VarStatus::AtUpper ? bhi_[c] : blo_[c];
  }

  /// x_basic[row] within its bounds? Sign-aware integer comparison:
  /// lo <= x  <=>  sign(det) * (ival - blo * det) >= 0.
  bool basic_within_bounds(int row) const {
    const size_t b = static_cast<size_t>(basic_[static_cast<size_t>(row)]);
    const int ds = det_.sign();
    const BigInt& iv = ival_[static_cast<size_t>(row)];
    if (lo_finite_[b]) {
      const BigInt edge = blo_[b] * det_;
      if (iv.compare(edge) * ds < 0) return false;
    }
    if (hi_finite_[b]) {
      const BigInt edge = bhi_[b] * det_;
      if (iv.compare(edge) * ds > 0) return false;
    }
    return true;
  }

  LpStatus finish(LpStatus s) {
    status_ = s;
    return s;
  }

  void init(const std::vector<Rational>& lo, const std::vector<Rational>& hi) {
    const int n = core_->n, m = core_->m, ncols = core_->num_cols();
    tableau_.assign(static_cast<size_t>(m) * static_cast<size_t>(ncols), BigInt(0));
    obj_.assign(static_cast<size_t>(ncols), BigInt(0));
    det_ = 1;
    basic_.assign(static_cast<size_t>(m), -1);
    rowof_.assign(static_cast<size_t>(ncols), -1);
    vstat_.assign(static_cast<size_t>(ncols), VarStatus::AtLower);
    ival_.assign(static_cast<size_t>(m), BigInt(0));
    blo_.assign(static_cast<size_t>(ncols), BigInt(0));
    bhi_.assign(static_cast<size_t>(ncols), BigInt(0));
    lo_finite_.assign(static_cast<size_t>(ncols), 1);
    hi_finite_.assign(static_cast<size_t>(ncols), 1);
    live_.assign(static_cast<size_t>(ncols), 1);
    rlo_ = lo;
    rhi_ = hi;
    degenerate_run_ = 0;
    bland_ = false;
    crossed_ = false;
    update_dead_ = false;
    obj_fresh_ = false;

    lam_ = 1;
    for (int i = 0; i < n; ++i) {
      lam_ = boost::multiprecision::lcm(lam_, denominator(lo[static_cast<size_t>(i)]));
      lam_ = boost::multiprecision::lcm(lam_, denominator(hi[static_cast<size_t>(i)]));
    }
    for (int i = 0; i < n; ++i) {
      const size_t c = static_cast<size_t>(i);
      blo_[c] = scaled_bound(lo[c]);
      bhi_[c] = scaled_bound(hi[c]);
      if (blo_[c] > bhi_[c]) crossed_ = true;
    }
    if (crossed_) return;

    for (int j = 0; j < m; ++j) {
      const size_t s = static_cast<size_t>(n + j);
      switch (core_->row_sense[static_cast<size_t>(j)]) {
        case Sense::LessEqual: hi_finite_[s] = 0; break;     // slack in [0, inf)
        case Sense::GreaterEqual: lo_finite_[s] = 0; break;  // slack in (-inf, 0]
        case Sense::Equal: break;                            // slack fixed at 0
      }
      live_[static_cast<size_t>(n + m + j)] = 0;  // artificials recruited by phase 1
      for (int i = 0; i < n; ++i)
        cell(j, i) = core_->row_coef[static_cast<size_t>(j)][static_cast<size_t>(i)];
      cell(j, n + j) = 1;
      cell(j, n + m + j) = 1;
      basic_[static_cast<size_t>(j)] = n + j;
      rowof_[static_cast<size_t>(n + j)] = j;
      vstat_[static_cast<size_t>(n + j)] = VarStatus::Basic;
    }
    for (int i = 0; i < n; ++i) {
      const size_t c = static_cast<size_t>(i);
      vstat_[c] = VarStatus::AtLower;
      if (blo_[c] == bhi_[c]) live_[c] = 0;
    }
    recompute_values();
  }

  /// ival_[r] = lam * det * x_basic[r] from scratch, x_B = B^-1 (b - N x_N):
  /// lam * det * x_B = lam * W_slack * rhs - W_nonbasic * (lam x_N).
  /// Requires a tableau with no stale entries (fresh init or refactorize).
  void recompute_values() {
    const int n = core_->n, m = core_->m;
    for (int r = 0; r < m; ++r) {
      BigInt acc = 0;
      for (int j = 0; j < m; ++j) {
        const BigInt& w = cell(r, n + j);
        if (w == 0) continue;
        const BigInt& rhs = core_->row_rhs[static_cast<size_t>(j)];
        if (rhs != 0) acc += w * rhs;
      }
      acc *= lam_;
      for (int c = 0; c < core_->num_cols(); ++c) {
        const size_t cc = static_cast<size_t>(c);
        if (vstat_[cc] == VarStatus::Basic) continue;
        const BigInt& bv = nonbasic_value(cc);
        if (bv == 0) continue;
        const BigInt& w = cell(r, c);
        if (w == 0) continue;
        acc -= w * bv;
      }
      ival_[static_cast<size_t>(r)] = std::move(acc);
    }
  }

  /// obj_[c] = det * c[c] - sum_r c[basic[r]] * W[r][c].
  void rebuild_objective_row() {
    const int m = core_->m, ncols = core_->num_cols();
    auto coef_of = [&](int c) -> const BigInt* {
      if (c >= core_->n) return nullptr;
      const BigInt& b = core_->obj_coef[static_cast<size_t>(c)];
      return b == 0 ? nullptr : &b;
    };
    for (int c = 0; c < ncols; ++c) {
      const BigInt* cc = coef_of(c);
      obj_[static_cast<size_t>(c)] = cc ? det_ * *cc : BigInt(0);
    }
    for (int r = 0; r < m; ++r) {
      const BigInt* cb = coef_of(basic_[static_cast<size_t>(r)]);
      if (!cb) continue;
      for (int c = 0; c < ncols; ++c) {
        const size_t cc = static_cast<size_t>(c);
        if (!live_[cc] && vstat_[cc] != VarStatus::Basic) continue;
        const BigInt& w = cell(r, c);
        if (w != 0) obj_[cc] -= *cb * w;
      }
    }
    obj_fresh_ = true;
  }

  /// Integer tableau pivot at (p, q): for every other row,
  /// W'[r][c] = (W[r][c] * W[p][q] - W[r][q] * W[p][c]) / det, pivot row
  /// unchanged, det := W[p][q]. The objective row rides along. Callers update
  /// basic_/rowof_/vstat_/ival_.
  void pivot(int p, int q) {
    const int m = core_->m, ncols = core_->num_cols();
    const BigInt piv = cell(p, q);
    assert(piv != 0);
    mpz_srcptr det_raw = det_.backend().data();
    mpz_srcptr piv_raw = piv.backend().data();
    const BigInt* prow = &tableau_[static_cast<size_t>(p) * static_cast<size_t>(ncols)];
    for (int r = 0; r <= m; ++r) {
      const bool is_obj = r == m;
      if (!is_obj && r == p) continue;
      BigInt* row = is_obj ? obj_.data()
                           : &tableau_[static_cast<size_t>(r) * static_cast<size_t>(ncols)];
      mpz_srcptr arq = row[static_cast<size_t>(q)].backend().data();
      const bool col_zero = mpz_sgn(arq) == 0;
      for (int c = 0; c < ncols; ++c) {
        if (c == q) continue;
        const size_t cc = static_cast<size_t>(c);
        if (!update_dead_ && !live_[cc] && vstat_[cc] != VarStatus::Basic) continue;
        mpz_ptr target = row[cc].backend().data();
        if (col_zero) {
          if (mpz_sgn(target) == 0) continue;
          mpz_mul(t1_.backend().data(), target, piv_raw);
          mpz_divexact(target, t1_.backend().data(), det_raw);
        } else {
          mpz_srcptr pc = prow[cc].backend().data();
          mpz_mul(t1_.backend().data(), target, piv_raw);
          if (mpz_sgn(pc) != 0) mpz_submul(t1_.backend().data(), arq, pc);
          if (mpz_sgn(t1_.backend().data()) == 0) mpz_set_ui(target, 0);
          else mpz_divexact(target, t1_.backend().data(), det_raw);
        }
      }
      if (!col_zero) row[static_cast<size_t>(q)] = 0;
    }
    det_ = piv;
  }

  struct Entering {
    int col = -1;
    int direction = 0;  // +1 up from lower bound, -1 down from upper bound
  };

  Entering price() const {
    const int sd = det_.sign();
    Entering best;
    const BigInt* best_mag = nullptr;
    for (int c = 0; c < core_->num_cols(); ++c) {
      const size_t cc = static_cast<size_t>(c);
      if (vstat_[cc] == VarStatus::Basic || !live_[cc]) continue;
      const int so = obj_[cc].sign();
      if (so == 0) continue;
      int dir = 0;
      if (vstat_[cc] == VarStatus::AtLower && so * sd > 0) dir = +1;
      else if (vstat_[cc] == VarStatus::AtUpper && so * sd < 0) dir = -1;
      else continue;
      if (bland_) return {c, dir};
      if (!best_mag || mpz_cmpabs(obj_[cc].backend().data(), best_mag->backend().data()) > 0) {
        best = {c, dir};
        best_mag = &obj_[cc];
      }
    }
    return best;
  }

  // Blocking event of a ratio test. The step length is num/den >= 0 in
  // unnormalized form (den's sign carries the direction algebra); `num`/`den`
  // feed the exact value updates of apply_step.
  struct Blocker {
    bool found = false;
    BigInt num;          // blim * det - ival of the blocking row (pivot case)
    BigInt den;          // lam * (-dir) * W[row][q]  (pivot case)
    bool degenerate = false;
    int kind = 0;        // 0: entering bound flip, 1: basic variable leaves
    int row = -1;
    VarStatus leave_at = VarStatus::AtLower;
    int var = -1;        // variable index, for tie-breaking
  };

  /// Bounded-variable ratio test for entering column q moving in direction
  /// dir. `drive_row` (if >= 0) holds a variable currently outside its
  /// bounds; it blocks at `drive_target` (lam-scaled) instead of its regular
  /// bounds. Comparisons are integer cross-multiplications.
  Blocker ratio_test(int q, int dir, int drive_row = -1,
                     const BigInt* drive_target = nullptr) {
    Blocker best;
    const size_t qq = static_cast<size_t>(q);
    // tn/td: current best step in normalized form (tn >= 0, td > 0).
    BigInt tn, td;
    if (lo_finite_[qq] && hi_finite_[qq]) {
      best.found = true;
      best.kind = 0;
      best.var = q;
      tn = bhi_[qq] - blo_[qq];
      td = lam_;
      best.degenerate = tn == 0;
    }
    const int ds = det_.sign();
    for (int r = 0; r < core_->m; ++r) {
      const BigInt& w = cell(r, q);
      if (w == 0) continue;
      const int bvar = basic_[static_cast<size_t>(r)];
      const size_t bb = static_cast<size_t>(bvar);
      // rate sign of x_basic[r] per unit entering step: -dir * w / det
      const int rate_sign = -dir * w.sign() * ds;
      if (rate_sign == 0) continue;
      const BigInt* blim;
      VarStatus leave_at;
      if (r == drive_row) {
        const BigInt& target = *drive_target;
        // Blocks only when moving toward the violated bound.
        // target vs current: sign(target*det - ival) * ds
        t3_ = target * det_;
        t3_ -= ival_[static_cast<size_t>(r)];
        const int toward = t3_.sign() * ds;  // +1 if target above current value
        if (toward == 0 || toward != rate_sign) continue;
        blim = &target;
        leave_at = (lo_finite_[bb] && target == blo_[bb]) ? VarStatus::AtLower
                                                          : VarStatus::AtUpper;
      } else if (rate_sign > 0) {
        if (!hi_finite_[bb]) continue;
        blim = &bhi_[bb];
        leave_at = VarStatus::AtUpper;
      } else {
        if (!lo_finite_[bb]) continue;
        blim = &blo_[bb];
        leave_at = VarStatus::AtLower;
      }
      // step = (blim * det - ival) / (lam * (-dir) * w), >= 0
      t1_ = *blim * det_;
      t1_ -= ival_[static_cast<size_t>(r)];
      t2_ = lam_ * w;
      if (dir > 0) mpz_neg(t2_.backend().data(), t2_.backend().data());
      // normalize sign: make denominator positive
      if (t2_.sign() < 0) {
        mpz_neg(t1_.backend().data(), t1_.backend().data());
        mpz_neg(t2_.backend().data(), t2_.backend().data());
      }
      assert(t1_.sign() >= 0);
      bool better;
      if (!best.found) {
        better = true;
      } else {
        // t1/t2 < tn/td  <=>  t1*td < tn*t2 (positive denominators)
        t3_ = t1_ * td;
        t4_ = tn * t2_;
        const int cmp = t3_.compare(t4_);
        better = cmp < 0 || (cmp == 0 && bvar < best.var);
      }
      if (better) {
        best.found = true;
        best.kind = 1;
        best.row = r;
        best.leave_at = leave_at;
        best.var = bvar;
        best.degenerate = t1_ == 0;
        tn = t1_;
        td = t2_;
      }
    }
    if (best.found) {
      best.num = std::move(tn);
      best.den = std::move(td);
    }
    return best;
  }

  /// Applies a ratio-test blocking event: exact integer value updates, then
  /// the tableau pivot when a basic variable leaves.
  ///
  /// Pivot case derivations (P = W[p][q], N = step numerator, old det D):
  ///   other rows   ival' = (P * ival + W[r][q] * N) / D
  ///   entering     ival'[p] = P * bound_q - N
  /// Flip case: ival' = ival - dir * (bhi_q - blo_q) * W[r][q].
  void apply_step(int q, int dir, const Blocker& blk) {
    const size_t qq = static_cast<size_t>(q);
    if (!blk.degenerate) {
      degenerate_run_ = 0;
      bland_ = false;
    } else if (++degenerate_run_ > kBlandTrigger) {
      bland_ = true;
    }

    if (blk.kind == 0) {
      // Bound flip: no basis change. ival -= dir * (bhi-blo) * W[r][q].
      t1_ = bhi_[qq] - blo_[qq];
      if (dir > 0) mpz_neg(t1_.backend().data(), t1_.backend().data());
      if (t1_ != 0) {
        for (int r = 0; r < core_->m; ++r) {
          const BigInt& w = cell(r, q);
          if (w == 0) continue;
          ival_[static_cast<size_t>(r)] += t1_ * w;
        }
      }
      vstat_[qq] = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
      return;
    }

    const int p = blk.row;
    const BigInt P = cell(p, q);  // new determinant
    // The normalized num/den differ from the algebraic pair by a common
    // sign; the value updates need the true N, where the algebraic
    // denominator is D = lam * (-dir) * w_p.
    const int den_sign = dir > 0 ? -P.sign() : P.sign();
    t1_ = blk.num;  // normalized numerator (>= 0)
    if (den_sign < 0) mpz_neg(t1_.backend().data(), t1_.backend().data());
    // t1_ now holds the algebraic N.

    const BigInt& bq = nonbasic_value(qq);
    mpz_srcptr det_raw = det_.backend().data();
    for (int r = 0; r < core_->m; ++r) {
      if (r == p) continue;
      const BigInt& w = cell(r, q);
      if (w == 0) {
        // ival' = P * ival / D
        if (ival_[static_cast<size_t>(r)] == 0) continue;
        mpz_mul(t3_.backend().data(), P.backend().data(),
                ival_[static_cast<size_t>(r)].backend().data());
        mpz_divexact(ival_[static_cast<size_t>(r)].backend().data(), t3_.backend().data(),
                     det_raw);
        continue;
      }
      mpz_mul(t3_.backend().data(), P.backend().data(),
              ival_[static_cast<size_t>(r)].backend().data());
      mpz_addmul(t3_.backend().data(), w.backend().data(), t1_.backend().data());
      if (mpz_sgn(t3_.backend().data()) == 0)
        ival_[static_cast<size_t>(r)] = 0;
      else
        mpz_divexact(ival_[static_cast<size_t>(r)].backend().data(), t3_.backend().data(),
                     det_raw);
    }
    // Entering variable's new value in row p.
    t3_ = P * bq;
    t3_ -= t1_;
    ival_[static_cast<size_t>(p)] = t3_;

    const int leaving = basic_[static_cast<size_t>(p)];
    const size_t ll = static_cast<size_t>(leaving);
    pivot(p, q);
    basic_[static_cast<size_t>(p)] = q;
    rowof_[qq] = p;
    rowof_[ll] = -1;
    vstat_[qq] = VarStatus::Basic;
    vstat_[ll] = blk.leave_at;
    if (lo_finite_[ll] && hi_finite_[ll] && blo_[ll] == bhi_[ll]) live_[ll] = 0;
  }

  LpStatus iterate() {
    for (;;) {
      const Entering e = price();
      if (e.col < 0) return LpStatus::Optimal;
      const Blocker blk = ratio_test(e.col, e.direction);
      if (!blk.found) return LpStatus::Unbounded;
      apply_step(e.col, e.direction, blk);
    }
  }

  /// Textbook artificial-variable phase 1: recruit an artificial for every
  /// row whose slack starts outside its bounds, then drive the total
  /// artificial magnitude to zero.
  LpStatus phase_one() {
    const int n = core_->n, m = core_->m;
    std::vector<int> art_sign(static_cast<size_t>(m), 0);
    int violated = 0;
    const int ds = det_.sign();
    for (int j = 0; j < m; ++j) {
      if (basic_within_bounds(j)) continue;
      const size_t s = static_cast<size_t>(n + j);
      ++violated;
      const size_t a = static_cast<size_t>(n + m + j);
      // Park the slack at the bound it violates; the artificial carries the
      // residual with a one-sided bound so that driving it to zero restores
      // the row.
      t1_ = blo_[s] * det_;
      const bool below =
          lo_finite_[s] && ival_[static_cast<size_t>(j)].compare(t1_) * ds < 0;
      const BigInt& target = below ? blo_[s] : bhi_[s];
      // residual (lam*det-scaled) = ival - target*det
      t2_ = target * det_;
      ival_[static_cast<size_t>(j)] -= t2_;
      vstat_[s] = below ? VarStatus::AtLower : VarStatus::AtUpper;
      rowof_[s] = -1;
      xchg_basic(j, static_cast<int>(a));
      live_[a] = 1;
      const int res_sign = ival_[static_cast<size_t>(j)].sign() * ds;
      if (res_sign > 0) {
        hi_finite_[a] = 0;  // g in [0, inf)
        art_sign[static_cast<size_t>(j)] = 1;
      } else {
        lo_finite_[a] = 0;  // g in (-inf, 0]
        art_sign[static_cast<size_t>(j)] = -1;
      }
    }
    if (violated == 0) return LpStatus::Optimal;

    // Maximize -sum_j sign_j * g_j. With c1 zero except c1[g_j] = -sign_j and
    // the artificials basic: obj_[c] = det * c1[c] + sum_j sign_j * W[j][c].
    for (int c = 0; c < core_->num_cols(); ++c) {
      BigInt acc = 0;
      for (int j = 0; j < m; ++j) {
        const int sg = art_sign[static_cast<size_t>(j)];
        if (sg == 0) continue;
        const BigInt& w = cell(j, c);
        if (w == 0) continue;
        if (sg > 0) acc += w;
        else acc -= w;
      }
      obj_[static_cast<size_t>(c)] = std::move(acc);
    }
    for (int j = 0; j < m; ++j) {
      const int sg = art_sign[static_cast<size_t>(j)];
      if (sg == 0) continue;
      obj_[static_cast<size_t>(n + m + j)] -= det_ * BigInt(sg);
    }
    obj_fresh_ = false;
    degenerate_run_ = 0;
    bland_ = false;

    for (;;) {
      bool any_infeasible = false;
      for (int j = 0; j < m; ++j) {
        if (art_sign[static_cast<size_t>(j)] == 0) continue;
        const size_t a = static_cast<size_t>(n + m + j);
        const int row = rowof_[a];
        if (row >= 0 && ival_[static_cast<size_t>(row)] != 0) { any_infeasible = true; break; }
      }
      if (!any_infeasible) break;
      const Entering e = price();
      if (e.col < 0) return LpStatus::Infeasible;
      const Blocker blk = ratio_test(e.col, e.direction);
      if (!blk.found) throw std::logic_error("phase 1 unbounded");
      apply_step(e.col, e.direction, blk);
    }

    // Feasible: pin every artificial to zero. Nonbasic ones go dead.
    for (int j = 0; j < m; ++j) {
      if (art_sign[static_cast<size_t>(j)] == 0) continue;
      const size_t a = static_cast<size_t>(n + m + j);
      blo_[a] = 0;
      bhi_[a] = 0;
      lo_finite_[a] = 1;
      hi_finite_[a] = 1;
      if (vstat_[a] != VarStatus::Basic) live_[a] = 0;
    }
    return LpStatus::Optimal;
  }

  /// Swaps the basic variable of `row` for column `col` without touching the
  /// tableau (valid only when both columns are identical, as slack and
  /// artificial of the same row are).
  void xchg_basic(int row, int col) {
    basic_[static_cast<size_t>(row)] = col;
    rowof_[static_cast<size_t>(col)] = row;
    vstat_[static_cast<size_t>(col)] = VarStatus::Basic;
  }

  LpStatus phase_two() {
    if (!obj_fresh_) rebuild_objective_row();
    degenerate_run_ = 0;
    bland_ = false;
    return iterate();
  }

  /// Drives one out-of-bounds basic variable back into its range, keeping
  /// every other variable feasible; equivalent to primal simplex maximizing
  /// the violated variable (or its negation).
  LpStatus restore_basic_variable(int var) {
    const size_t v = static_cast<size_t>(var);
    degenerate_run_ = 0;
    bland_ = false;

    for (;;) {
      const int drive_row = rowof_[v];
      assert(drive_row >= 0);
      if (basic_within_bounds(drive_row)) return LpStatus::Optimal;
      const int ds = det_.sign();  // pivots can flip the determinant sign
      // Below lower bound? (sign-aware comparison)
      t1_ = blo_[v] * det_;
      const bool below =
          lo_finite_[v] && ival_[static_cast<size_t>(drive_row)].compare(t1_) * ds < 0;
      const BigInt& target = below ? blo_[v] : bhi_[v];
      const int want = below ? +1 : -1;

      int best_col = -1, best_dir = 0;
      const BigInt* best_mag = nullptr;
      for (int c = 0; c < core_->num_cols(); ++c) {
        const size_t cc = static_cast<size_t>(c);
        if (vstat_[cc] == VarStatus::Basic || !live_[cc]) continue;
        const BigInt& w = cell(drive_row, c);
        if (w == 0) continue;
        const int rate_sign_up = -w.sign() * ds;  // d x_var / d x_c at dir +1
        int dir = 0;
        if (vstat_[cc] == VarStatus::AtLower && rate_sign_up == want) dir = +1;
        else if (vstat_[cc] == VarStatus::AtUpper && -rate_sign_up == want) dir = -1;
        else continue;
        if (bland_) { best_col = c; best_dir = dir; break; }
        if (!best_mag || mpz_cmpabs(w.backend().data(), best_mag->backend().data()) > 0) {
          best_col = c;
          best_dir = dir;
          best_mag = &w;
        }
      }
      if (best_col < 0) return LpStatus::Infeasible;

      const Blocker blk = ratio_test(best_col, best_dir, drive_row, &target);
      if (!blk.found) throw std::logic_error("restore: unblocked ray");
      const bool var_leaves = blk.kind == 1 && blk.row == drive_row;
      apply_step(best_col, best_dir, blk);
      if (var_leaves) return LpStatus::Optimal;
    }
  }
};

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

inline LpOutcome outcome_from_state(const SimplexState& state) {
  LpOutcome out;
  out.status = state.status();
  if (out.status == LpStatus::Optimal) {
    out.value = state.objective_value();
    out.point = state.point();
    out.basis = state.structural_basis();
  }
  return out;
}

/// Exact LP solve. Deterministic: fixed pivot rules, no tolerances.
inline LpOutcome solve_lp(const LpProblem& problem) {
  auto core = std::make_shared<detail::LpCore>(detail::LpCore::build(problem.instance));
  SimplexState state(core);
  state.solve_cold(problem.lower, problem.upper);
  return outcome_from_state(state);
}

/// One bound-fixing: variable `var` restricted to [lo, hi].
struct BoundFix {
  int var = 0;
  Rational lo;
  Rational hi;
};

/// Solves the problem restricted to each listed face, in order.
inline std::vector<LpOutcome> vertex_table(const LpProblem& problem,
                                           const std::vector<std::vector<BoundFix>>& faces) {
  std::vector<LpOutcome> out;
  out.reserve(faces.size());
  for (const auto& face : faces) {
    LpProblem p = problem;
    for (const BoundFix& fix : face) p = p.with_bounds(fix.var, fix.lo, fix.hi);
    out.push_back(solve_lp(p));
  }
  return out;
}

}  // namespace bnblab
