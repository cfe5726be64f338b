#include <catch2/catch_amalgamated.hpp>

#include <memory>
#include <sstream>

#include "bnblab/instances.hpp"
#include "bnblab/lp.hpp"
#include "bnblab/model.hpp"
#include "lp_enum_oracle.hpp"

using namespace bnblab;

namespace {

LpProblem relax(const MipInstance& inst) {
  return LpProblem::relaxation_of(std::make_shared<MipInstance>(inst));
}

bool point_feasible(const LpProblem& p, const std::vector<Rational>& x) {
  for (size_t i = 0; i < x.size(); ++i)
    if (x[i] < p.lower[i] || x[i] > p.upper[i]) return false;
  for (const auto& con : p.instance->constraints)
    if (!satisfies(con, x)) return false;
  return true;
}

}  // namespace

TEST_CASE("trivial box LP") {
  MipInstance inst;
  inst.name = "box";
  inst.variables.push_back({0, Rational(0), Rational(1), false, "x"});
  inst.objective[0] = Rational(1);
  const LpOutcome out = solve_lp(relax(inst));
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.value == 1);
  CHECK(out.point == std::vector<Rational>{Rational(1)});
}

TEST_CASE("two-dim root relaxations hit the stated vertices") {
  const LpOutcome loose = solve_lp(relax(build_two_dim(false)));
  REQUIRE(loose.status == LpStatus::Optimal);
  CHECK(loose.value == Rational(79, 10));
  CHECK(loose.point == std::vector<Rational>{Rational(9, 10), Rational(1, 2)});

  const LpOutcome tight = solve_lp(relax(build_two_dim(true)));
  REQUIRE(tight.status == LpStatus::Optimal);
  CHECK(tight.value == Rational(27, 4));
  CHECK(tight.point == std::vector<Rational>{Rational(1, 2), Rational(3, 4)});
}

TEST_CASE("two-dim with both variables fixed to 1 is infeasible") {
  // 5 + 8 = 13 > 8.5
  LpProblem p = relax(build_two_dim(false));
  p = p.with_bounds(0, Rational(1), Rational(1));
  p = p.with_bounds(1, Rational(1), Rational(1));
  CHECK(solve_lp(p).status == LpStatus::Infeasible);
}

TEST_CASE("vertex table reproduces the face optima") {
  const LpProblem loose = relax(build_two_dim(false));
  const auto faces = std::vector<std::vector<BoundFix>>{
      {{0, Rational(0), Rational(0)}},   // x = 0 -> E
      {{0, Rational(1), Rational(1)}},   // x = 1 -> B
      {{1, Rational(0), Rational(0)}},   // y = 0 -> C
      {{1, Rational(1), Rational(1)}},   // y = 1 -> D
  };
  const auto table = vertex_table(loose, faces);
  REQUIRE(table.size() == 4);
  CHECK(table[0].value == Rational(3, 2));
  CHECK(table[0].point == std::vector<Rational>{Rational(0), Rational(3, 10)});
  CHECK(table[1].value == Rational(31, 4));
  CHECK(table[1].point == std::vector<Rational>{Rational(1), Rational(7, 20)});
  CHECK(table[2].value == Rational(6));
  CHECK(table[2].point == std::vector<Rational>{Rational(1), Rational(0)});
  CHECK(table[3].value == Rational(28, 5));
  CHECK(table[3].point == std::vector<Rational>{Rational(1, 10), Rational(1)});

  // Independent enumeration oracle agrees on every face.
  for (size_t f = 0; f < faces.size(); ++f) {
    LpProblem face = loose;
    for (const auto& fix : faces[f]) face = face.with_bounds(fix.var, fix.lo, fix.hi);
    const auto oracle = bnblab_test::enumerate_lp_optimum(face);
    REQUIRE(oracle.feasible);
    CHECK(oracle.value == table[f].value);
  }

  const LpProblem tight = relax(build_two_dim(true));
  const auto tight_table = vertex_table(tight, {{{0, Rational(1), Rational(1)}}});
  CHECK(tight_table[0].value == Rational(13, 2));
  CHECK(tight_table[0].point == std::vector<Rational>{Rational(1), Rational(1, 10)});

  // Infeasible faces propagate their status.
  const auto dead_face = vertex_table(
      loose, {{{0, Rational(1), Rational(1)}, {1, Rational(1), Rational(1)}}});
  CHECK(dead_face[0].status == LpStatus::Infeasible);
}

TEST_CASE("monotone tightening never raises the LP value") {
  CHECK(solve_lp(relax(build_two_dim(true))).value <
        solve_lp(relax(build_two_dim(false))).value);
}

TEST_CASE("qn root values scale linearly") {
  for (int n = 1; n <= 4; ++n) {
    const LpOutcome loose = solve_lp(relax(build_qn(n, false)));
    REQUIRE(loose.status == LpStatus::Optimal);
    CHECK(loose.value == Rational(79, 10) * n);
    const LpOutcome tight = solve_lp(relax(build_qn(n, true)));
    REQUIRE(tight.status == LpStatus::Optimal);
    CHECK(tight.value == Rational(27, 4) * n);
    for (int i = 0; i < n; ++i) {
      CHECK(loose.point[static_cast<size_t>(i)] == Rational(9, 10));
      CHECK(loose.point[static_cast<size_t>(n + i)] == Rational(1, 2));
      CHECK(tight.point[static_cast<size_t>(i)] == Rational(1, 2));
      CHECK(tight.point[static_cast<size_t>(n + i)] == Rational(3, 4));
    }
  }
}

TEST_CASE("cross-family root relaxations") {
  const Rational eps(1, 100);
  const LpOutcome loose = solve_lp(relax(build_cross(false, eps)));
  REQUIRE(loose.status == LpStatus::Optimal);
  CHECK(loose.value == Rational(7, 2) - eps / 2);
  CHECK(loose.point[0] == 1);
  CHECK(loose.point[1] == 1);
  CHECK(loose.point[2] == 1);
  CHECK(loose.point[3] == Rational(1, 2));

  const LpOutcome tight = solve_lp(relax(build_cross(true, eps)));
  REQUIRE(tight.status == LpStatus::Optimal);
  CHECK(tight.value == Rational(7, 2) - eps);
  // Two optimal vertices exist; whichever is returned, exactly one of
  // x2, x3 is one half and x4 = 1.
  CHECK(tight.point[3] == 1);
  const bool x2_frac = tight.point[1] == Rational(1, 2);
  const bool x3_frac = tight.point[2] == Rational(1, 2);
  CHECK(x2_frac != x3_frac);
}

TEST_CASE("optimal points satisfy every constraint exactly") {
  const auto check = [&](const MipInstance& inst) {
    const LpProblem p = relax(inst);
    const LpOutcome out = solve_lp(p);
    REQUIRE(out.status == LpStatus::Optimal);
    CHECK(point_feasible(p, out.point));
    CHECK(eval_expr(inst.objective, out.point) == out.value);
  };
  check(build_two_dim(false));
  check(build_qn(3, true));
  check(build_cross(false, Rational(1, 100)));
  check(gen_mkp({.n = 12, .m = 8, .seed = 5}));
}

TEST_CASE("solver matches the vertex enumeration oracle on random LPs") {
  SplitMix64 rng(2024);
  int optimal_seen = 0, infeasible_seen = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 2 + static_cast<int>(rng.next() % 3);       // 2..4 variables
    const int m = 1 + static_cast<int>(rng.next() % 6);       // 1..6 rows
    MipInstance inst;
    inst.name = "rand" + std::to_string(trial);
    for (int i = 0; i < n; ++i) {
      const Rational lo(static_cast<int64_t>(rng.next() % 3) - 1);
      const Rational hi = lo + Rational(static_cast<int64_t>(rng.next() % 3));
      inst.variables.push_back({i, lo, hi, false, "v" + std::to_string(i)});
    }
    for (int j = 0; j < m; ++j) {
      LinearConstraint con;
      con.label = "r" + std::to_string(j);
      for (int i = 0; i < n; ++i) {
        const int64_t c = static_cast<int64_t>(rng.next() % 11) - 5;
        if (c != 0) con.coefficients[i] = Rational(c);
      }
      const uint64_t s = rng.next() % 10;
      con.sense = s < 5 ? Sense::LessEqual : (s < 8 ? Sense::GreaterEqual : Sense::Equal);
      con.rhs = Rational(static_cast<int64_t>(rng.next() % 21) - 10, 2);
      if (con.coefficients.empty()) continue;
      inst.constraints.push_back(std::move(con));
    }
    for (int i = 0; i < n; ++i) {
      const int64_t c = static_cast<int64_t>(rng.next() % 11) - 5;
      if (c != 0) inst.objective[i] = Rational(c);
    }

    const LpProblem p = relax(inst);
    const LpOutcome got = solve_lp(p);
    const auto oracle = bnblab_test::enumerate_lp_optimum(p);
    if (got.status == LpStatus::Optimal) {
      ++optimal_seen;
      REQUIRE(oracle.feasible);
      CHECK(got.value == oracle.value);
      CHECK(point_feasible(p, got.point));
    } else {
      ++infeasible_seen;
      REQUIRE(got.status == LpStatus::Infeasible);
      CHECK_FALSE(oracle.feasible);
    }
  }
  // The generator should exercise both verdicts.
  CHECK(optimal_seen > 20);
  CHECK(infeasible_seen > 20);
}

TEST_CASE("repeated solves are identical including the basis") {
  const LpProblem p = relax(gen_mkp({.n = 15, .m = 20, .seed = 11}));
  const LpOutcome a = solve_lp(p);
  const LpOutcome b = solve_lp(p);
  REQUIRE(a.status == b.status);
  CHECK(a.value == b.value);
  CHECK(a.point == b.point);
  CHECK(a.basis == b.basis);
}

TEST_CASE("with_bounds enforces tightening") {
  const LpProblem p = relax(build_two_dim(false));
  CHECK_THROWS_AS(p.with_bounds(0, Rational(-1), Rational(1)), std::invalid_argument);
  CHECK_THROWS_AS(p.with_bounds(0, Rational(0), Rational(2)), std::invalid_argument);
  // Crossed ranges are allowed and come back infeasible.
  const LpProblem crossed = p.with_bounds(0, Rational(1), Rational(0));
  CHECK(solve_lp(crossed).status == LpStatus::Infeasible);
}

TEST_CASE("warm re-solve after one bound change matches a cold solve") {
  SplitMix64 rng(31337);
  int checked = 0;
  for (uint64_t seed = 1; seed <= 12; ++seed) {
    const auto inst = std::make_shared<MipInstance>(gen_mkp({.n = 12, .m = 10, .seed = seed}));
    auto core = std::make_shared<detail::LpCore>(detail::LpCore::build(inst));
    const LpProblem root = LpProblem::relaxation_of(inst);

    SimplexState parent(core);
    REQUIRE(parent.solve_cold(root.lower, root.upper) == LpStatus::Optimal);

    // Branch every fractional variable both ways, warm vs cold.
    const auto basis = parent.structural_basis();
    for (int i = 0; i < inst->num_variables(); ++i) {
      const Rational v = parent.value_of(i);
      if (is_integer(v)) continue;
      REQUIRE(basis[static_cast<size_t>(i)] == VarStatus::Basic);
      for (int up = 0; up <= 1; ++up) {
        const Rational lo = up ? ceil_rational(v) : root.lower[static_cast<size_t>(i)];
        const Rational hi = up ? root.upper[static_cast<size_t>(i)] : floor_rational(v);
        SimplexState warm = parent;
        const LpStatus ws = warm.resolve_tighten(i, lo, hi);

        SimplexState cold(core);
        auto clo = root.lower;
        auto chi = root.upper;
        clo[static_cast<size_t>(i)] = lo;
        chi[static_cast<size_t>(i)] = hi;
        const LpStatus cs = cold.solve_cold(clo, chi);

        REQUIRE(ws == cs);
        if (ws == LpStatus::Optimal) {
          CHECK(warm.objective_value() == cold.objective_value());
          CHECK(warm.point() == cold.point());
        }
        ++checked;
      }
    }
  }
  CHECK(checked >= 40);
}

TEST_CASE("tableau dump is printable") {
  const auto inst = std::make_shared<MipInstance>(build_two_dim(false));
  auto core = std::make_shared<detail::LpCore>(detail::LpCore::build(inst));
  SimplexState state(core);
  REQUIRE(state.solve_cold({Rational(0), Rational(0)}, {Rational(1), Rational(1)}) ==
          LpStatus::Optimal);
  std::ostringstream os;
  state.dump(os);
  const std::string text = os.str();
  CHECK(text.find("det =") != std::string::npos);
  CHECK(text.find("basic") != std::string::npos);
  CHECK(text.find("obj |") != std::string::npos);
}

TEST_CASE("refactorize rebuilds an equivalent tableau") {
  const auto inst = std::make_shared<MipInstance>(gen_mkp({.n = 12, .m = 10, .seed = 4}));
  auto core = std::make_shared<detail::LpCore>(detail::LpCore::build(inst));
  const LpProblem root = LpProblem::relaxation_of(inst);

  SimplexState solved(core);
  REQUIRE(solved.solve_cold(root.lower, root.upper) == LpStatus::Optimal);

  SimplexState rebuilt(core);
  rebuilt.refactorize(root.lower, root.upper, solved.basic_columns(), solved.full_status());
  CHECK(rebuilt.objective_value() == solved.objective_value());
  CHECK(rebuilt.point() == solved.point());

  // The rebuilt state warm-solves children identically.
  for (int i = 0; i < inst->num_variables(); ++i) {
    const Rational v = solved.value_of(i);
    if (is_integer(v)) continue;
    SimplexState a = solved;
    SimplexState b = rebuilt;
    const LpStatus sa = a.resolve_tighten(i, ceil_rational(v), root.upper[static_cast<size_t>(i)]);
    const LpStatus sb = b.resolve_tighten(i, ceil_rational(v), root.upper[static_cast<size_t>(i)]);
    REQUIRE(sa == sb);
    if (sa == LpStatus::Optimal) {
      CHECK(a.objective_value() == b.objective_value());
      CHECK(a.point() == b.point());
    }
    break;
  }
}
