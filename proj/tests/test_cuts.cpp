#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "bnblab/brute_force.hpp"
#include "bnblab/cuts.hpp"
#include "bnblab/instances.hpp"
#include "bnblab/lp.hpp"

using namespace bnblab;

namespace {

MipInstance two_item_row(const Rational& rhs) {
  MipInstance inst;
  inst.name = "pair";
  inst.variables.push_back({0, Rational(0), Rational(1), true, "x1"});
  inst.variables.push_back({1, Rational(0), Rational(1), true, "x2"});
  inst.constraints.push_back({{{0, Rational(2)}, {1, Rational(2)}},
                              Sense::LessEqual, rhs, "cap"});
  inst.objective[0] = Rational(3, 4);
  inst.objective[1] = Rational(3, 4);
  return inst;
}

}  // namespace

TEST_CASE("separation on the two-item knapsack") {
  const MipInstance inst = two_item_row(Rational(3));

  // x* = (3/4, 3/4): the only cover is {x1, x2} with d* = 3/2 - 2 + 1 = 1/2.
  const auto hit = separate_cover(inst, 0, {Rational(3, 4), Rational(3, 4)});
  REQUIRE(hit.kind == SeparationResult::Kind::Cut);
  CHECK(hit.cut->cover == std::set<int>{0, 1});
  CHECK(hit.cut->violation == Rational(1, 2));
  CHECK(hit.cut->source_label == "cap");
  const LinearConstraint row = hit.cut->as_constraint("c");
  CHECK(row.rhs == 1);
  CHECK(row.coefficients.size() == 2);

  // x* = (1, 0): d* = 1 + 0 - 2 + 1 = 0, not violated.
  const auto miss = separate_cover(inst, 0, {Rational(1), Rational(0)});
  CHECK(miss.kind == SeparationResult::Kind::NoViolatedCover);
  CHECK_FALSE(miss.cut.has_value());
}

TEST_CASE("redundant rows have no cover at all") {
  // Total weight 4 <= capacity 5: the separation IP is infeasible.
  const auto r = separate_cover(two_item_row(Rational(5)), 0, {Rational(1), Rational(1)});
  CHECK(r.kind == SeparationResult::Kind::RedundantRow);
}

TEST_CASE("separation rejects rows outside its preconditions") {
  MipInstance inst = two_item_row(Rational(3));
  inst.constraints[0].sense = Sense::GreaterEqual;
  CHECK_THROWS_AS(separate_cover(inst, 0, {Rational(1), Rational(1)}), std::invalid_argument);

  inst = two_item_row(Rational(3));
  inst.constraints[0].coefficients[0] = Rational(1, 2);
  CHECK_THROWS_AS(separate_cover(inst, 0, {Rational(1), Rational(1)}), std::invalid_argument);

  inst = two_item_row(Rational(3));
  inst.variables[1].is_integer = false;
  CHECK_THROWS_AS(separate_cover(inst, 0, {Rational(1), Rational(1)}), std::invalid_argument);

  CHECK_THROWS_AS(separate_cover(inst, 5, {Rational(1), Rational(1)}), std::out_of_range);
}

TEST_CASE("find_all_covers deduplicates identical covers") {
  MipInstance inst = two_item_row(Rational(3));
  inst.constraints.push_back(inst.constraints[0]);
  inst.constraints[1].label = "cap2";
  const auto cuts = find_all_covers(inst, {Rational(3, 4), Rational(3, 4)});
  REQUIRE(cuts.size() == 1);
  CHECK(cuts[0].source_label == "cap");
}

TEST_CASE("no violated cover exists at an integral feasible point") {
  const MipInstance inst = gen_mkp({.n = 10, .m = 8, .seed = 21});
  const OptResult opt = brute_force_opt(inst);
  REQUIRE(opt.optimal());
  CHECK(find_all_covers(inst, opt.point).empty());
}

TEST_CASE("apply_cuts appends rows and leaves the input alone") {
  const MipInstance inst = gen_mkp({.n = 12, .m = 10, .seed = 2});
  CHECK(apply_cuts(inst, {}).constraints.size() == inst.constraints.size());

  CoverCut cut;
  cut.cover = {0, 1};
  cut.source_label = "knap1";
  cut.violation = Rational(1, 2);
  const MipInstance with = apply_cuts(inst, {cut});
  CHECK(inst.constraints.size() == 10);
  REQUIRE(with.constraints.size() == 11);
  CHECK(with.constraints[10].rhs == 1);
  CHECK(with.constraints[10].coefficients.at(0) == 1);
  CHECK(with.constraints[10].coefficients.at(1) == 1);
  CHECK(validate(with).empty());
}

TEST_CASE("cut depth formula") {
  CoverCut cut;
  cut.cover = {0, 1};
  cut.violation = Rational(1, 2);
  const double d = cut_depth(cut, {Rational(3, 4), Rational(3, 4)});
  CHECK(std::abs(d - 0.5 / std::sqrt(2.0)) < 1e-12);

  CoverCut four;
  four.cover = {0, 1, 2, 3};
  // violation 1 over a size-4 cover: depth 1/2.
  const std::vector<Rational> x(4, Rational(1));  // sum 4, rhs 3 -> violation 1
  CHECK(std::abs(cut_depth(four, x) - 0.5) < 1e-12);

  CHECK_THROWS_AS(cut_depth(cut, {Rational(1), Rational(0)}), std::invalid_argument);
}

TEST_CASE("generated cuts are sound and valid") {
  for (uint64_t seed = 1; seed <= 6; ++seed) {
    const MipInstance inst = gen_mkp({.n = 12, .m = 10, .seed = seed});
    const LpOutcome root = solve_lp(LpProblem::relaxation_of(std::make_shared<MipInstance>(inst)));
    REQUIRE(root.status == LpStatus::Optimal);
    const auto cuts = find_all_covers(inst, root.point);
    const auto integer_points = enumerate_integer_points(inst);
    for (const CoverCut& cut : cuts) {
      // Soundness: violated at x* by exactly d*.
      Rational violation = Rational(1) - static_cast<int64_t>(cut.cover.size());
      for (int i : cut.cover) violation += root.point[static_cast<size_t>(i)];
      CHECK(violation == cut.violation);
      CHECK(cut.violation > 0);
      // Depth identity: depth * sqrt(|C|) == d* up to real conversion.
      CHECK(std::abs(cut_depth(cut, root.point) *
                         std::sqrt(static_cast<double>(cut.cover.size())) -
                     to_double(cut.violation)) < 1e-9);
      // The cover really exceeds its row's capacity.
      const LinearConstraint* source = nullptr;
      for (const auto& con : inst.constraints)
        if (con.label == cut.source_label) source = &con;
      REQUIRE(source != nullptr);
      Rational weight = 0;
      for (int i : cut.cover) weight += source->coefficients.at(i);
      CHECK(weight >= source->rhs + 1);
      // Validity: every integer-feasible point satisfies the cut.
      const LinearConstraint as_row = cut.as_constraint("check");
      for (const auto& point : integer_points) CHECK(satisfies(as_row, point));
    }
    // Tightening: the LP value never increases when the cuts are added.
    if (!cuts.empty()) {
      const LpOutcome after = solve_lp(
          LpProblem::relaxation_of(std::make_shared<MipInstance>(apply_cuts(inst, cuts))));
      REQUIRE(after.status == LpStatus::Optimal);
      CHECK(after.value <= root.value);
    }
  }
}

TEST_CASE("rounds of cuts tighten monotonically and stop early") {
  // Integral root: a single round, nothing separates.
  MipInstance trivial;
  trivial.name = "trivial";
  trivial.variables.push_back({0, Rational(0), Rational(1), true, "x"});
  trivial.constraints.push_back({{{0, Rational(1)}}, Sense::LessEqual, Rational(1), "r"});
  trivial.objective[0] = Rational(1);
  CHECK(rounds_of_cuts(trivial, 5).size() == 1);

  const MipInstance inst = gen_mkp({.n = 12, .m = 10, .seed = 1});
  const auto rounds = rounds_of_cuts(inst, 3);
  REQUIRE(rounds.size() >= 2);
  CHECK(rounds.size() <= 4);
  Rational prev;
  for (size_t k = 0; k < rounds.size(); ++k) {
    CHECK(validate(rounds[k]).empty());
    const LpOutcome lp =
        solve_lp(LpProblem::relaxation_of(std::make_shared<MipInstance>(rounds[k])));
    REQUIRE(lp.status == LpStatus::Optimal);
    if (k > 0) {
      CHECK(lp.value <= prev);
      CHECK(rounds[k].constraints.size() > rounds[k - 1].constraints.size());
    }
    prev = lp.value;
  }
  CHECK_THROWS_AS(rounds_of_cuts(inst, -1), std::invalid_argument);
}
