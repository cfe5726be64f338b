#include <catch2/catch_amalgamated.hpp>

#include "bnblab/instance_io.hpp"
#include "bnblab/instances.hpp"

using namespace bnblab;

TEST_CASE("gen_mkp is deterministic in the seed") {
  const MipInstance a = gen_mkp({.n = 20, .m = 50, .seed = 7});
  const MipInstance b = gen_mkp({.n = 20, .m = 50, .seed = 7});
  CHECK(serialize_instance(a) == serialize_instance(b));
  const MipInstance c = gen_mkp({.n = 20, .m = 50, .seed = 8});
  CHECK(serialize_instance(a) != serialize_instance(c));
}

TEST_CASE("gen_mkp rows satisfy the capacity construction") {
  const MipInstance inst = gen_mkp({.n = 15, .m = 30, .seed = 3});
  REQUIRE(inst.constraints.size() == 30);
  for (const auto& row : inst.constraints) {
    Rational weight_sum = 0;
    for (const auto& [var, coef] : row.coefficients) {
      CHECK(coef >= 1);
      CHECK(coef <= 1000);
      CHECK(is_integer(coef));
      weight_sum += coef;
    }
    CHECK(row.rhs >= 0);
    CHECK(row.rhs <= weight_sum);
    CHECK(row.rhs == floor_rational(weight_sum / 2));
  }
  for (const auto& [var, coef] : inst.objective) {
    CHECK(coef >= 0);
    CHECK(coef < 1);
    CHECK(denominator(coef) <= 1000000000);
  }
}

TEST_CASE("gen_mkp zero fraction matches the configured probability") {
  // 10^4 weight draws; zero count should sit near 1/4.
  int zeros = 0, total = 0;
  for (uint64_t seed = 1; seed <= 25; ++seed) {
    const MipInstance inst = gen_mkp({.n = 20, .m = 20, .seed = 1000 + seed});
    for (const auto& row : inst.constraints) {
      total += 20;
      zeros += 20 - static_cast<int>(row.coefficients.size());
    }
  }
  REQUIRE(total == 10000);
  const double frac = static_cast<double>(zeros) / total;
  CHECK(frac >= 0.24);
  CHECK(frac <= 0.26);
}

TEST_CASE("two-dim family encodes the stated data exactly") {
  const MipInstance loose = build_two_dim(false);
  CHECK(loose.constraints.size() == 3);
  CHECK(loose.constraints[0].coefficients.at(0) == -7);
  CHECK(loose.constraints[0].rhs == Rational(3, 10));
  CHECK(loose.constraints[1].rhs == Rational(17, 2));
  CHECK(loose.constraints[2].rhs == Rational(37, 10));
  CHECK(loose.objective.at(0) == 6);
  CHECK(loose.objective.at(1) == 5);

  const MipInstance tight = build_two_dim(true);
  REQUIRE(tight.constraints.size() == 4);
  CHECK(tight.constraints[3].coefficients.at(0) == 13);
  CHECK(tight.constraints[3].coefficients.at(1) == 10);
  CHECK(tight.constraints[3].rhs == 14);
}

TEST_CASE("qn family shape") {
  const int n = 4;
  const MipInstance loose = build_qn(n, false);
  CHECK(loose.num_variables() == 2 * n + 1);
  CHECK(loose.constraints.size() == static_cast<size_t>(4 * n));
  int integers = 0;
  for (const auto& v : loose.variables) integers += v.is_integer ? 1 : 0;
  CHECK(integers == 2 * n);
  CHECK(loose.variables.back().upper == Rational(167, 10));
  CHECK(build_qn(n, true).variables.back().upper == 14);
}

TEST_CASE("cross family shape") {
  const MipInstance tight = build_cross(true);
  const MipInstance loose = build_cross(false);
  CHECK(tight.num_variables() == 4 + 12);
  CHECK(loose.num_variables() == 4 + 13);
  CHECK(tight.constraints.size() == 5);
  CHECK(loose.constraints.size() == 5);
  for (const auto& con : tight.constraints) CHECK(con.sense == Sense::Equal);
  CHECK(loose.objective.at(3) == Rational(99, 100));
  CHECK_THROWS_AS(build_cross(true, Rational(0)), std::invalid_argument);
  CHECK_THROWS_AS(build_cross(true, Rational(1)), std::invalid_argument);
}
