#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bnblab/model.hpp"
#include "bnblab/rational.hpp"

namespace bnblab {

/// SplitMix64 stream. Fixed algorithm so generated instances are identical on
/// every platform; see gen_mkp for the draw protocol.
struct SplitMix64 {
  uint64_t state = 0;
  explicit SplitMix64(uint64_t seed) : state(seed) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

struct MkpConfig {
  int n = 20;
  int m = 50;
  uint64_t seed = 1;
  Rational zero_prob = Rational(1, 4);
  int weight_max = 1000;
  Rational capacity_ratio = Rational(1, 2);
  int64_t price_resolution = 1000000000;

  void check() const {
    if (n < 1 || m < 1) throw std::invalid_argument("mkp: n and m must be >= 1");
    if (zero_prob < 0 || zero_prob >= 1)
      throw std::invalid_argument("mkp: zero_prob must lie in [0, 1)");
    if (weight_max < 1) throw std::invalid_argument("mkp: weight_max must be >= 1");
    if (price_resolution < 1) throw std::invalid_argument("mkp: price_resolution must be >= 1");
  }
};

/// Seeded multi-dimensional knapsack generator.
///
/// Draw protocol (one SplitMix64 stream seeded with config.seed):
///   1. prices: for i = 0..n-1, c_i = (next() mod price_resolution) / price_resolution
///   2. weights, row by row: for each j, for each i, draw u = next(); the weight
///      is 0 when u < floor(zero_prob * 2^64), else 1 + (next() mod weight_max)
///   3. capacities: b_j = floor(capacity_ratio * sum_i a_ji)
inline MipInstance gen_mkp(const MkpConfig& config) {
  config.check();
  SplitMix64 rng(config.seed);
  MipInstance inst;
  inst.name = "mkp-n" + std::to_string(config.n) + "-m" + std::to_string(config.m) +
              "-seed" + std::to_string(config.seed);

  inst.variables.reserve(static_cast<size_t>(config.n));
  for (int i = 0; i < config.n; ++i)
    inst.variables.push_back({i, Rational(0), Rational(1), true, "x" + std::to_string(i + 1)});

  for (int i = 0; i < config.n; ++i) {
    const uint64_t k = rng.next() % static_cast<uint64_t>(config.price_resolution);
    if (k != 0) inst.objective[i] = Rational(BigInt(k), BigInt(config.price_resolution));
  }

  // floor(zero_prob * 2^64); zero_prob < 1 keeps this inside uint64.
  BigInt threshold_big = (numerator(config.zero_prob) << 64) / denominator(config.zero_prob);
  const uint64_t zero_threshold = threshold_big.convert_to<uint64_t>();

  for (int j = 0; j < config.m; ++j) {
    LinearConstraint row;
    row.label = "knap" + std::to_string(j + 1);
    row.sense = Sense::LessEqual;
    BigInt weight_sum = 0;
    for (int i = 0; i < config.n; ++i) {
      const uint64_t u = rng.next();
      if (u < zero_threshold) continue;
      const uint64_t w = 1 + rng.next() % static_cast<uint64_t>(config.weight_max);
      row.coefficients[i] = Rational(w);
      weight_sum += w;
    }
    row.rhs = floor_rational(config.capacity_ratio * Rational(weight_sum));
    inst.constraints.push_back(std::move(row));
  }
  return inst;
}

/// The two-variable pair of formulations behind the exponential-blow-up family.
/// tight=false: box [0,1]^2 with rows -7x+y <= 0.3, 5x+8y <= 8.5, 3x+2y <= 3.7.
/// tight=true adds the single valid cut 13x+10y <= 14. Objective max 6x+5y.
inline MipInstance build_two_dim(bool tight) {
  MipInstance inst;
  inst.name = tight ? "two-dim-tight" : "two-dim-loose";
  inst.variables.push_back({0, Rational(0), Rational(1), true, "x"});
  inst.variables.push_back({1, Rational(0), Rational(1), true, "y"});
  inst.objective[0] = Rational(6);
  inst.objective[1] = Rational(5);

  inst.constraints.push_back({{{0, Rational(-7)}, {1, Rational(1)}},
                              Sense::LessEqual, Rational(3, 10), "c1"});
  inst.constraints.push_back({{{0, Rational(5)}, {1, Rational(8)}},
                              Sense::LessEqual, Rational(17, 2), "c2"});
  inst.constraints.push_back({{{0, Rational(3)}, {1, Rational(2)}},
                              Sense::LessEqual, Rational(37, 10), "c3"});
  if (tight)
    inst.constraints.push_back({{{0, Rational(13)}, {1, Rational(10)}},
                                Sense::LessEqual, Rational(14), "cut"});
  return inst;
}

/// n independent copies of the two-dimensional problem coupled through one
/// continuous variable z: 13x_i + 10y_i <= z for every copy, with z bounded
/// above by 16.7 (loose) or by the valid cut value 14 (tight).
inline MipInstance build_qn(int n, bool tight) {
  if (n < 1) throw std::invalid_argument("build_qn: n must be >= 1");
  MipInstance inst;
  inst.name = (tight ? std::string("qn-tight-") : std::string("qn-loose-")) + std::to_string(n);

  for (int i = 0; i < n; ++i)
    inst.variables.push_back({i, Rational(0), Rational(1), true, "x" + std::to_string(i + 1)});
  for (int i = 0; i < n; ++i)
    inst.variables.push_back({n + i, Rational(0), Rational(1), true, "y" + std::to_string(i + 1)});
  // Rows 13x_i + 10y_i <= z force z >= 0 at every feasible point, so the
  // explicit lower bound of 0 does not cut the relaxation.
  const int zvar = 2 * n;
  inst.variables.push_back({zvar, Rational(0), tight ? Rational(14) : Rational(167, 10),
                            false, "z"});

  for (int i = 0; i < n; ++i) {
    inst.objective[i] = Rational(6);
    inst.objective[n + i] = Rational(5);
    const std::string suffix = std::to_string(i + 1);
    inst.constraints.push_back({{{i, Rational(-7)}, {n + i, Rational(1)}},
                                Sense::LessEqual, Rational(3, 10), "c1_" + suffix});
    inst.constraints.push_back({{{i, Rational(5)}, {n + i, Rational(8)}},
                                Sense::LessEqual, Rational(17, 2), "c2_" + suffix});
    inst.constraints.push_back({{{i, Rational(3)}, {n + i, Rational(2)}},
                                Sense::LessEqual, Rational(37, 10), "c3_" + suffix});
    inst.constraints.push_back({{{i, Rational(13)}, {n + i, Rational(10)}, {zvar, Rational(-1)}},
                                Sense::LessEqual, Rational(0), "link_" + suffix});
  }
  return inst;
}

/// Cross-polytope-style family in an extended formulation: binary x_1..x_4 tied
/// to convex weights over an explicit vertex list. tight=true uses the twelve
/// vertices whose fractional coordinate rotates through x_1, x_2, x_3;
/// tight=false adds the extra vertex (1, 1, 1, 1/2). Neither variant contains
/// an integral point. Objective max x_1 + x_2 + x_3 + (1 - eps) x_4.
inline MipInstance build_cross(bool tight, const Rational& eps = Rational(1, 100)) {
  if (eps <= 0 || eps >= 1) throw std::invalid_argument("build_cross: eps must lie in (0, 1)");
  MipInstance inst;
  inst.name = tight ? "cross-tight" : "cross-loose";

  std::vector<std::array<Rational, 4>> vertices;
  const Rational half(1, 2);
  for (int b2 = 0; b2 <= 1; ++b2)
    for (int b3 = 0; b3 <= 1; ++b3)
      vertices.push_back({half, Rational(b2), Rational(b3), Rational(0)});
  for (int b1 = 0; b1 <= 1; ++b1)
    for (int b3 = 0; b3 <= 1; ++b3)
      vertices.push_back({Rational(b1), half, Rational(b3), Rational(1)});
  for (int b1 = 0; b1 <= 1; ++b1)
    for (int b2 = 0; b2 <= 1; ++b2)
      vertices.push_back({Rational(b1), Rational(b2), half, Rational(1)});
  if (!tight)
    vertices.push_back({Rational(1), Rational(1), Rational(1), half});

  for (int k = 0; k < 4; ++k)
    inst.variables.push_back({k, Rational(0), Rational(1), true, "x" + std::to_string(k + 1)});
  for (size_t v = 0; v < vertices.size(); ++v)
    inst.variables.push_back({static_cast<int>(4 + v), Rational(0), Rational(1), false,
                              "lam" + std::to_string(v + 1)});

  for (int k = 0; k < 4; ++k) {
    LinearConstraint row;
    row.label = "def_x" + std::to_string(k + 1);
    row.sense = Sense::Equal;
    row.rhs = Rational(0);
    row.coefficients[k] = Rational(1);
    for (size_t v = 0; v < vertices.size(); ++v)
      if (vertices[v][static_cast<size_t>(k)] != 0)
        row.coefficients[static_cast<int>(4 + v)] = -vertices[v][static_cast<size_t>(k)];
    inst.constraints.push_back(std::move(row));
  }
  LinearConstraint convex;
  convex.label = "convex";
  convex.sense = Sense::Equal;
  convex.rhs = Rational(1);
  for (size_t v = 0; v < vertices.size(); ++v)
    convex.coefficients[static_cast<int>(4 + v)] = Rational(1);
  inst.constraints.push_back(std::move(convex));

  inst.objective[0] = Rational(1);
  inst.objective[1] = Rational(1);
  inst.objective[2] = Rational(1);
  inst.objective[3] = Rational(1) - eps;
  return inst;
}

}  // namespace bnblab
