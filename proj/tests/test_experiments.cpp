#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bnblab/engine.hpp"
#include "bnblab/experiments.hpp"
#include "bnblab/instances.hpp"

using namespace bnblab;

namespace {

EngineOptions product_opts() {
  EngineOptions o;
  o.rule = BranchRule::FsbProduct;
  o.workers = 1;
  return o;
}

void check_arithmetic(const ExperimentRecord& rec) {
  CHECK(rec.z_hat <= rec.z);
  CHECK(rec.z_ip <= rec.z_hat);
  if (rec.z != rec.z_ip) {
    REQUIRE(rec.delta_g.has_value());
    const double g = to_double((rec.z - rec.z_hat) / (rec.z - rec.z_ip));
    CHECK(std::abs(*rec.delta_g - g) < 1e-12);
    CHECK(*rec.delta_g >= 0.0);
    CHECK(*rec.delta_g <= 1.0);
  } else {
    CHECK_FALSE(rec.delta_g.has_value());
  }
  const double t = static_cast<double>(rec.tree_size_hat - rec.tree_size) /
                   static_cast<double>(rec.tree_size);
  CHECK(std::abs(rec.delta_t - t) < 1e-12);
}

}  // namespace

TEST_CASE("single-cut records carry consistent arithmetic") {
  const MipInstance inst = gen_mkp({.n = 12, .m = 10, .seed = 1});
  const auto records = single_cut_experiment(inst, product_opts(), 1);
  REQUIRE_FALSE(records.empty());
  for (const auto& rec : records) {
    CHECK(rec.mode == "single-cut");
    CHECK(rec.rule == "fsb-product");
    CHECK(rec.seed == 1);
    REQUIRE(rec.round_or_cut.has_value());
    REQUIRE(rec.delta_d.has_value());
    CHECK(*rec.delta_d > 0);
    check_arithmetic(rec);
  }
}

TEST_CASE("no violated covers means no single-cut records") {
  MipInstance trivial;
  trivial.name = "trivial";
  trivial.variables.push_back({0, Rational(0), Rational(1), true, "x"});
  trivial.constraints.push_back({{{0, Rational(1)}}, Sense::LessEqual, Rational(1), "r"});
  trivial.objective[0] = Rational(1);
  CHECK(single_cut_experiment(trivial, product_opts()).empty());
}

TEST_CASE("all-cuts record matches an independent re-solve") {
  const MipInstance inst = gen_mkp({.n = 12, .m = 10, .seed = 2});
  const ExperimentRecord rec = all_cuts_experiment(inst, product_opts(), 2);
  CHECK(rec.mode == "all-cuts");
  CHECK_FALSE(rec.round_or_cut.has_value());
  CHECK_FALSE(rec.delta_d.has_value());
  check_arithmetic(rec);

  // T_hat equals the node count of the tightened instance solved directly.
  const LpOutcome root =
      solve_lp(LpProblem::relaxation_of(std::make_shared<MipInstance>(inst)));
  const auto cuts = find_all_covers(inst, root.point);
  const BnbResult direct = solve(apply_cuts(inst, cuts), product_opts());
  CHECK(rec.tree_size_hat == direct.node_count);
  CHECK(rec.z_hat == *direct.root_lp_value);
}

TEST_CASE("rounds records are monotone in the closed gap") {
  const MipInstance inst = gen_mkp({.n = 12, .m = 10, .seed = 3});
  const auto records = rounds_experiment(inst, product_opts(), 4, 3);
  REQUIRE_FALSE(records.empty());
  CHECK(records[0].round_or_cut == 0);
  CHECK(records[0].z_hat == records[0].z);
  CHECK(records[0].delta_t == 0.0);
  if (records[0].delta_g) CHECK(*records[0].delta_g == 0.0);
  for (size_t k = 0; k < records.size(); ++k) {
    CHECK(records[k].mode == "rounds");
    CHECK(records[k].round_or_cut == static_cast<int>(k));
    check_arithmetic(records[k]);
    if (k > 0) {
      CHECK(records[k].z_hat <= records[k - 1].z_hat);
      if (records[k].delta_g && records[k - 1].delta_g)
        CHECK(*records[k].delta_g >= *records[k - 1].delta_g);
    }
  }
}

TEST_CASE("summarize fractions and buckets") {
  std::vector<ExperimentRecord> records(4);
  for (auto& r : records) {
    r.z = 10;
    r.z_ip = 5;
    r.tree_size = 100;
  }
  records[0].delta_t = 0.5;
  records[0].delta_g = 0.05;
  records[1].delta_t = -0.5;
  records[1].delta_g = 0.3;
  records[2].delta_t = -0.25;
  records[2].delta_g = 0.3;
  records[3].delta_t = 0.0;
  records[3].delta_g = 1.0;
  records[3].mode = "rounds";

  const Summary s = summarize(records);
  CHECK(s.count == 4);
  CHECK(s.fraction_increased == 0.25);
  CHECK(s.fraction_decreased == 0.5);
  CHECK(s.fraction_unchanged == 0.25);
  CHECK(s.buckets[0].count == 1);
  CHECK(s.buckets[1].count == 0);
  CHECK(s.buckets[2].count == 2);
  CHECK(std::abs(s.buckets[2].mean_delta_t + 0.375) < 1e-15);
  CHECK(std::abs(s.buckets[2].median_delta_t + 0.375) < 1e-15);
  CHECK(s.buckets[3].count == 1);
  REQUIRE(s.max_single_round_delta_t.has_value());
  CHECK(*s.max_single_round_delta_t == 0.0);
  CHECK_THROWS_AS(summarize({}), std::invalid_argument);

  const std::string report = summary_report(s);
  CHECK(report.find("records: 4") != std::string::npos);

  std::vector<ExperimentRecord> flat(3);
  for (auto& r : flat) r.delta_t = 0.0;
  CHECK(summarize(flat).fraction_unchanged == 1.0);
}

TEST_CASE("csv round trip preserves every field") {
  const MipInstance inst = gen_mkp({.n = 12, .m = 10, .seed = 4});
  auto records = single_cut_experiment(inst, product_opts(), 4);
  records.push_back(all_cuts_experiment(inst, product_opts(), 4));
  const std::string csv = records_to_csv(records);
  CHECK(csv.rfind(kCsvHeader, 0) == 0);

  const auto back = records_from_csv(csv);
  REQUIRE(back.size() == records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].instance == records[i].instance);
    CHECK(back[i].seed == records[i].seed);
    CHECK(back[i].rule == records[i].rule);
    CHECK(back[i].mode == records[i].mode);
    CHECK(back[i].round_or_cut == records[i].round_or_cut);
    CHECK(back[i].z == records[i].z);
    CHECK(back[i].z_hat == records[i].z_hat);
    CHECK(back[i].z_ip == records[i].z_ip);
    CHECK(back[i].tree_size == records[i].tree_size);
    CHECK(back[i].tree_size_hat == records[i].tree_size_hat);
  }
  // Serialization is canonical.
  CHECK(records_to_csv(back) == csv);
  CHECK_THROWS_AS(records_from_csv("bad header\n"), std::invalid_argument);
}

TEST_CASE("batch runs are reproducible and order-stable") {
  BatchConfig config;
  config.n = 10;
  config.m = 6;
  config.seed_begin = 1;
  config.seed_end = 3;
  config.max_rounds = 2;
  config.workers = 2;

  const BatchOutput a = run_mkp_batch(config);
  config.workers = 1;
  const BatchOutput b = run_mkp_batch(config);
  CHECK(a.excluded_seeds == b.excluded_seeds);
  CHECK(records_to_csv(a.records) == records_to_csv(b.records));
  REQUIRE_FALSE(a.records.empty());

  // Records arrive sorted by seed, then mode in run order.
  uint64_t last_seed = 0;
  for (const auto& rec : a.records) {
    CHECK(rec.seed >= last_seed);
    last_seed = rec.seed;
  }
}

TEST_CASE("tiny node caps exclude instances") {
  BatchConfig config;
  config.n = 10;
  config.m = 6;
  config.seed_begin = 1;
  config.seed_end = 2;
  config.node_cap = 3;
  config.workers = 1;
  const BatchOutput out = run_mkp_batch(config);
  CHECK(out.excluded_seeds == std::vector<uint64_t>{1, 2});
  CHECK(out.records.empty());
}
