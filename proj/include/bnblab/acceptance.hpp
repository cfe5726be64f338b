#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bnblab/brute_force.hpp"
#include "bnblab/cuts.hpp"
#include "bnblab/engine.hpp"
#include "bnblab/experiments.hpp"
#include "bnblab/instances.hpp"
#include "bnblab/lp.hpp"

namespace bnblab {

// Verification suite: every check this artifact is expected to reproduce,
// one criterion per numbered runner. Pass/fail is decided by the exact
// assertions inside; the stated runtime budgets steer how far the scalable
// criteria go (criterion 4 caps its family size once over budget, never
// below n = 18).

struct AcceptanceConfig {
  std::set<int> only;              // empty: run all criteria
  std::string artifacts_dir;       // optional output directory for CSV dumps
  int workers = 0;                 // 0: BNBLAB_WORKERS / 1
  double blowup_budget_seconds = 1800;  // criterion 4
  uint64_t batch_seed_begin = 1;   // criterion 8 protocol (spec: 1..100)
  uint64_t batch_seed_end = 100;
  int batch_n = 20;
  int batch_m = 50;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;      // human summary of what was measured
  std::string canonical;   // deterministic transcript, used by criterion 10
  double seconds = 0;
};

namespace detail {

struct Failure {
  std::ostringstream why;
  bool failed = false;
  template <typename T>
  void expect(bool ok, const T& msg) {
    if (ok) return;
    if (failed) why << "; ";
    why << msg;
    failed = true;
  }
};

inline EngineOptions engine_opts(BranchRule rule, bool keep_tree = false, int workers = 1) {
  EngineOptions o;
  o.rule = rule;
  o.keep_tree = keep_tree;
  o.workers = workers;
  return o;
}

inline int64_t blowup_lower_bound(int n) {
  // 6 (2^floor(n/9) - 1)
  return 6 * ((int64_t(1) << (n / 9)) - 1);
}

}  // namespace detail

// --- 1. Cross-polytope tree sizes: 11 loose, 15 tight, for every
//        fractional-variable rule. -------------------------------------------
inline CriterionResult criterion_cross_tree_sizes(const AcceptanceConfig&) {
  CriterionResult res{1, "cross-polytope tree sizes (11 / 15)"};
  detail::Failure f;
  std::ostringstream canon;
  for (BranchRule rule : {BranchRule::FsbProduct, BranchRule::FsbLinear, BranchRule::FsbRatio,
                          BranchRule::MostFractional}) {
    const BnbResult loose = solve(build_cross(false), detail::engine_opts(rule));
    const BnbResult tight = solve(build_cross(true), detail::engine_opts(rule));
    canon << rule_name(rule) << " loose " << loose.node_count << " "
          << (loose.status == BnbResult::Status::Infeasible ? "infeasible" : "feasible")
          << " tight " << tight.node_count << " "
          << (tight.status == BnbResult::Status::Infeasible ? "infeasible" : "feasible")
          << "\n";
    f.expect(loose.status == BnbResult::Status::Infeasible,
             std::string(rule_name(rule)) + ": loose formulation not proven infeasible");
    f.expect(tight.status == BnbResult::Status::Infeasible,
             std::string(rule_name(rule)) + ": tight formulation not proven infeasible");
    f.expect(loose.node_count == 11, std::string(rule_name(rule)) + ": loose tree has " +
                                         std::to_string(loose.node_count) + " nodes, want 11");
    f.expect(tight.node_count == 15, std::string(rule_name(rule)) + ": tight tree has " +
                                         std::to_string(tight.node_count) + " nodes, want 15");
  }
  res.passed = !f.failed;
  res.detail = f.failed ? f.why.str() : "all four rules: infeasible with 11 and 15 nodes";
  res.canonical = canon.str();
  return res;
}

// --- 2. Exact root score tables of the two-variable pair. -------------------
inline CriterionResult criterion_root_scores(const AcceptanceConfig&) {
  CriterionResult res{2, "root product-score tables (exact rationals)"};
  detail::Failure f;
  std::ostringstream canon;
  const auto table_of = [&](bool tight) {
    auto inst = std::make_shared<MipInstance>(build_two_dim(tight));
    const LpProblem p = LpProblem::relaxation_of(inst);
    const LpOutcome root = solve_lp(p);
    return select_branch_var(p, BranchRule::FsbProduct, root).table;
  };
  const auto loose = table_of(false);
  const auto tight = table_of(true);
  const auto score_of = [](const std::vector<CandidateScore>& table, int var) {
    for (const auto& c : table)
      if (c.var == var) return c.score.key;
    return Rational(-1);
  };
  canon << "loose x " << to_string(score_of(loose, 0)) << " y " << to_string(score_of(loose, 1))
        << "\n"
        << "tight x " << to_string(score_of(tight, 0)) << " y " << to_string(score_of(tight, 1))
        << "\n";
  f.expect(score_of(loose, 0) == Rational(24, 25), "loose score(x) != 0.96");
  f.expect(score_of(loose, 1) == Rational(437, 100), "loose score(y) != 4.37");
  f.expect(score_of(tight, 0) == Rational(21, 16), "tight score(x) != 1.3125");
  f.expect(score_of(tight, 1) == Rational(69, 80), "tight score(y) != 0.8625");
  res.passed = !f.failed;
  res.detail = f.failed ? f.why.str()
                        : "loose {x: 24/25, y: 437/100}, tight {x: 21/16, y: 69/80}";
  res.canonical = canon.str();
  return res;
}

// --- 3. Linear node-count growth of the loose coupled family. ---------------
inline CriterionResult criterion_linear_growth(const AcceptanceConfig& config) {
  CriterionResult res{3, "loose coupled family grows linearly (<= 4n + 1)"};
  detail::Failure f;
  std::ostringstream canon;
  for (int n = 1; n <= 8; ++n) {
    const BnbResult r = solve(build_qn(n, false),
                              detail::engine_opts(BranchRule::FsbProduct, false,
                                                  std::max(1, config.workers)));
    canon << "n " << n << " nodes " << r.node_count << "\n";
    f.expect(r.status == BnbResult::Status::Optimal,
             "n=" + std::to_string(n) + ": not solved");
    f.expect(r.node_count <= 4 * n + 1,
             "n=" + std::to_string(n) + ": " + std::to_string(r.node_count) + " nodes > " +
                 std::to_string(4 * n + 1));
  }
  res.passed = !f.failed;
  res.detail = f.failed ? f.why.str() : "node counts within 4n + 1 for n = 1..8";
  res.canonical = canon.str();
  return res;
}

// --- 4. Exponential blow-up of the tight coupled family and
//        non-monotonicity. ---------------------------------------------------
inline CriterionResult criterion_blowup(const AcceptanceConfig& config) {
  CriterionResult res{4, "tight coupled family blows up (non-monotonicity)"};
  detail::Failure f;
  std::ostringstream canon;
  const auto start = std::chrono::steady_clock::now();
  int reached = 0;
  for (int n = 1; n <= 24; ++n) {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (n > 18 && elapsed > config.blowup_budget_seconds) break;
    const BnbResult loose = solve(build_qn(n, false),
                                  detail::engine_opts(BranchRule::FsbProduct, false,
                                                      std::max(1, config.workers)));
    const BnbResult tight = solve(build_qn(n, true),
                                  detail::engine_opts(BranchRule::FsbProduct, false,
                                                      std::max(1, config.workers)));
    canon << "n " << n << " loose " << loose.node_count << " tight " << tight.node_count
          << "\n";
    const int64_t bound = detail::blowup_lower_bound(n);
    f.expect(tight.node_count >= bound,
             "n=" + std::to_string(n) + ": tight " + std::to_string(tight.node_count) +
                 " < lower bound " + std::to_string(bound));
    f.expect(tight.node_count > loose.node_count,
             "n=" + std::to_string(n) + ": tight tree not larger than loose");
    if (n == 1) {
      f.expect(loose.node_count == 3, "n=1: loose tree should have 3 nodes");
      f.expect(tight.node_count == 5, "n=1: tight tree should have 5 nodes");
    }
    reached = n;
  }
  f.expect(reached >= 18, "budget exhausted before n = 18");
  res.passed = !f.failed;
  res.detail = f.failed ? f.why.str()
                        : "verified through n = " + std::to_string(reached) +
                              (reached < 24 ? " (budget cap)" : "");
  res.canonical = canon.str();
  return res;
}

// --- 5. LP landmark values of the coupled family. ---------------------------
inline CriterionResult criterion_lp_landmarks(const AcceptanceConfig& config) {
  CriterionResult res{5, "coupled-family LP landmarks (7.9n / 6.75n / 6n)"};
  detail::Failure f;
  std::ostringstream canon;
  for (int n = 1; n <= 8; ++n) {
    const LpOutcome loose =
        solve_lp(LpProblem::relaxation_of(std::make_shared<MipInstance>(build_qn(n, false))));
    const LpOutcome tight =
        solve_lp(LpProblem::relaxation_of(std::make_shared<MipInstance>(build_qn(n, true))));
    const BnbResult opt = solve(build_qn(n, true),
                                detail::engine_opts(BranchRule::FsbProduct, false,
                                                    std::max(1, config.workers)));
    canon << "n " << n << " loose_lp " << to_string(loose.value) << " tight_lp "
          << to_string(tight.value) << " tight_ip " << to_string(opt.incumbent.value) << "\n";
    f.expect(loose.status == LpStatus::Optimal && loose.value == Rational(79, 10) * n,
             "n=" + std::to_string(n) + ": loose root LP != 7.9n");
    f.expect(tight.status == LpStatus::Optimal && tight.value == Rational(27, 4) * n,
             "n=" + std::to_string(n) + ": tight root LP != 6.75n");
    f.expect(opt.status == BnbResult::Status::Optimal && opt.incumbent.value == 6 * n,
             "n=" + std::to_string(n) + ": tight integer optimum != 6n");
  }
  res.passed = !f.failed;
  res.detail = f.failed ? f.why.str() : "all landmark values exact for n = 1..8";
  res.canonical = canon.str();
  return res;
}

// --- 6. Loose trees act as certificates for the tight formulations. ---------
inline CriterionResult criterion_certificates(const AcceptanceConfig&) {
  CriterionResult res{6, "loose trees replay as certificates on tight formulations"};
  detail::Failure f;
  std::ostringstream canon;
  const auto check = [&](const std::string& name, const MipInstance& loose,
                         const MipInstance& tight) {
    const BnbResult r = solve(loose, detail::engine_opts(BranchRule::FsbProduct, true));
    const ReplayResult replay = replay_certificate(r.tree, tight);
    canon << name << " nodes " << r.node_count << " replayed " << replay.replay_node_count
          << " verified " << (replay.verified ? 1 : 0) << "\n";
    f.expect(replay.verified, name + ": replay did not verify");
  };
  check("two-dim", build_two_dim(false), build_two_dim(true));
  check("coupled-3", build_qn(3, false), build_qn(3, true));
  check("cross", build_cross(false), build_cross(true));
  res.passed = !f.failed;
  res.detail = f.failed ? f.why.str() : "all three families verified by replay";
  res.canonical = canon.str();
  return res;
}

// --- 7. Engine vs exhaustive oracle, and cut validity by enumeration. -------
inline CriterionResult criterion_oracle_equivalence(const AcceptanceConfig&) {
  CriterionResult res{7, "oracle equivalence and cut validity on 50 seeded knapsacks"};
  detail::Failure f;
  std::ostringstream canon;
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    const MipInstance inst = gen_mkp({.n = 12, .m = 10, .seed = seed});
    const BnbResult engine = solve(inst, detail::engine_opts(BranchRule::FsbProduct));
    const OptResult oracle = brute_force_opt(inst);
    canon << "seed " << seed << " engine " << to_string(engine.incumbent.value) << " oracle "
          << (oracle.optimal() ? to_string(oracle.value) : "infeasible");
    f.expect(engine.status == BnbResult::Status::Optimal && oracle.optimal(),
             "seed " + std::to_string(seed) + ": solver disagreement on feasibility");
    f.expect(engine.incumbent.value == oracle.value,
             "seed " + std::to_string(seed) + ": engine optimum != oracle optimum");

    const LpOutcome root =
        solve_lp(LpProblem::relaxation_of(std::make_shared<MipInstance>(inst)));
    const auto cuts = find_all_covers(inst, root.point);
    const auto points = enumerate_integer_points(inst);
    int valid = 0;
    for (const CoverCut& cut : cuts) {
      const LinearConstraint row = cut.as_constraint("check");
      bool ok = true;
      for (const auto& point : points)
        if (!satisfies(row, point)) ok = false;
      if (ok) ++valid;
    }
    canon << " cuts " << cuts.size() << " valid " << valid << "\n";
    f.expect(valid == static_cast<int>(cuts.size()),
             "seed " + std::to_string(seed) + ": a cover cut excludes a feasible point");
  }
  res.passed = !f.failed;
  res.detail = f.failed ? f.why.str() : "engine == oracle and every cut valid on 50 seeds";
  res.canonical = canon.str();
  return res;
}

// --- 8. Knapsack batch statistics (the desk-scale replication). -------------
inline CriterionResult criterion_batch_statistics(const AcceptanceConfig& config) {
  CriterionResult res{8, "knapsack batch statistics (single / all / rounds)"};
  detail::Failure f;
  BatchConfig batch;
  batch.n = config.batch_n;
  batch.m = config.batch_m;
  batch.seed_begin = config.batch_seed_begin;
  batch.seed_end = config.batch_seed_end;
  batch.rule = BranchRule::FsbProduct;
  batch.max_rounds = 10;
  batch.node_cap = 1000000;
  batch.workers = config.workers;
  const BatchOutput out = run_mkp_batch(batch);

  int64_t single_total = 0, single_up = 0;
  int64_t all_up = 0;
  int64_t big_gap_count = 0;
  double big_gap_sum = 0;
  for (const ExperimentRecord& rec : out.records) {
    if (rec.mode == "single-cut") {
      ++single_total;
      if (rec.delta_t > 0) ++single_up;
    }
    if (rec.mode == "all-cuts" && rec.delta_t > 0) ++all_up;
    if (rec.delta_g && *rec.delta_g > 0.20) {
      ++big_gap_count;
      big_gap_sum += rec.delta_t;
    }
  }
  const double frac_up =
      single_total > 0 ? static_cast<double>(single_up) / static_cast<double>(single_total) : -1;
  const double big_gap_mean = big_gap_count > 0 ? big_gap_sum / big_gap_count : 0;

  f.expect(single_total > 0, "no single-cut records at all");
  f.expect(frac_up >= 0.05 && frac_up <= 0.40,
           "single-cut increase fraction " + format_real(frac_up) + " outside [0.05, 0.40]");
  f.expect(all_up >= 1, "no instance grew under all-cuts");
  f.expect(big_gap_count > 0, "no records closed more than 20% of the gap");
  f.expect(big_gap_mean < 0, "mean delta_T beyond the 20% gap threshold is " +
                                 format_real(big_gap_mean) + ", expected negative");

  std::ostringstream canon;
  canon << records_to_csv(out.records);
  canon << "excluded:";
  for (uint64_t s : out.excluded_seeds) canon << " " << s;
  canon << "\n";
  char line[256];
  std::snprintf(line, sizeof line,
                "single_up_fraction %.12g all_cuts_up %lld big_gap_records %lld "
                "big_gap_mean_delta_T %.12g\n",
                frac_up, static_cast<long long>(all_up),
                static_cast<long long>(big_gap_count), big_gap_mean);
  canon << line;
  res.canonical = canon.str();

  if (!config.artifacts_dir.empty()) {
    std::filesystem::create_directories(config.artifacts_dir);
    write_csv_file(out.records, config.artifacts_dir + "/mkp_batch.csv");
    std::ofstream sum(config.artifacts_dir + "/mkp_batch_summary.txt");
    sum << summary_report(summarize(out.records)) << line;
    if (!out.excluded_seeds.empty()) {
      sum << "excluded seeds (node cap):";
      for (uint64_t s : out.excluded_seeds) sum << " " << s;
      sum << "\n";
    }
  }

  std::ostringstream d;
  d << "single-cut increase fraction " << format_real(frac_up) << ", all-cuts increases "
    << all_up << ", mean delta_T past 20% gap " << format_real(big_gap_mean) << " over "
    << big_gap_count << " records";
  if (!out.excluded_seeds.empty()) {
    d << ", excluded seeds:";
    for (uint64_t s : out.excluded_seeds) d << " " << s;
  }
  if (f.failed) d << " | " << f.why.str();
  res.detail = d.str();
  res.passed = !f.failed;
  return res;
}

// --- 9. CSV arithmetic reproduces the stored metrics. -----------------------
inline CriterionResult criterion_csv_arithmetic(const AcceptanceConfig&) {
  CriterionResult res{9, "harness metrics recomputable from raw CSV columns"};
  detail::Failure f;
  BatchConfig batch;
  batch.n = 12;
  batch.m = 10;
  batch.seed_begin = 1;
  batch.seed_end = 5;
  batch.max_rounds = 3;
  batch.workers = 1;
  const BatchOutput out = run_mkp_batch(batch);
  const std::string csv = records_to_csv(out.records);
  const auto parsed = records_from_csv(csv);
  f.expect(!parsed.empty(), "empty batch");

  // Per-seed regenerated cut lists for the depth identity.
  std::map<uint64_t, std::pair<std::vector<CoverCut>, std::vector<Rational>>> cuts_by_seed;
  for (const ExperimentRecord& rec : parsed) {
    if (rec.delta_g) {
      const double g = to_double((rec.z - rec.z_hat) / (rec.z - rec.z_ip));
      f.expect(std::abs(g - *rec.delta_g) <= 1e-9, "delta_G mismatch in " + rec.instance);
    } else {
      f.expect(rec.z == rec.z_ip, "missing delta_G despite a gap in " + rec.instance);
    }
    const double t = static_cast<double>(rec.tree_size_hat - rec.tree_size) /
                     static_cast<double>(rec.tree_size);
    f.expect(std::abs(t - rec.delta_t) <= 1e-9, "delta_T mismatch in " + rec.instance);
    if (rec.mode == "single-cut") {
      f.expect(rec.delta_d.has_value(), "single-cut record without delta_d");
      auto it = cuts_by_seed.find(rec.seed);
      if (it == cuts_by_seed.end()) {
        const MipInstance inst = gen_mkp({.n = 12, .m = 10, .seed = rec.seed});
        const LpOutcome root =
            solve_lp(LpProblem::relaxation_of(std::make_shared<MipInstance>(inst)));
        it = cuts_by_seed
                 .emplace(rec.seed, std::make_pair(find_all_covers(inst, root.point),
                                                   root.point))
                 .first;
      }
      const auto& [cuts, point] = it->second;
      const size_t k = static_cast<size_t>(*rec.round_or_cut);
      f.expect(k < cuts.size(), "cut index out of range in " + rec.instance);
      if (k < cuts.size() && rec.delta_d) {
        const double d = to_double(cuts[k].violation) /
                         std::sqrt(static_cast<double>(cuts[k].cover.size()));
        f.expect(std::abs(d - *rec.delta_d) <= 1e-9, "delta_d mismatch in " + rec.instance);
        f.expect(std::abs(cut_depth(cuts[k], point) - *rec.delta_d) <= 1e-9,
                 "depth identity mismatch in " + rec.instance);
      }
    }
  }
  res.passed = !f.failed;
  res.detail = f.failed ? f.why.str()
                        : "delta_G, delta_T, delta_d reproduced to 1e-9 from " +
                              std::to_string(parsed.size()) + " records";
  res.canonical = csv;
  return res;
}

// --- 10. Determinism: criteria 1..8 repeat byte-identically. -----------------
inline CriterionResult criterion_determinism(const AcceptanceConfig& config,
                                             const std::vector<CriterionResult>& first_pass) {
  CriterionResult res{10, "criteria 1..8 repeat byte-identically"};
  detail::Failure f;
  std::ostringstream canon;

  const auto rerun = [&](int id) -> CriterionResult {
    switch (id) {
      case 1: return criterion_cross_tree_sizes(config);
      case 2: return criterion_root_scores(config);
      case 3: return criterion_linear_growth(config);
      case 4: return criterion_blowup(config);
      case 5: return criterion_lp_landmarks(config);
      case 6: return criterion_certificates(config);
      case 7: return criterion_oracle_equivalence(config);
      case 8: return criterion_batch_statistics(config);
      default: throw std::logic_error("rerun: bad id");
    }
  };

  for (int id = 1; id <= 8; ++id) {
    std::string baseline;
    for (const CriterionResult& r : first_pass)
      if (r.id == id) baseline = r.canonical;
    if (baseline.empty() && id == 8 && !config.artifacts_dir.empty()) {
      // A previous process may have left the batch transcript behind.
      std::ifstream in(config.artifacts_dir + "/criterion8_canonical.txt");
      if (in) {
        std::stringstream buf;
        buf << in.rdbuf();
        baseline = buf.str();
      }
    }
    const CriterionResult again = rerun(id);
    if (baseline.empty()) {
      // Standalone invocation: run twice ourselves.
      const CriterionResult once_more = rerun(id);
      f.expect(again.canonical == once_more.canonical,
               "criterion " + std::to_string(id) + " output differs between runs");
      canon << "criterion " << id << " repeated " << (again.canonical == once_more.canonical)
            << "\n";
    } else {
      f.expect(again.canonical == baseline,
               "criterion " + std::to_string(id) + " output differs between runs");
      canon << "criterion " << id << " repeated " << (again.canonical == baseline) << "\n";
    }
  }
  res.passed = !f.failed;
  res.detail = f.failed ? f.why.str() : "all eight criteria reproduced byte-identically";
  res.canonical = canon.str();
  return res;
}

// ---------------------------------------------------------------------------

inline std::vector<CriterionResult> run_acceptance(const AcceptanceConfig& config,
                                                   std::ostream& log) {
  const auto wants = [&](int id) { return config.only.empty() || config.only.count(id) > 0; };
  std::vector<CriterionResult> results;

  const auto run_one = [&](auto&& fn, int id) {
    if (!wants(id)) return;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r = fn(config);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log << "criterion " << r.id << " [" << (r.passed ? "PASS" : "FAIL") << "] " << r.name
        << ": " << r.detail << " (" << format_real(r.seconds) << "s)" << std::endl;
    if (r.id == 8 && !config.artifacts_dir.empty()) {
      std::filesystem::create_directories(config.artifacts_dir);
      std::ofstream out(config.artifacts_dir + "/criterion8_canonical.txt");
      out << r.canonical;
    }
    results.push_back(std::move(r));
  };

  run_one(criterion_cross_tree_sizes, 1);
  run_one(criterion_root_scores, 2);
  run_one(criterion_linear_growth, 3);
  run_one(criterion_blowup, 4);
  run_one(criterion_lp_landmarks, 5);
  run_one(criterion_certificates, 6);
  run_one(criterion_oracle_equivalence, 7);
  run_one(criterion_batch_statistics, 8);
  run_one(criterion_csv_arithmetic, 9);
  if (wants(10)) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r = criterion_determinism(config, results);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log << "criterion " << r.id << " [" << (r.passed ? "PASS" : "FAIL") << "] " << r.name
        << ": " << r.detail << " (" << format_real(r.seconds) << "s)" << std::endl;
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace bnblab
