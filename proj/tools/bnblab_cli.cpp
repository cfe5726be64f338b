// bnblab command line: instance generation, exact solving, cover-cut
// separation, the experiment harness, and the verification suite.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bnblab/acceptance.hpp"
#include "bnblab/cuts.hpp"
#include "bnblab/engine.hpp"
#include "bnblab/experiments.hpp"
#include "bnblab/instance_io.hpp"
#include "bnblab/instances.hpp"
#include "bnblab/lp.hpp"

namespace {

using namespace bnblab;

struct InstanceSource {
  std::string file;
  std::string family;
  bool tight = false;
  int n = 20;
  int m = 50;
  uint64_t seed = 1;
  std::string eps = "1/100";

  void attach(CLI::App* cmd, bool generator_only = false) {
    auto* file_opt = cmd->add_option("--file", file, "instance file (JSON)");
    auto* family_opt =
        cmd->add_option("--family", family, "built-in family: mkp | two-dim | qn | cross")
            ->check(CLI::IsMember({"mkp", "two-dim", "qn", "cross"}));
    if (generator_only) {
      family_opt->required();
      cmd->remove_option(file_opt);
    } else {
      file_opt->excludes(family_opt);
      family_opt->excludes(file_opt);
    }
    cmd->add_flag("--tight", tight, "tightened variant (two-dim, qn, cross)");
    cmd->add_option("--n", n, "variables (mkp) or copies (qn)");
    cmd->add_option("--m", m, "constraints (mkp)");
    cmd->add_option("--seed", seed, "generator seed (mkp)");
    cmd->add_option("--eps", eps, "objective epsilon (cross), rational");
  }

  MipInstance build() const {
    if (!file.empty()) return read_instance_file(file);
    if (family == "mkp")
      return gen_mkp({.n = n, .m = m, .seed = seed});
    if (family == "two-dim") return build_two_dim(tight);
    if (family == "qn") return build_qn(n, tight);
    if (family == "cross") return build_cross(tight, parse_rational(eps));
    throw CLI::ValidationError("--file or --family is required");
  }
};

BranchRule parse_rule(const std::string& name) {
  const auto rule = rule_from_name(name);
  if (!rule) throw CLI::ValidationError("unknown rule '" + name + "'");
  return *rule;
}

int cmd_generate(const InstanceSource& src, const std::string& out) {
  const MipInstance inst = src.build();
  if (out.empty() || out == "-")
    std::cout << serialize_instance(inst);
  else
    write_instance_file(inst, out);
  return 0;
}

int cmd_solve(const InstanceSource& src, const std::string& rule_name_arg,
              const std::string& cutoff, int64_t node_limit, bool keep_tree,
              const std::string& tree_out, const std::string& dot_out, bool show_stats) {
  const MipInstance inst = src.build();
  EngineOptions opts;
  opts.rule = parse_rule(rule_name_arg);
  opts.keep_tree = keep_tree || !tree_out.empty() || !dot_out.empty() || show_stats;
  if (!cutoff.empty()) opts.cutoff = parse_rational(cutoff);
  if (node_limit > 0) opts.node_limit = node_limit;

  const BnbResult r = solve(inst, opts);
  std::cout << (r.status == BnbResult::Status::Optimal ? "optimal" : "infeasible")
            << ", nodes=" << r.node_count << "\n";
  if (r.status == BnbResult::Status::Optimal) {
    std::cout << "value = " << to_string(r.incumbent.value) << "\n";
    std::cout << "point =";
    for (size_t i = 0; i < r.incumbent.point.size(); ++i)
      if (r.incumbent.point[i] != 0)
        std::cout << " " << inst.variables[i].name << "=" << to_string(r.incumbent.point[i]);
    std::cout << "\n";
  }
  if (r.root_lp_value) std::cout << "root_lp = " << to_string(*r.root_lp_value) << "\n";
  std::cout << "lp_solves = " << r.lp_solve_count << " (probes " << r.probe_lp_count << ")\n";
  if (show_stats && !r.tree.empty()) {
    const TreeStats stats = tree_stats(r);
    std::cout << "max_depth = " << stats.max_depth << "\n";
    for (const auto& [status, count] : stats.status_counts)
      std::cout << "  " << node_status_text(status) << ": " << count << "\n";
    std::cout << "depth histogram:";
    for (const auto& [depth, count] : stats.depth_histogram)
      std::cout << " " << depth << ":" << count;
    std::cout << "\n";
  }
  if (!tree_out.empty()) {
    std::ofstream out(tree_out);
    out << tree_to_json(r, inst).dump(2) << "\n";
  }
  if (!dot_out.empty()) {
    std::ofstream out(dot_out);
    out << tree_to_dot(r, inst);
  }
  if (r.truncated) {
    std::cerr << "truncated: node limit reached\n";
    return 3;
  }
  return 0;
}

int cmd_separate(const InstanceSource& src, const std::string& json_out) {
  const MipInstance inst = src.build();
  const LpOutcome root =
      solve_lp(LpProblem::relaxation_of(std::make_shared<MipInstance>(inst)));
  if (root.status != LpStatus::Optimal) {
    std::cout << "root LP " << lp_status_text(root.status) << "; nothing to separate\n";
    return 1;
  }
  std::cout << "root_lp = " << to_string(root.value) << "\n";
  const std::vector<CoverCut> cuts = find_all_covers(inst, root.point);
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const CoverCut& cut : cuts) {
    std::cout << "cover from " << cut.source_label << ": {";
    bool first = true;
    nlohmann::ordered_json indices = nlohmann::ordered_json::array();
    for (int i : cut.cover) {
      std::cout << (first ? "" : ", ") << inst.variables[static_cast<size_t>(i)].name;
      indices.push_back(i);
      first = false;
    }
    const double depth = cut_depth(cut, root.point);
    std::cout << "} d* = " << to_string(cut.violation) << " depth = " << format_real(depth)
              << "\n";
    doc.push_back({{"source", cut.source_label},
                   {"cover", std::move(indices)},
                   {"violation", to_string(cut.violation)},
                   {"depth", depth}});
  }
  if (cuts.empty()) std::cout << "no violated cover cuts\n";
  if (!json_out.empty()) {
    std::ofstream out(json_out);
    out << doc.dump(2) << "\n";
  }
  return 0;
}

int cmd_experiment(const InstanceSource& src, const std::string& mkp_size,
                   const std::string& seed_range, const std::string& mode,
                   const std::string& rule_arg, int rounds, int64_t node_limit,
                   const std::string& out_csv, const std::string& summary_out) {
  EngineOptions opts;
  opts.rule = parse_rule(rule_arg);
  if (node_limit > 0) opts.node_limit = node_limit;

  std::vector<ExperimentRecord> records;
  std::vector<uint64_t> excluded;
  if (!mkp_size.empty()) {
    BatchConfig config;
    const size_t x = mkp_size.find('x');
    if (x == std::string::npos)
      throw CLI::ValidationError("--mkp expects NxM, e.g. 20x50");
    config.n = std::stoi(mkp_size.substr(0, x));
    config.m = std::stoi(mkp_size.substr(x + 1));
    const size_t dots = seed_range.find("..");
    if (dots == std::string::npos)
      throw CLI::ValidationError("--seeds expects A..B, e.g. 1..100");
    config.seed_begin = std::stoull(seed_range.substr(0, dots));
    config.seed_end = std::stoull(seed_range.substr(dots + 2));
    config.rule = opts.rule;
    config.max_rounds = rounds;
    if (node_limit > 0) config.node_cap = node_limit;
    config.run_single = mode == "single-cut" || mode == "full";
    config.run_all = mode == "all-cuts" || mode == "full";
    config.run_rounds = mode == "rounds" || mode == "full";
    const BatchOutput out = run_mkp_batch(config);
    records = out.records;
    excluded = out.excluded_seeds;
  } else {
    const MipInstance inst = src.build();
    if (mode == "single-cut" || mode == "full") {
      auto recs = single_cut_experiment(inst, opts, src.seed);
      records.insert(records.end(), recs.begin(), recs.end());
    }
    if (mode == "all-cuts" || mode == "full")
      records.push_back(all_cuts_experiment(inst, opts, src.seed));
    if (mode == "rounds" || mode == "full") {
      auto recs = rounds_experiment(inst, opts, rounds, src.seed);
      records.insert(records.end(), recs.begin(), recs.end());
    }
  }

  if (out_csv.empty() || out_csv == "-")
    std::cout << records_to_csv(records);
  else
    write_csv_file(records, out_csv);
  for (uint64_t s : excluded)
    std::cerr << "excluded seed " << s << " (node limit inside an engine run)\n";
  if (!records.empty()) {
    const std::string report = summary_report(summarize(records));
    if (summary_out.empty())
      std::cerr << report;
    else {
      std::ofstream out(summary_out);
      out << report;
    }
  }
  return excluded.empty() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact branch-and-bound laboratory"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "write an instance file");
  InstanceSource gen_src;
  gen_src.attach(generate, /*generator_only=*/true);
  std::string gen_out;
  generate->add_option("-o,--out", gen_out, "output path (default stdout)");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "solve an instance exactly");
  InstanceSource solve_src;
  solve_src.attach(solve_cmd);
  std::string rule = "fsb-product";
  solve_cmd->add_option("--rule", rule,
                        "fsb-product | fsb-linear | fsb-ratio | most-fractional | fixed-order");
  std::string cutoff;
  solve_cmd->add_option("--cutoff", cutoff, "known optimum (rational), prunes at <=");
  int64_t node_limit = 0;
  solve_cmd->add_option("--node-limit", node_limit, "stop after this many nodes");
  bool keep_tree = false;
  solve_cmd->add_flag("--keep-tree", keep_tree, "retain node records");
  std::string tree_out, dot_out;
  solve_cmd->add_option("--tree-out", tree_out, "write the tree as JSON");
  solve_cmd->add_option("--dot-out", dot_out, "write the tree as graphviz dot");
  bool show_stats = false;
  solve_cmd->add_flag("--stats", show_stats, "print depth/status statistics");

  // separate
  auto* separate = app.add_subcommand("separate", "cover cuts at the root LP");
  InstanceSource sep_src;
  sep_src.attach(separate);
  std::string sep_json;
  separate->add_option("--json-out", sep_json, "write the cut list as JSON");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "cut-impact measurements, CSV output");
  InstanceSource exp_src;
  exp_src.attach(experiment);
  std::string mode = "full";
  experiment
      ->add_option("--mode", mode, "single-cut | all-cuts | rounds | full")
      ->check(CLI::IsMember({"single-cut", "all-cuts", "rounds", "full"}));
  std::string mkp_size, seed_range = "1..100";
  experiment->add_option("--mkp", mkp_size, "batch over generated instances, size NxM");
  experiment->add_option("--seeds", seed_range, "batch seed range A..B");
  std::string exp_rule = "fsb-product";
  experiment->add_option("--rule", exp_rule, "branching rule");
  int rounds = 10;
  experiment->add_option("--rounds", rounds, "separation rounds (rounds mode)");
  int64_t exp_node_limit = 1000000;
  experiment->add_option("--node-limit", exp_node_limit,
                         "per-run node cap; capped runs exclude their instance");
  std::string out_csv, summary_out;
  experiment->add_option("-o,--out", out_csv, "CSV output path (default stdout)");
  experiment->add_option("--summary", summary_out, "write the summary report here");

  // verify-paper
  auto* verify = app.add_subcommand("verify-paper", "run the acceptance suite");
  std::string only_list, artifacts = "acceptance_artifacts";
  int workers = 0;
  double budget = 1800;
  std::string batch_seeds = "1..100", batch_size = "20x50";
  verify->add_option("--only", only_list, "criteria subset, e.g. 1,2,5");
  verify->add_option("--artifacts", artifacts, "artifact output directory");
  verify->add_option("--workers", workers, "worker threads (default BNBLAB_WORKERS)");
  verify->add_option("--budget-seconds", budget, "time budget for the blow-up criterion");
  verify->add_option("--batch-seeds", batch_seeds, "batch seed range (default 1..100)");
  verify->add_option("--batch-size", batch_size, "batch instance size (default 20x50)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) return cmd_generate(gen_src, gen_out);
    if (*solve_cmd)
      return cmd_solve(solve_src, rule, cutoff, node_limit, keep_tree, tree_out, dot_out,
                       show_stats);
    if (*separate) return cmd_separate(sep_src, sep_json);
    if (*experiment)
      return cmd_experiment(exp_src, mkp_size, seed_range, mode, exp_rule, rounds,
                            exp_node_limit, out_csv, summary_out);
    if (*verify) {
      AcceptanceConfig config;
      config.artifacts_dir = artifacts;
      config.workers = workers;
      config.blowup_budget_seconds = budget;
      if (!only_list.empty()) {
        size_t pos = 0;
        while (pos < only_list.size()) {
          const size_t comma = only_list.find(',', pos);
          config.only.insert(std::stoi(
              only_list.substr(pos, comma == std::string::npos ? comma : comma - pos)));
          if (comma == std::string::npos) break;
          pos = comma + 1;
        }
      }
      const size_t dots = batch_seeds.find("..");
      if (dots != std::string::npos) {
        config.batch_seed_begin = std::stoull(batch_seeds.substr(0, dots));
        config.batch_seed_end = std::stoull(batch_seeds.substr(dots + 2));
      }
      const size_t x = batch_size.find('x');
      if (x != std::string::npos) {
        config.batch_n = std::stoi(batch_size.substr(0, x));
        config.batch_m = std::stoi(batch_size.substr(x + 1));
      }
      const auto results = run_acceptance(config, std::cout);
      bool all_passed = !results.empty();
      for (const auto& r : results) all_passed = all_passed && r.passed;
      return all_passed ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
