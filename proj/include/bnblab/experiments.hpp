#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bnblab/cuts.hpp"
#include "bnblab/engine.hpp"
#include "bnblab/instances.hpp"
#include "bnblab/lp.hpp"
#include "bnblab/model.hpp"

namespace bnblab {

/// Thrown when an engine run inside an experiment hits its node limit.
struct ExperimentTruncated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One (instance, cut set) observation.
///   delta_G = (z - z_hat) / (z - z_ip), absent when z = z_ip
///   delta_T = (T_hat - T) / T
///   delta_d = d* / sqrt(|C|), single-cut mode only
struct ExperimentRecord {
  std::string instance;
  uint64_t seed = 0;
  std::string rule;
  std::string mode;                  // "single-cut" | "all-cuts" | "rounds"
  std::optional<int> round_or_cut;   // cut index or round number
  Rational z;                        // root LP value without cuts
  Rational z_hat;                    // root LP value with cuts
  Rational z_ip;                     // integer optimum
  int64_t tree_size = 0;             // T
  int64_t tree_size_hat = 0;         // T hat
  std::optional<double> delta_g;
  double delta_t = 0;
  std::optional<double> delta_d;
};

namespace detail {

struct BaselineRun {
  Rational z;
  Rational z_ip;
  int64_t tree_size = 0;
  std::vector<Rational> root_point;
};

inline BnbResult engine_run(const MipInstance& inst, const EngineOptions& opts) {
  BnbResult r = solve(inst, opts);
  if (r.truncated)
    throw ExperimentTruncated("node limit hit while solving '" + inst.name + "'");
  if (r.status != BnbResult::Status::Optimal)
    throw std::runtime_error("experiment instance '" + inst.name + "' is infeasible");
  return r;
}

inline BaselineRun baseline_run(const MipInstance& inst, const EngineOptions& opts) {
  const BnbResult r = engine_run(inst, opts);
  BaselineRun b;
  if (!r.root_lp_value) throw std::runtime_error("baseline run lost its root LP value");
  b.z = *r.root_lp_value;
  b.z_ip = r.incumbent.value;
  b.tree_size = r.node_count;
  b.root_point = solve_lp(LpProblem::relaxation_of(std::make_shared<MipInstance>(inst))).point;
  return b;
}

inline ExperimentRecord make_record(const BaselineRun& base, const MipInstance& inst,
                                    uint64_t seed, const EngineOptions& opts,
                                    const std::string& mode, std::optional<int> index,
                                    const Rational& z_hat, int64_t t_hat) {
  ExperimentRecord rec;
  rec.instance = inst.name;
  rec.seed = seed;
  rec.rule = rule_name(opts.rule);
  rec.mode = mode;
  rec.round_or_cut = index;
  rec.z = base.z;
  rec.z_hat = z_hat;
  rec.z_ip = base.z_ip;
  rec.tree_size = base.tree_size;
  rec.tree_size_hat = t_hat;
  if (base.z != base.z_ip)
    rec.delta_g = to_double((base.z - z_hat) / (base.z - base.z_ip));
  rec.delta_t = to_double(Rational(t_hat - base.tree_size) / Rational(base.tree_size));
  return rec;
}

}  // namespace detail

/// Adds each violated cover cut of the root LP individually and re-solves;
/// one record per cut, depth-of-cut included.
inline std::vector<ExperimentRecord> single_cut_experiment(const MipInstance& instance,
                                                           const EngineOptions& opts,
                                                           uint64_t seed = 0) {
  const detail::BaselineRun base = detail::baseline_run(instance, opts);
  const std::vector<CoverCut> cuts = find_all_covers(instance, base.root_point);
  std::vector<ExperimentRecord> records;
  records.reserve(cuts.size());
  for (size_t k = 0; k < cuts.size(); ++k) {
    const MipInstance cut_inst = apply_cuts(instance, {cuts[k]});
    const BnbResult r = detail::engine_run(cut_inst, opts);
    ExperimentRecord rec = detail::make_record(base, instance, seed, opts, "single-cut",
                                               static_cast<int>(k), *r.root_lp_value,
                                               r.node_count);
    rec.delta_d = cut_depth(cuts[k], base.root_point);
    records.push_back(std::move(rec));
  }
  return records;
}

/// Adds every violated cover cut of the root LP at once; one record.
/// Instances whose root LP admits no violated cover produce a record with
/// z_hat = z and an unchanged tree.
inline ExperimentRecord all_cuts_experiment(const MipInstance& instance,
                                            const EngineOptions& opts, uint64_t seed = 0) {
  const detail::BaselineRun base = detail::baseline_run(instance, opts);
  const std::vector<CoverCut> cuts = find_all_covers(instance, base.root_point);
  if (cuts.empty())
    return detail::make_record(base, instance, seed, opts, "all-cuts", std::nullopt, base.z,
                               base.tree_size);
  const MipInstance cut_inst = apply_cuts(instance, cuts);
  const BnbResult r = detail::engine_run(cut_inst, opts);
  return detail::make_record(base, instance, seed, opts, "all-cuts", std::nullopt,
                             *r.root_lp_value, r.node_count);
}

/// Separation rounds at the root; one record per round 0..k (round 0 is the
/// input instance compared against itself). Stops early with the rounds.
inline std::vector<ExperimentRecord> rounds_experiment(const MipInstance& instance,
                                                       const EngineOptions& opts,
                                                       int max_rounds, uint64_t seed = 0) {
  const detail::BaselineRun base = detail::baseline_run(instance, opts);
  const std::vector<MipInstance> rounds = rounds_of_cuts(instance, max_rounds);
  std::vector<ExperimentRecord> records;
  records.reserve(rounds.size());
  records.push_back(detail::make_record(base, instance, seed, opts, "rounds", 0, base.z,
                                        base.tree_size));
  for (size_t k = 1; k < rounds.size(); ++k) {
    const BnbResult r = detail::engine_run(rounds[k], opts);
    records.push_back(detail::make_record(base, instance, seed, opts, "rounds",
                                          static_cast<int>(k), *r.root_lp_value,
                                          r.node_count));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

struct BucketSummary {
  int64_t count = 0;
  double mean_delta_t = 0;
  double median_delta_t = 0;
};

struct Summary {
  int64_t count = 0;
  double fraction_increased = 0;   // delta_T > 0
  double fraction_decreased = 0;   // delta_T < 0
  double fraction_unchanged = 0;   // delta_T == 0
  // delta_G buckets [0, .1), [.1, .2), [.2, .5), [.5, 1]; records without a
  // defined delta_G are skipped.
  std::array<BucketSummary, 4> buckets;
  std::optional<double> max_single_round_delta_t;  // over mode == "rounds"
};

inline Summary summarize(const std::vector<ExperimentRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");
  Summary s;
  s.count = static_cast<int64_t>(records.size());
  std::array<std::vector<double>, 4> bucket_values;
  int64_t up = 0, down = 0, flat = 0;
  for (const ExperimentRecord& rec : records) {
    if (rec.delta_t > 0) ++up;
    else if (rec.delta_t < 0) ++down;
    else ++flat;
    if (rec.delta_g) {
      const double g = *rec.delta_g;
      int bucket = -1;
      if (g >= 0 && g < 0.1) bucket = 0;
      else if (g >= 0.1 && g < 0.2) bucket = 1;
      else if (g >= 0.2 && g < 0.5) bucket = 2;
      else if (g >= 0.5 && g <= 1.0) bucket = 3;
      if (bucket >= 0) bucket_values[static_cast<size_t>(bucket)].push_back(rec.delta_t);
    }
    if (rec.mode == "rounds") {
      if (!s.max_single_round_delta_t || rec.delta_t > *s.max_single_round_delta_t)
        s.max_single_round_delta_t = rec.delta_t;
    }
  }
  const double total = static_cast<double>(s.count);
  s.fraction_increased = up / total;
  s.fraction_decreased = down / total;
  s.fraction_unchanged = flat / total;
  for (size_t b = 0; b < 4; ++b) {
    auto& vals = bucket_values[b];
    s.buckets[b].count = static_cast<int64_t>(vals.size());
    if (vals.empty()) continue;
    double sum = 0;
    for (double v : vals) sum += v;
    s.buckets[b].mean_delta_t = sum / static_cast<double>(vals.size());
    std::sort(vals.begin(), vals.end());
    const size_t mid = vals.size() / 2;
    s.buckets[b].median_delta_t =
        vals.size() % 2 ? vals[mid] : (vals[mid - 1] + vals[mid]) / 2;
  }
  return s;
}

inline std::string summary_report(const Summary& s) {
  std::ostringstream os;
  os << "records: " << s.count << "\n";
  char line[160];
  std::snprintf(line, sizeof line,
                "delta_T sign fractions: increased %.4f, decreased %.4f, unchanged %.4f\n",
                s.fraction_increased, s.fraction_decreased, s.fraction_unchanged);
  os << line;
  static const char* kBucketNames[4] = {"[0.0,0.1)", "[0.1,0.2)", "[0.2,0.5)", "[0.5,1.0]"};
  for (size_t b = 0; b < 4; ++b) {
    std::snprintf(line, sizeof line,
                  "delta_G %s: n=%lld mean delta_T %.6f median delta_T %.6f\n",
                  kBucketNames[b], static_cast<long long>(s.buckets[b].count),
                  s.buckets[b].mean_delta_t, s.buckets[b].median_delta_t);
    os << line;
  }
  if (s.max_single_round_delta_t) {
    std::snprintf(line, sizeof line, "max single-round delta_T: %.6f\n",
                  *s.max_single_round_delta_t);
    os << line;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kCsvHeader =
    "instance,seed,rule,mode,round_or_cut,z,z_hat,z_ip,T,T_hat,delta_G,delta_T,delta_d";

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string record_to_csv(const ExperimentRecord& rec) {
  std::ostringstream os;
  os << rec.instance << ',' << rec.seed << ',' << rec.rule << ',' << rec.mode << ',';
  if (rec.round_or_cut) os << *rec.round_or_cut;
  os << ',' << to_string(rec.z) << ',' << to_string(rec.z_hat) << ','
     << to_string(rec.z_ip) << ',' << rec.tree_size << ',' << rec.tree_size_hat << ',';
  if (rec.delta_g) os << format_real(*rec.delta_g);
  os << ',' << format_real(rec.delta_t) << ',';
  if (rec.delta_d) os << format_real(*rec.delta_d);
  return os.str();
}

inline std::string records_to_csv(const std::vector<ExperimentRecord>& records) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const ExperimentRecord& rec : records) os << record_to_csv(rec) << '\n';
  return os.str();
}

inline std::vector<ExperimentRecord> records_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("records_from_csv: empty input");
  if (line != kCsvHeader) throw std::invalid_argument("records_from_csv: bad header");
  std::vector<ExperimentRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    while (fields.size() < 13) fields.push_back("");
    if (fields.size() != 13) throw std::invalid_argument("records_from_csv: bad row");
    ExperimentRecord rec;
    rec.instance = fields[0];
    rec.seed = std::stoull(fields[1]);
    rec.rule = fields[2];
    rec.mode = fields[3];
    if (!fields[4].empty()) rec.round_or_cut = std::stoi(fields[4]);
    rec.z = parse_rational(fields[5]);
    rec.z_hat = parse_rational(fields[6]);
    rec.z_ip = parse_rational(fields[7]);
    rec.tree_size = std::stoll(fields[8]);
    rec.tree_size_hat = std::stoll(fields[9]);
    if (!fields[10].empty()) rec.delta_g = std::stod(fields[10]);
    rec.delta_t = std::stod(fields[11]);
    if (!fields[12].empty()) rec.delta_d = std::stod(fields[12]);
    records.push_back(std::move(rec));
  }
  return records;
}

inline void write_csv_file(const std::vector<ExperimentRecord>& records,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << records_to_csv(records);
}

// ---------------------------------------------------------------------------
// Seeded batch protocol
// ---------------------------------------------------------------------------

struct BatchConfig {
  int n = 20;
  int m = 50;
  uint64_t seed_begin = 1;
  uint64_t seed_end = 100;                 // inclusive
  BranchRule rule = BranchRule::FsbProduct;
  int max_rounds = 10;
  std::optional<int64_t> node_cap = 1000000;  // per engine run; hits exclude the seed
  int workers = 0;                         // 0: BNBLAB_WORKERS
  bool run_single = true;
  bool run_all = true;
  bool run_rounds = true;
};

struct BatchOutput {
  std::vector<ExperimentRecord> records;   // sorted by (seed, mode, index)
  std::vector<uint64_t> excluded_seeds;    // node cap hit somewhere inside
};

/// Runs the MKP batch; instances run in parallel across workers while every
/// engine run stays single-threaded, and the record order is independent of
/// scheduling.
inline BatchOutput run_mkp_batch(const BatchConfig& config) {
  if (config.seed_end < config.seed_begin)
    throw std::invalid_argument("run_mkp_batch: empty seed range");
  const size_t count = static_cast<size_t>(config.seed_end - config.seed_begin + 1);
  std::vector<std::vector<ExperimentRecord>> per_seed(count);
  std::vector<uint8_t> excluded(count, 0);

  EngineOptions opts;
  opts.rule = config.rule;
  opts.node_limit = config.node_cap;
  opts.workers = 1;

  const int workers = std::max(
      1, std::min<int>(config.workers > 0 ? config.workers : engine_workers_from_env(),
                       static_cast<int>(count)));
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (;;) {
      const size_t slot = next.fetch_add(1);
      if (slot >= count) return;
      const uint64_t seed = config.seed_begin + slot;
      const MipInstance inst = gen_mkp({.n = config.n, .m = config.m, .seed = seed});
      try {
        std::vector<ExperimentRecord> recs;
        if (config.run_single) {
          auto single = single_cut_experiment(inst, opts, seed);
          recs.insert(recs.end(), single.begin(), single.end());
        }
        if (config.run_all) recs.push_back(all_cuts_experiment(inst, opts, seed));
        if (config.run_rounds) {
          auto rounds = rounds_experiment(inst, opts, config.max_rounds, seed);
          recs.insert(recs.end(), rounds.begin(), rounds.end());
        }
        per_seed[slot] = std::move(recs);
      } catch (const ExperimentTruncated&) {
        excluded[slot] = 1;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  BatchOutput out;
  for (size_t slot = 0; slot < count; ++slot) {
    if (excluded[slot]) {
      out.excluded_seeds.push_back(config.seed_begin + slot);
      continue;
    }
    for (auto& rec : per_seed[slot]) out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace bnblab
