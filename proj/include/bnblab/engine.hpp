#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bnblab/branching.hpp"
#include "bnblab/lp.hpp"
#include "bnblab/model.hpp"
#include "bnblab/rational.hpp"

namespace bnblab {

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct Node {
  enum class Status { Open, Branched, PrunedByBound, PrunedByIntegrality, Infeasible };

  int64_t id = 0;
  int64_t parent = -1;
  int depth = 0;
  int branch_var = -1;        // bound change that created this node; -1 at root
  bool branch_up = false;     // false: var <= floor, true: var >= floor + 1
  Rational branch_floor;
  LpStatus lp_status = LpStatus::Infeasible;
  Rational lp_value;          // iff lp_status == Optimal
  Status status = Status::Open;
};

inline const char* node_status_text(Node::Status s) {
  switch (s) {
    case Node::Status::Open: return "open";
    case Node::Status::Branched: return "branched";
    case Node::Status::PrunedByBound: return "pruned-by-bound";
    case Node::Status::PrunedByIntegrality: return "pruned-by-integrality";
    case Node::Status::Infeasible: return "infeasible";
  }
  return "?";
}

inline const char* lp_status_text(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

struct EngineOptions {
  BranchRule rule = BranchRule::FsbProduct;
  RuleParams params;
  std::optional<Rational> cutoff;       // known optimum provided a priori
  std::optional<int64_t> node_limit;
  bool keep_tree = false;
  // Strong-branching probe workers; 0 reads BNBLAB_WORKERS (default 1).
  int workers = 0;
  // Max number of open-node tableaux kept in memory; evicted tableaux are
  // rebuilt deterministically on demand.
  size_t tableau_cache = 128;
  // When false, every node and probe LP is solved from scratch. Results are
  // identical; only speed differs.
  bool warm_start = true;
};

struct BnbResult {
  enum class Status { Optimal, Infeasible };

  Status status = Status::Infeasible;
  OptResult incumbent;
  bool truncated = false;
  int64_t node_count = 0;
  int64_t lp_solve_count = 0;   // every LP optimization, probes included
  int64_t probe_lp_count = 0;   // strong-branching probes alone
  std::optional<Rational> root_lp_value;
  std::vector<Node> tree;       // filled iff keep_tree
};

inline int engine_workers_from_env() {
  if (const char* env = std::getenv("BNBLAB_WORKERS")) {
    const int w = std::atoi(env);
    if (w >= 1) return w;
  }
  return 1;
}

// ---------------------------------------------------------------------------
// Best-bound branch and bound.
//
// Node processing contract: pop the open node with the largest LP value
// (ties: smallest id). If its value is <= the incumbent (or the cutoff),
// prune by bound. Otherwise branch: both children are created, counted and
// LP-solved immediately; an infeasible child is closed on the spot, an
// integral child updates the incumbent immediately, and the rest join the
// open set. Strong-branching probe LPs are never counted as nodes.
// ---------------------------------------------------------------------------
class BranchAndBound {
 public:
  BranchAndBound(std::shared_ptr<const MipInstance> instance, EngineOptions options)
      : inst_(std::move(instance)), opts_(std::move(options)) {
    const auto violations = validate(*inst_);
    if (!violations.empty())
      throw std::invalid_argument("engine: invalid instance: " + violations.front());
    for (const Variable& v : inst_->variables)
      if (v.is_integer && (!is_integer(v.lower) || !is_integer(v.upper)))
        throw std::invalid_argument("engine: integer variable '" + v.name +
                                    "' needs integral bounds");
    workers_ = opts_.workers > 0 ? opts_.workers : engine_workers_from_env();
  }

  BnbResult run() {
    core_ = std::make_shared<detail::LpCore>(detail::LpCore::build(inst_));
    const LpProblem root = LpProblem::relaxation_of(inst_);

    BnbResult res;
    if (opts_.cutoff) bound_ = *opts_.cutoff;

    SimplexState root_state(core_);
    root_state.solve_cold(root.lower, root.upper);
    ++res.lp_solve_count;
    res.node_count = 1;
    Node root_node;
    root_node.id = 0;
    root_node.depth = 0;
    root_node.lp_status = root_state.status();
    if (root_state.status() == LpStatus::Unbounded)
      throw std::runtime_error("engine: root LP unbounded");
    if (root_state.status() == LpStatus::Optimal) {
      root_node.lp_value = root_state.objective_value();
      res.root_lp_value = root_node.lp_value;
    }
    enroll_child(std::move(root_node), root_state, root.lower, root.upper, res);

    while (!open_.empty()) {
      if (opts_.node_limit && res.node_count + 2 > *opts_.node_limit) {
        res.truncated = true;
        break;
      }
      auto it = open_.begin();
      const OpenNode node = std::move(it->second);
      open_.erase(it);

      if (bound_ && node.value <= *bound_) {
        set_status(res, node.id, Node::Status::PrunedByBound);
        cache_.erase(node.id);
        cache_keys_.erase(node.id);
        continue;
      }
      process(node, res);
    }

    res.status = incumbent_ ? BnbResult::Status::Optimal : BnbResult::Status::Infeasible;
    if (incumbent_) {
      res.incumbent.status = OptResult::Status::Optimal;
      res.incumbent.value = incumbent_->first;
      res.incumbent.point = incumbent_->second;
    } else {
      res.incumbent.status = OptResult::Status::Infeasible;
    }
    return res;
  }

 private:
  struct OpenNode {
    int64_t id = 0;
    int depth = 0;
    Rational value;
    std::vector<Rational> lo, hi;
    std::vector<int> basic;
    std::vector<VarStatus> vstat;
  };

  struct OpenKey {
    Rational value;
    int64_t id;
    // Largest value first, then smallest id.
    friend bool operator<(const OpenKey& a, const OpenKey& b) {
      if (a.value != b.value) return a.value > b.value;
      return a.id < b.id;
    }
  };

  struct ProbeBest {
    int var = -1;
    BranchScore score;
    GainPair gains;
    std::unique_ptr<SimplexState> down, up;
  };

  std::shared_ptr<const MipInstance> inst_;
  EngineOptions opts_;
  int workers_ = 1;
  std::shared_ptr<const detail::LpCore> core_;
  std::map<OpenKey, OpenNode> open_;
  std::map<int64_t, SimplexState> cache_;  // node id -> solved tableau
  std::map<int64_t, OpenKey> cache_keys_;
  std::optional<Rational> bound_;          // max(cutoff, incumbent value)
  std::optional<std::pair<Rational, std::vector<Rational>>> incumbent_;

  void set_status(BnbResult& res, int64_t id, Node::Status s) {
    if (opts_.keep_tree) res.tree[static_cast<size_t>(id)].status = s;
  }

  bool point_integral(const SimplexState& state) const {
    for (const Variable& v : inst_->variables)
      if (v.is_integer && !is_integer(state.value_of(v.index))) return false;
    return true;
  }

  void maybe_update_incumbent(const SimplexState& state) {
    const Rational value = state.objective_value();
    if (incumbent_ && value <= incumbent_->first) return;
    incumbent_ = {value, state.point()};
    if (!bound_ || value > *bound_) bound_ = value;
  }

  /// Registers a freshly created (and solved) node: counts it, classifies it,
  /// and moves fractional-feasible nodes into the open set.
  void enroll_child(Node node, SimplexState& state, const std::vector<Rational>& lo,
                    const std::vector<Rational>& hi, BnbResult& res) {
    if (state.status() == LpStatus::Unbounded)
      throw std::runtime_error("engine: unbounded node LP");
    if (state.status() == LpStatus::Infeasible) {
      node.status = Node::Status::Infeasible;
    } else if (point_integral(state)) {
      maybe_update_incumbent(state);
      node.status = Node::Status::PrunedByIntegrality;
    } else {
      node.status = Node::Status::Open;
      OpenNode entry;
      entry.id = node.id;
      entry.depth = node.depth;
      entry.value = node.lp_value;
      entry.lo = lo;
      entry.hi = hi;
      entry.basic = state.basic_columns();
      entry.vstat = state.full_status();
      const OpenKey key{entry.value, entry.id};
      if (opts_.warm_start) cache_insert(key, node.id, std::move(state));
      open_.emplace(key, std::move(entry));
    }
    if (opts_.keep_tree) res.tree.push_back(std::move(node));
  }

  void cache_insert(const OpenKey& key, int64_t id, SimplexState&& state) {
    if (opts_.tableau_cache == 0) return;
    if (cache_.size() >= opts_.tableau_cache) {
      // Evict the cached tableau whose node pops last (worst bound).
      auto worst = cache_keys_.begin();
      OpenKey worst_key = worst->second;
      int64_t worst_id = worst->first;
      for (auto it = cache_keys_.begin(); it != cache_keys_.end(); ++it) {
        if (worst_key < it->second) {
          worst_key = it->second;
          worst_id = it->first;
        }
      }
      if (key < worst_key) {
        cache_.erase(worst_id);
        cache_keys_.erase(worst_id);
      } else {
        return;  // new node pops later than everything cached; skip it
      }
    }
    cache_.emplace(id, std::move(state));
    cache_keys_.emplace(id, key);
  }

  /// Produces the solved tableau for an open node, from cache or by
  /// deterministic refactorization.
  SimplexState node_state(const OpenNode& node) {
    if (opts_.warm_start) {
      auto it = cache_.find(node.id);
      if (it != cache_.end()) {
        SimplexState s = std::move(it->second);
        cache_.erase(it);
        cache_keys_.erase(node.id);
        return s;
      }
      SimplexState s(core_);
      s.refactorize(node.lo, node.hi, node.basic, node.vstat);
      return s;
    }
    SimplexState s(core_);
    s.solve_cold(node.lo, node.hi);
    if (s.status() != LpStatus::Optimal)
      throw std::logic_error("engine: open node no longer solvable");
    return s;
  }

  /// Solves one child LP, warm or cold per options.
  void solve_child(SimplexState& target, const SimplexState& parent, const OpenNode& node,
                   int var, const Rational& lo, const Rational& hi) {
    if (opts_.warm_start) {
      target = parent;
      target.resolve_tighten(var, lo, hi);
      return;
    }
    auto clo = node.lo;
    auto chi = node.hi;
    clo[static_cast<size_t>(var)] = lo;
    chi[static_cast<size_t>(var)] = hi;
    target.solve_cold(clo, chi);
  }

  /// Strong branching: probe both children of every fractional candidate,
  /// keep the best (score, lowest index) with its two solved child states.
  ProbeBest probe_candidates(const std::vector<int>& candidates, const SimplexState& parent,
                             const OpenNode& node, const Rational& parent_value,
                             BnbResult& res) {
    const int nworkers =
        std::max(1, std::min<int>(workers_, static_cast<int>(candidates.size())));
    std::vector<ProbeBest> bests(static_cast<size_t>(nworkers));
    std::vector<int64_t> probe_counts(static_cast<size_t>(nworkers), 0);

    auto work = [&](int w) {
      ProbeBest& best = bests[static_cast<size_t>(w)];
      auto down = std::make_unique<SimplexState>(core_);
      auto up = std::make_unique<SimplexState>(core_);
      for (size_t k = static_cast<size_t>(w); k < candidates.size();
           k += static_cast<size_t>(nworkers)) {
        const int var = candidates[k];
        const size_t v = static_cast<size_t>(var);
        const Rational val = parent.value_of(var);
        const Rational fl = floor_rational(val);
        solve_child(*down, parent, node, var, node.lo[v], fl);
        solve_child(*up, parent, node, var, fl + 1, node.hi[v]);
        probe_counts[static_cast<size_t>(w)] += 2;
        GainPair g;
        g.down_infeasible = down->status() == LpStatus::Infeasible;
        g.up_infeasible = up->status() == LpStatus::Infeasible;
        if (!g.down_infeasible) g.down = parent_value - down->objective_value();
        if (!g.up_infeasible) g.up = parent_value - up->objective_value();
        const BranchScore score = detail::strong_branch_score(opts_.rule, g, opts_.params);
        if (best.var < 0 || best.score < score) {
          best.var = var;
          best.score = score;
          best.gains = g;
          std::swap(best.down, down);
          std::swap(best.up, up);
          if (!down) down = std::make_unique<SimplexState>(core_);
          if (!up) up = std::make_unique<SimplexState>(core_);
        }
      }
    };

    if (nworkers == 1) {
      work(0);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(static_cast<size_t>(nworkers));
      for (int w = 0; w < nworkers; ++w) threads.emplace_back(work, w);
      for (auto& t : threads) t.join();
    }

    for (int64_t c : probe_counts) {
      res.probe_lp_count += c;
      res.lp_solve_count += c;
    }
    // Deterministic reduction: candidates were scanned in index order within
    // workers; across workers pick the best score, ties to the lowest index.
    ProbeBest* winner = nullptr;
    for (auto& b : bests) {
      if (b.var < 0) continue;
      if (!winner || winner->score < b.score ||
          (winner->score == b.score && b.var < winner->var))
        winner = &b;
    }
    if (!winner) throw std::logic_error("probe_candidates: no candidates");
    return std::move(*winner);
  }

  void process(const OpenNode& node, BnbResult& res) {
    SimplexState state = node_state(node);
    if (!opts_.warm_start) ++res.lp_solve_count;
    const Rational parent_value = state.objective_value();

    // Decide the branching variable.
    int branch_var = -1;
    Rational branch_floor;
    std::unique_ptr<SimplexState> down_state, up_state;

    if (rule_uses_strong_branching(opts_.rule)) {
      const std::vector<int> candidates =
          fractional_candidates(state.point(), *inst_);
      ProbeBest best = probe_candidates(candidates, state, node, parent_value, res);
      branch_var = best.var;
      branch_floor = floor_rational(state.value_of(best.var));
      down_state = std::move(best.down);
      up_state = std::move(best.up);
    } else {
      LpOutcome outcome;
      outcome.status = LpStatus::Optimal;
      outcome.value = parent_value;
      outcome.point = state.point();
      LpProblem view;
      view.instance = inst_;
      view.lower = node.lo;
      view.upper = node.hi;
      const BranchDecision d = select_branch_var(view, opts_.rule, outcome, opts_.params);
      branch_var = d.var;
      branch_floor = d.floor_value;
      down_state = std::make_unique<SimplexState>(core_);
      up_state = std::make_unique<SimplexState>(core_);
      const size_t v = static_cast<size_t>(branch_var);
      solve_child(*down_state, state, node, branch_var, node.lo[v], branch_floor);
      solve_child(*up_state, state, node, branch_var, branch_floor + 1, node.hi[v]);
      res.lp_solve_count += 2;
    }

    set_status(res, node.id, Node::Status::Branched);

    // Create both children, down first.
    for (int side = 0; side < 2; ++side) {
      const bool is_up = side == 1;
      SimplexState& child_state = is_up ? *up_state : *down_state;
      const size_t v = static_cast<size_t>(branch_var);
      auto clo = node.lo;
      auto chi = node.hi;
      if (is_up) clo[v] = branch_floor + 1;
      else chi[v] = branch_floor;

      Node child;
      child.id = res.node_count++;
      child.parent = node.id;
      child.depth = node.depth + 1;
      child.branch_var = branch_var;
      child.branch_up = is_up;
      child.branch_floor = branch_floor;
      child.lp_status = child_state.status();
      if (child.lp_status == LpStatus::Optimal) child.lp_value = child_state.objective_value();
      enroll_child(std::move(child), child_state, clo, chi, res);
    }
  }
};

inline BnbResult solve(const MipInstance& instance, const EngineOptions& options = {}) {
  BranchAndBound engine(std::make_shared<MipInstance>(instance), options);
  return engine.run();
}

inline BnbResult solve(std::shared_ptr<const MipInstance> instance,
                       const EngineOptions& options = {}) {
  BranchAndBound engine(std::move(instance), options);
  return engine.run();
}

// ---------------------------------------------------------------------------
// Tree statistics and exports
// ---------------------------------------------------------------------------

struct TreeStats {
  std::map<int, int64_t> depth_histogram;
  std::map<Node::Status, int64_t> status_counts;
  int max_depth = 0;
};

inline TreeStats tree_stats(const BnbResult& result) {
  if (result.tree.empty())
    throw std::invalid_argument("tree_stats: result carries no tree (keep_tree was off)");
  TreeStats stats;
  for (const Node& node : result.tree) {
    ++stats.depth_histogram[node.depth];
    ++stats.status_counts[node.status];
    stats.max_depth = std::max(stats.max_depth, node.depth);
  }
  return stats;
}

/// One JSON object per node: {id, parent, branch var, branch direction,
/// lp status, lp value, node status}.
inline nlohmann::ordered_json tree_to_json(const BnbResult& result,
                                           const MipInstance& instance) {
  if (result.tree.empty())
    throw std::invalid_argument("tree_to_json: result carries no tree");
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const Node& node : result.tree) {
    nlohmann::ordered_json rec;
    rec["id"] = node.id;
    rec["parent"] = node.parent;
    if (node.branch_var >= 0) {
      rec["branch_var"] = instance.variables[static_cast<size_t>(node.branch_var)].name;
      rec["branch_dir"] =
          node.branch_up ? ">= " + to_string(node.branch_floor + 1)
                         : "<= " + to_string(node.branch_floor);
    } else {
      rec["branch_var"] = nullptr;
      rec["branch_dir"] = nullptr;
    }
    rec["lp_status"] = lp_status_text(node.lp_status);
    if (node.lp_status == LpStatus::Optimal) rec["lp_value"] = to_string(node.lp_value);
    else rec["lp_value"] = nullptr;
    rec["node_status"] = node_status_text(node.status);
    doc.push_back(std::move(rec));
  }
  return doc;
}

/// Graphviz dot rendering: one line per edge, labelled with the bound change.
inline std::string tree_to_dot(const BnbResult& result, const MipInstance& instance) {
  if (result.tree.empty())
    throw std::invalid_argument("tree_to_dot: result carries no tree");
  std::ostringstream os;
  os << "digraph bnb {\n";
  for (const Node& node : result.tree) {
    os << "  n" << node.id << " [label=\"#" << node.id;
    if (node.lp_status == LpStatus::Optimal) os << "\\n" << to_string(node.lp_value);
    os << "\\n" << node_status_text(node.status) << "\"];\n";
  }
  for (const Node& node : result.tree) {
    if (node.parent < 0) continue;
    const std::string& var =
        instance.variables[static_cast<size_t>(node.branch_var)].name;
    os << "  n" << node.parent << " -> n" << node.id << " [label=\"" << var
       << (node.branch_up ? " >= " + to_string(node.branch_floor + 1)
                          : " <= " + to_string(node.branch_floor))
       << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Certificate replay
// ---------------------------------------------------------------------------

struct ReplayResult {
  bool verified = false;
  int64_t replay_node_count = 0;
};

/// Replays the branching decisions of a recorded tree on another instance
/// with the same variables. The tree solves the target instance when every
/// replayed leaf is infeasible, integral, or bound-dominated by the replayed
/// incumbent. Relaxation containment is checked along the way: a child's LP
/// value may never exceed its parent's.
inline ReplayResult replay_certificate(const std::vector<Node>& tree,
                                       const MipInstance& target) {
  if (tree.empty()) throw std::invalid_argument("replay_certificate: empty tree");
  for (const Node& node : tree)
    if (node.branch_var >= target.num_variables())
      throw std::invalid_argument("replay_certificate: variable count mismatch");

  std::vector<std::vector<int64_t>> children(tree.size());
  for (const Node& node : tree)
    if (node.parent >= 0) children[static_cast<size_t>(node.parent)].push_back(node.id);

  auto shared = std::make_shared<MipInstance>(target);
  const LpProblem root = LpProblem::relaxation_of(shared);

  ReplayResult res;
  std::optional<Rational> incumbent;
  std::vector<Rational> open_leaf_values;
  bool containment_ok = true;

  struct Item {
    int64_t id;
    LpProblem problem;
    std::optional<Rational> parent_value;
  };
  std::vector<Item> stack;
  stack.push_back({0, root, std::nullopt});

  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();
    ++res.replay_node_count;
    const Node& a_node = tree[static_cast<size_t>(item.id)];
    const LpOutcome out = solve_lp(item.problem);

    if (out.status == LpStatus::Infeasible) continue;  // leaf: closed
    if (item.parent_value && out.value > *item.parent_value) containment_ok = false;

    const bool integral = fractional_candidates(out.point, target).empty();
    if (integral) {
      if (!incumbent || out.value > *incumbent) incumbent = out.value;
      continue;  // leaf: solved here even if the source tree went deeper
    }
    if (a_node.status == Node::Status::Branched) {
      if (children[static_cast<size_t>(item.id)].size() != 2)
        throw std::invalid_argument("replay_certificate: malformed tree");
      for (int64_t cid : children[static_cast<size_t>(item.id)]) {
        const Node& c = tree[static_cast<size_t>(cid)];
        const size_t v = static_cast<size_t>(c.branch_var);
        LpProblem p = item.problem;
        if (c.branch_up)
          p.lower[v] = c.branch_floor + 1 > p.lower[v] ? c.branch_floor + 1 : p.lower[v];
        else
          p.upper[v] = c.branch_floor < p.upper[v] ? c.branch_floor : p.upper[v];
        stack.push_back({cid, std::move(p), out.value});
      }
      continue;
    }
    // Source tree stops here but the target node is fractional-feasible: it
    // must be dominated by the final replayed incumbent.
    open_leaf_values.push_back(out.value);
  }

  bool dominated = true;
  for (const Rational& value : open_leaf_values)
    if (!incumbent || value > *incumbent) dominated = false;
  res.verified = containment_ok && dominated;
  return res;
}

}  // namespace bnblab
