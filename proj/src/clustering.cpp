#include "csync/clustering.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "csync/angles.hpp"
#include "csync/errors.hpp"

namespace csync {

ClusterPlan ClusterPlan::leaf(std::size_t size) {
  ClusterPlan p;
  p.size = size;
  return p;
}

ClusterPlan ClusterPlan::make_split(std::size_t size, std::size_t count, ClusterPlan child,
                                    ClusterPlan rep) {
  ClusterPlan p;
  p.size = size;
  p.split = Split{count, std::make_shared<const ClusterPlan>(std::move(child)),
                  std::make_shared<const ClusterPlan>(std::move(rep))};
  return p;
}

void ClusterPlan::validate(std::size_t eta) const {
  if (size < 1) throw contract_error("ClusterPlan: empty cluster");
  if (is_leaf()) {
    if (size < eta) throw contract_error("ClusterPlan: leaf smaller than the minimum cluster size");
    return;
  }
  const Split& s = *split;
  if (s.count < 2) throw contract_error("ClusterPlan: split must produce at least two clusters");
  if (size % s.count != 0) throw contract_error("ClusterPlan: split count must divide the group size");
  if (!s.child || !s.rep) throw contract_error("ClusterPlan: split missing sub-plans");
  if (s.child->size != size / s.count) throw contract_error("ClusterPlan: child size mismatch");
  if (s.rep->size != s.count) throw contract_error("ClusterPlan: representative plan size mismatch");
  s.child->validate(eta);
  // Representative groups are not part of the transmit partition; their
  // leaves are not bound by eta.
  s.rep->validate(1);
}

bool operator==(const ClusterPlan& a, const ClusterPlan& b) {
  if (a.size != b.size || a.is_leaf() != b.is_leaf()) return false;
  if (a.is_leaf()) return true;
  return a.split->count == b.split->count && *a.split->child == *b.split->child &&
         *a.split->rep == *b.split->rep;
}

std::string serialize_plan(const ClusterPlan& plan) {
  if (plan.is_leaf()) return "leaf(" + std::to_string(plan.size) + ")";
  return "split(" + std::to_string(plan.split->count) + " x " + serialize_plan(*plan.split->child) +
         ", rep=" + serialize_plan(*plan.split->rep) + ")";
}

namespace {

struct PlanParser {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool consume(std::string_view token) {
    skip_ws();
    if (text.substr(pos, token.size()) == token) {
      pos += token.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view token) {
    if (!consume(token)) {
      throw parse_error("cluster plan: expected '" + std::string(token) + "' at offset " +
                            std::to_string(pos),
                        1);
    }
  }

  std::size_t number() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start) throw parse_error("cluster plan: expected a number at offset " + std::to_string(pos), 1);
    return static_cast<std::size_t>(std::stoull(std::string(text.substr(start, pos - start))));
  }

  ClusterPlan plan() {
    skip_ws();
    if (consume("leaf")) {
      expect("(");
      const std::size_t size = number();
      expect(")");
      return ClusterPlan::leaf(size);
    }
    expect("split");
    expect("(");
    const std::size_t count = number();
    expect("x");
    ClusterPlan child = plan();
    expect(",");
    expect("rep=");
    ClusterPlan rep = plan();
    expect(")");
    if (rep.size != count) throw parse_error("cluster plan: rep plan size must equal the split count", 1);
    return ClusterPlan::make_split(count * child.size, count, std::move(child), std::move(rep));
  }
};

}  // namespace

ClusterPlan parse_plan(std::string_view text) {
  PlanParser parser{text};
  ClusterPlan p = parser.plan();
  parser.skip_ws();
  if (parser.pos != text.size()) {
    throw parse_error("cluster plan: trailing characters at offset " + std::to_string(parser.pos), 1);
  }
  return p;
}

double CostModel::flat(std::size_t m, Objective objective) const {
  if (c <= 0.0) throw contract_error("CostModel: c must be > 0");
  if (k < 2) throw contract_error("CostModel: k must be >= 2");
  const double time = c * static_cast<double>(k) * static_cast<double>(m) *
                      std::log(static_cast<double>(m));
  if (objective == Objective::kTime) return time;
  return time * per_iteration_energy(m);
}

namespace {

double combine(double rep_cost, double count, double cluster_cost, CostVariant variant) {
  if (variant == CostVariant::kVerbatim) return rep_cost * count * cluster_cost;
  return rep_cost + count * cluster_cost;
}

}  // namespace

HierarchyResult optimal_hierarchy(std::size_t n, std::size_t eta, const CostModel& model,
                                  Objective objective, CostVariant variant) {
  if (eta < 1 || eta > n) throw contract_error("optimal_hierarchy: need 1 <= eta <= n");

  std::vector<double> best(n + 1, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> best_m(n + 1, 0);  // 0 = no split
  for (std::size_t i = 1; i <= n; ++i) {
    best[i] = model.flat(i, objective);
    // m = cluster size; needs m >= eta, at least two clusters.
    for (std::size_t m = std::max<std::size_t>(eta, 2); m < i; ++m) {
      if (i % m != 0) continue;
      const std::size_t count = i / m;
      const double cand = combine(best[count], static_cast<double>(count), best[m], variant);
      if (cand < best[i]) {
        best[i] = cand;
        best_m[i] = m;
      }
    }
  }

  const std::function<ClusterPlan(std::size_t)> build = [&](std::size_t i) -> ClusterPlan {
    if (best_m[i] == 0) return ClusterPlan::leaf(i);
    const std::size_t m = best_m[i];
    return ClusterPlan::make_split(i, i / m, build(m), build(i / m));
  };

  HierarchyResult result{build(n), best[n]};
  result.plan.validate(1);  // structural sanity; eta holds by construction for split leaves
  return result;
}

double plan_cost(const ClusterPlan& plan, const CostModel& model, Objective objective,
                 CostVariant variant) {
  if (plan.is_leaf()) return model.flat(plan.size, objective);
  const ClusterPlan::Split& s = *plan.split;
  return combine(plan_cost(*s.rep, model, objective, variant), static_cast<double>(s.count),
                 plan_cost(*s.child, model, objective, variant), variant);
}

namespace {

struct HierRunner {
  const NodeField& field;
  const OptimizerConfig& cfg;
  Metric metric;
  const NoiseModel& noise;
  const HierOptions& options;
  std::uint64_t seed;

  PhaseState phases;
  RunTrace composite;
  std::size_t stage_counter = 0;
  std::size_t iteration_offset = 0;

  void append_stage(const RunTrace& stage, const std::string& label) {
    composite.stages.push_back({composite.records.size(), label});
    for (TraceRecord r : stage.records) {
      r.iteration += iteration_offset;
      composite.records.push_back(r);
    }
    iteration_offset += stage.total_iterations();
    composite.max_iterations += stage.max_iterations;
  }

  /// Synchronise the given group (only these nodes transmit) to the arc
  /// target 4pi/stage_k and write the resulting phases back. Splits hand
  /// their children and representatives a doubled stage_k: an intra-cluster
  /// spread of 4pi/2K plus an inter-representative spread of 4pi/2K composes
  /// to the group's own 4pi/K target.
  void sync_group(const std::vector<std::size_t>& indices, const ClusterPlan& plan,
                  const std::string& label, std::size_t stage_k) {
    if (indices.empty()) throw contract_error("run_hierarchical_sync: empty cluster");
    if (indices.size() != plan.size) {
      throw contract_error("run_hierarchical_sync: plan does not cover its group");
    }

    if (plan.is_leaf()) {
      run_stage(indices, label, stage_k);
      return;
    }

    const ClusterPlan::Split& split = *plan.split;
    const std::size_t cluster_size = plan.size / split.count;
    std::vector<std::vector<std::size_t>> clusters(split.count);
    for (std::size_t c = 0; c < split.count; ++c) {
      clusters[c].assign(indices.begin() + static_cast<std::ptrdiff_t>(c * cluster_size),
                         indices.begin() + static_cast<std::ptrdiff_t>((c + 1) * cluster_size));
    }

    const std::size_t sub_k = stage_k > 0 ? 2 * stage_k : 0;
    for (std::size_t c = 0; c < split.count; ++c) {
      sync_group(clusters[c], *split.child, label + "/cluster" + std::to_string(c), sub_k);
    }

    // Representatives: the lowest node index of each cluster.
    std::vector<std::size_t> reps;
    reps.reserve(split.count);
    std::vector<double> rep_before;
    for (const auto& cluster : clusters) {
      reps.push_back(cluster.front());
      rep_before.push_back(phases.gamma[cluster.front()]);
    }

    sync_group(reps, *split.rep, label + "/reps", sub_k);

    // Broadcast: every mate applies its representative's net phase change,
    // keeping intra-cluster differences intact.
    for (std::size_t c = 0; c < split.count; ++c) {
      const double delta = wrap_pi(phases.gamma[reps[c]] - rep_before[c]);
      for (std::size_t j = 1; j < clusters[c].size(); ++j) {
        const std::size_t node = clusters[c][j];
        phases.gamma[node] = wrap_2pi(phases.gamma[node] + delta);
      }
    }
  }

  void run_stage(const std::vector<std::size_t>& indices, const std::string& label,
                 std::size_t stage_k) {
    const NodeField sub = field.subset(indices);
    const PhaseState sub_init = phases.subset(indices);
    const std::uint64_t stage_seed = derive_stream(seed, stage_counter++);

    if (options.engine == StageEngine::kOptimal && indices.size() >= 2) {
      OptimalRunResult r = run_optimal_algorithm(sub, sub_init, noise, options.optimal, stage_seed);
      phases.scatter(indices, r.trace.terminal_state);
      append_stage(r.trace, label);
      return;
    }
    if (indices.size() < 2) {
      // single node: nothing to optimise
      composite.stages.push_back({composite.records.size(), label + " (singleton)"});
      return;
    }
    LoopOptions loop_options;
    loop_options.optimum_k = stage_k;
    loop_options.stop_on_optimum = stage_k > 0;
    RunTrace t = run_feedback_loop(sub, sub_init, cfg, metric, noise, stage_seed, loop_options);
    phases.scatter(indices, t.terminal_state);
    append_stage(t, label);
  }
};

}  // namespace

RunTrace run_hierarchical_sync(const NodeField& field, const ClusterPlan& plan,
                               const OptimizerConfig& cfg, Metric metric, const NoiseModel& noise,
                               std::uint64_t seed, const HierOptions& options) {
  if (plan.size != field.size()) {
    throw contract_error("run_hierarchical_sync: plan does not cover the field's nodes");
  }
  plan.validate(1);

  HierRunner runner{field, cfg, metric, noise, options, seed, PhaseState{}, RunTrace{}, 0, 0};
  Rng init_rng(derive_stream(seed, 1000));
  runner.phases = PhaseState::random(field.size(), init_rng);
  runner.composite.seed = seed;
  runner.composite.metric = metric;
  runner.composite.initial_feedback = amplitude_feedback(field, runner.phases).score;

  std::vector<std::size_t> all(field.size());
  std::iota(all.begin(), all.end(), 0);

  if (plan.is_leaf()) {
    // Degenerate single-cluster plan: the leaf loop already involves every
    // node, so it doubles as the final refinement.
    runner.run_stage(all, "flat", options.optimum_k);
  } else {
    runner.sync_group(all, plan, "top", options.optimum_k);
    if (options.final_refinement) runner.run_stage(all, "final", options.optimum_k);
  }

  runner.composite.terminal_state = runner.phases;
  return runner.composite;
}

}  // namespace csync
