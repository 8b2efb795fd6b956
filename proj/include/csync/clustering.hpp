#ifndef CSYNC_CLUSTERING_HPP
#define CSYNC_CLUSTERING_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "csync/optimizer.hpp"

namespace csync {

/// Rooted plan tree. A node either synchronises its whole group flat (leaf)
/// or splits it into `count` equal clusters, runs the child plan in each,
/// synchronises the representatives (one per cluster) with the rep plan, and
/// broadcasts the representatives' corrections.
struct ClusterPlan {
  struct Split {
    std::size_t count = 2;  // number of child clusters
    std::shared_ptr<const ClusterPlan> child;  // plan for each cluster (size/count nodes)
    std::shared_ptr<const ClusterPlan> rep;    // plan for the representative group (count nodes)
  };

  std::size_t size = 1;
  std::optional<Split> split;

  bool is_leaf() const { return !split.has_value(); }
  static ClusterPlan leaf(std::size_t size);
  static ClusterPlan make_split(std::size_t size, std::size_t count, ClusterPlan child,
                                ClusterPlan rep);

  /// Structural checks: split counts divide sizes, child/rep sizes line up,
  /// and every transmit-cluster leaf in the main partition has >= eta nodes.
  void validate(std::size_t eta) const;
};

bool operator==(const ClusterPlan& a, const ClusterPlan& b);

/// Compact textual form used by the experiment config format, e.g.
///   leaf(8)
///   split(8 x leaf(8), rep=leaf(8))
std::string serialize_plan(const ClusterPlan& plan);
ClusterPlan parse_plan(std::string_view text);

enum class Objective { kTime, kEnergy };
enum class CostVariant { kAdditive, kVerbatim };

struct CostModel {
  double c = 1.0;
  std::size_t k = 16;
  /// Energy drawn by a transmitting group of m nodes in one iteration.
  std::function<double(std::size_t)> per_iteration_energy = [](std::size_t m) {
    return static_cast<double>(m);
  };

  /// Flat (no-split) cost of synchronising m nodes: c*k*m*ln(m), times the
  /// per-iteration energy for the energy objective.
  double flat(std::size_t m, Objective objective) const;
};

struct HierarchyResult {
  ClusterPlan plan;
  double cost = 0.0;
};

/// Bottom-up dynamic program over divisors (O(n^2) table fill). Transmit
/// clusters must have at least eta nodes; representative groups recurse
/// under the same rules with the flat formula as their base. kVerbatim
/// composes sub-costs multiplicatively exactly as printed in the source
/// recursion; kAdditive sums stage times (cluster syncs + representative
/// sync) and is the planner default.
HierarchyResult optimal_hierarchy(std::size_t n, std::size_t eta, const CostModel& model,
                                  Objective objective, CostVariant variant = CostVariant::kAdditive);

/// Cost of a concrete plan under the given model/variant (tree walk).
double plan_cost(const ClusterPlan& plan, const CostModel& model, Objective objective,
                 CostVariant variant);

enum class StageEngine { kLoop, kOptimal };

struct HierOptions {
  StageEngine engine = StageEngine::kLoop;
  /// Overall arc target: the final refinement stops at the k-interval
  /// optimum predicate. Sub-stages aim for progressively halved arcs
  /// (stage k doubled per level) so their spreads compose to the overall
  /// target. 0 disables predicates and stages run to cap/threshold.
  std::size_t optimum_k = 0;
  OptimalAlgoConfig optimal{};
  bool final_refinement = true;
};

/// Staged execution of a plan: per-cluster loops with only that cluster
/// transmitting, representative sync, broadcast application of each
/// representative's net phase change to its cluster mates, and a final
/// all-node refinement. Returns a concatenated trace with stage markers.
RunTrace run_hierarchical_sync(const NodeField& field, const ClusterPlan& plan,
                               const OptimizerConfig& cfg, Metric metric, const NoiseModel& noise,
                               std::uint64_t seed, const HierOptions& options = {});

}  // namespace csync

#endif  // CSYNC_CLUSTERING_HPP
