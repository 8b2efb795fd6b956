#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "csync/clustering.hpp"
#include "csync/errors.hpp"
#include "csync/search_space.hpp"

using namespace csync;

namespace {

// Test-side oracle: enumerate every divisor tree explicitly and cost each by
// an independent tree walk. No memoization shared with the implementation.
std::vector<ClusterPlan> enumerate_plans(std::size_t size, std::size_t eta) {
  std::vector<ClusterPlan> plans{ClusterPlan::leaf(size)};
  for (std::size_t m = std::max<std::size_t>(eta, 2); m < size; ++m) {
    if (size % m != 0) continue;
    const std::size_t count = size / m;
    // representative groups fall outside the transmit partition: eta-free
    for (const ClusterPlan& child : enumerate_plans(m, eta)) {
      for (const ClusterPlan& rep : enumerate_plans(count, 1)) {
        plans.push_back(ClusterPlan::make_split(size, count, child, rep));
      }
    }
  }
  return plans;
}

double oracle_cost(const ClusterPlan& plan, const CostModel& model, Objective objective,
                   CostVariant variant) {
  if (plan.is_leaf()) {
    double v = model.c * static_cast<double>(model.k) * static_cast<double>(plan.size) *
               std::log(static_cast<double>(plan.size));
    if (objective == Objective::kEnergy) v *= model.per_iteration_energy(plan.size);
    return v;
  }
  const double child = oracle_cost(*plan.split->child, model, objective, variant);
  const double rep = oracle_cost(*plan.split->rep, model, objective, variant);
  const double count = static_cast<double>(plan.split->count);
  return variant == CostVariant::kVerbatim ? rep * count * child : rep + count * child;
}

double oracle_best(std::size_t n, std::size_t eta, const CostModel& model, Objective objective,
                   CostVariant variant) {
  double best = std::numeric_limits<double>::infinity();
  for (const ClusterPlan& plan : enumerate_plans(n, eta)) {
    best = std::min(best, oracle_cost(plan, model, objective, variant));
  }
  return best;
}

NodeField random_field(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> rss(n), phi(n), psi(n);
  for (std::size_t i = 0; i < n; ++i) {
    rss[i] = rng.uniform(0.8, 1.2);
    phi[i] = rng.angle();
    psi[i] = rng.angle();
  }
  return NodeField::from_links(rss, phi, psi);
}

}  // namespace

TEST_CASE("optimal_hierarchy base case") {
  CostModel model;
  model.c = 1.0;
  model.k = 4;
  const HierarchyResult r = optimal_hierarchy(8, 8, model, Objective::kTime);
  CHECK(r.plan.is_leaf());
  CHECK(r.cost == doctest::Approx(4.0 * 8.0 * std::log(8.0)).epsilon(1e-12));
  CHECK_THROWS_AS(optimal_hierarchy(4, 5, model, Objective::kTime), contract_error);
}

TEST_CASE("optimal_hierarchy n=4 eta=2 equals the exhaustive enumeration") {
  CostModel model;
  model.c = 1.0;
  model.k = 4;
  for (CostVariant variant : {CostVariant::kAdditive, CostVariant::kVerbatim}) {
    const HierarchyResult dp = optimal_hierarchy(4, 2, model, Objective::kTime, variant);
    const double oracle = oracle_best(4, 2, model, Objective::kTime, variant);
    CHECK(dp.cost == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("optimal_hierarchy matches brute force for n <= 24, both variants and objectives") {
  CostModel model;
  model.c = 2.0;
  model.k = 16;
  for (std::size_t eta : {2, 4, 8}) {
    for (std::size_t n = eta; n <= 24; ++n) {
      for (CostVariant variant : {CostVariant::kAdditive, CostVariant::kVerbatim}) {
        for (Objective objective : {Objective::kTime, Objective::kEnergy}) {
          const HierarchyResult dp = optimal_hierarchy(n, eta, model, objective, variant);
          const double oracle = oracle_best(n, eta, model, objective, variant);
          CHECK(dp.cost == doctest::Approx(oracle).epsilon(1e-9));
          CHECK(dp.cost == doctest::Approx(plan_cost(dp.plan, model, objective, variant)).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("DP never loses to the flat plan and is monotone in eta") {
  CostModel model;
  model.c = 1.0;
  model.k = 16;
  const double flat = model.flat(64, Objective::kTime);
  const HierarchyResult dp = optimal_hierarchy(64, 4, model, Objective::kTime);
  CHECK(dp.cost <= flat + 1e-12);

  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t eta : {16, 8, 4, 2}) {  // relaxing eta can only help
    const double cost = optimal_hierarchy(64, eta, model, Objective::kTime).cost;
    CHECK(cost <= prev + 1e-12);
    prev = cost;
  }
}

TEST_CASE("plan serialization round-trips") {
  CostModel model;
  const HierarchyResult dp = optimal_hierarchy(64, 4, model, Objective::kTime);
  const std::string text = serialize_plan(dp.plan);
  const ClusterPlan parsed = parse_plan(text);
  CHECK(parsed == dp.plan);
  CHECK(serialize_plan(parsed) == text);

  const ClusterPlan manual = parse_plan("split(4 x leaf(16), rep=split(2 x leaf(2), rep=leaf(2)))");
  CHECK(manual.size == 64);
  CHECK_FALSE(manual.is_leaf());
  CHECK(manual.split->count == 4);
  CHECK_THROWS_AS(parse_plan("split(3 x leaf(4), rep=leaf(2))"), parse_error);
  CHECK_THROWS_AS(parse_plan("leaf(4) trailing"), parse_error);
}

TEST_CASE("plan validation") {
  CHECK_THROWS_AS(parse_plan("leaf(1)").validate(2), contract_error);
  const ClusterPlan ok = parse_plan("split(2 x leaf(4), rep=leaf(2))");
  ok.validate(4);
  CHECK_THROWS_AS(ok.validate(8), contract_error);  // leaves of 4 below eta=8
}

TEST_CASE("step-4 broadcast preserves intra-cluster pairwise differences exactly") {
  // an internally aligned cluster stays internally aligned after the common
  // correction, to 1e-12
  Rng rng(5);
  std::vector<double> phases(6);
  for (double& p : phases) p = rng.angle();
  const double delta = 2.1234;
  std::vector<double> corrected(6);
  for (std::size_t i = 0; i < 6; ++i) corrected[i] = wrap_2pi(phases[i] + delta);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      const double before = wrap_pi(phases[i] - phases[j]);
      const double after = wrap_pi(corrected[i] - corrected[j]);
      CHECK(std::abs(wrap_pi(after - before)) < 1e-12);
    }
  }
}

TEST_CASE("hierarchical sync with the exact stage engine aligns two clusters of two") {
  const NodeField field = random_field(4, 91);
  const ClusterPlan plan = parse_plan("split(2 x leaf(2), rep=leaf(2))");
  OptimizerConfig cfg;
  HierOptions options;
  options.engine = StageEngine::kOptimal;
  const RunTrace t = run_hierarchical_sync(field, plan, cfg, Metric::kSumAmplitude,
                                           NoiseModel::none(), 17, options);
  const double amp = amplitude_feedback(field, t.terminal_state).score;
  CHECK(amp == doctest::Approx(field.rss_sum()).epsilon(1e-6));
  // stage markers: 2 clusters, reps, final
  CHECK(t.stages.size() == 4);
}

TEST_CASE("a single-cluster plan degenerates to the flat feedback loop") {
  const NodeField field = random_field(6, 92);
  OptimizerConfig cfg;
  cfg.stop.max_iterations = 300;
  const std::uint64_t seed = 41;
  HierOptions options;
  options.optimum_k = 8;
  const RunTrace hier = run_hierarchical_sync(field, ClusterPlan::leaf(6), cfg,
                                              Metric::kSumAmplitude, NoiseModel::none(), seed,
                                              options);

  // same init draw and stage seed as the runner uses
  Rng init_rng(derive_stream(seed, 1000));
  const PhaseState init = PhaseState::random(6, init_rng);
  LoopOptions loop_options;
  loop_options.optimum_k = 8;
  loop_options.stop_on_optimum = true;
  const RunTrace flat = run_feedback_loop(field, init, cfg, Metric::kSumAmplitude,
                                          NoiseModel::none(), derive_stream(seed, 0), loop_options);
  REQUIRE(hier.records.size() == flat.records.size());
  for (std::size_t i = 0; i < flat.records.size(); ++i) {
    CHECK(hier.records[i].proposed == flat.records[i].proposed);
    CHECK(hier.records[i].accepted == flat.records[i].accepted);
  }
}

TEST_CASE("clustered runs beat the flat median for n=64, k=16") {
  const std::size_t n = 64, k = 16;
  const ClusterPlan plan = parse_plan("split(8 x leaf(8), rep=leaf(8))");

  OptimizerConfig cfg;
  cfg.grid_k = k;
  cfg.stop.max_iterations = static_cast<std::size_t>(3.0 * 64 * 16 * std::log(64.0));
  HierOptions options;
  options.optimum_k = k;

  std::vector<double> clustered, flat;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const NodeField field = random_field(n, 200 + s);
    const RunTrace hier = run_hierarchical_sync(field, plan, cfg, Metric::kSumAmplitude,
                                                NoiseModel::none(), 300 + s, options);
    clustered.push_back(static_cast<double>(hier.total_iterations()));

    Rng init_rng(500 + s);
    PhaseState init = PhaseState::random(n, init_rng);
    LoopOptions loop_options;
    loop_options.optimum_k = k;
    loop_options.stop_on_optimum = true;
    const RunTrace t = run_feedback_loop(field, init, cfg, Metric::kSumAmplitude,
                                         NoiseModel::none(), 400 + s, loop_options);
    const auto hit = t.first_optimum_iteration();
    flat.push_back(hit ? static_cast<double>(*hit)
                       : static_cast<double>(cfg.stop.max_iterations));
  }
  std::sort(clustered.begin(), clustered.end());
  std::sort(flat.begin(), flat.end());
  CHECK(0.5 * (clustered[4] + clustered[5]) < 0.5 * (flat[4] + flat[5]));
}

TEST_CASE("hierarchical sync rejects a plan that does not cover the field") {
  const NodeField field = random_field(6, 93);
  CHECK_THROWS_AS(run_hierarchical_sync(field, ClusterPlan::leaf(4), OptimizerConfig{},
                                        Metric::kSumAmplitude, NoiseModel::none(), 1),
                  contract_error);
}
