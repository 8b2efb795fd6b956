#include <doctest.h>

#include <cmath>

#include "csync/analysis.hpp"
#include "csync/errors.hpp"

using namespace csync;

namespace {

RunTrace synthetic_trace(std::size_t hit, std::size_t cap) {
  RunTrace t;
  t.max_iterations = cap;
  t.initial_feedback = 0.0;
  for (std::size_t i = 1; i <= cap; ++i) {
    TraceRecord r;
    r.iteration = i;
    r.accepted = i >= hit ? 1.0 : 0.0;
    r.optimum = i >= hit;
    t.records.push_back(r);
  }
  t.terminal_state = PhaseState::zeros(4);
  return t;
}

NodeField unit_field(std::size_t n) {
  return NodeField::from_links(std::vector<double>(n, 1.0), std::vector<double>(n, 0.0),
                               std::vector<double>(n, 0.0));
}

}  // namespace

TEST_CASE("bound_global_upper closed-form values") {
  CHECK(bound_global_upper(1, 2) == doctest::Approx(2.0 * std::exp(1.0)).epsilon(1e-12));
  CHECK(bound_global_upper(1, 2) == doctest::Approx(5.43656).epsilon(1e-5));
  CHECK(bound_global_upper(100, 8) == doctest::Approx(12189.2).epsilon(1e-4));
  // linear in k
  CHECK(bound_global_upper(37, 16) == doctest::Approx(2.0 * bound_global_upper(37, 8)).epsilon(1e-12));
}

TEST_CASE("bound_local_reference closed-form values") {
  // n=64, N=2, k=256: 128 ln 64 + ln 256 / 2
  const double expected = 128.0 * std::log(64.0) + std::log(256.0) / 2.0;
  CHECK(bound_local_reference(64, 2.0, 256) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(535.11).epsilon(1e-4));
  // n=1: additive term only
  CHECK(bound_local_reference(1, 4.0, 16) == doctest::Approx(std::log(16.0) / 4.0).epsilon(1e-12));
  // N = k orders like the global family up to the additive log k / k term
  const double local_at_k = bound_local_reference(50, 16.0, 16);
  CHECK(local_at_k == doctest::Approx(bound_global_theta(50, 16) + std::log(16.0) / 16.0).epsilon(1e-12));
}

TEST_CASE("bounds are strictly increasing in n and k") {
  for (std::size_t n = 2; n < 120; n += 13) {
    CHECK(bound_global_upper(n + 1, 8) > bound_global_upper(n, 8));
    CHECK(bound_global_theta(n + 1, 8) > bound_global_theta(n, 8));
    CHECK(bound_global_upper(n, 16) > bound_global_upper(n, 8));
  }
}

TEST_CASE("local bound is unimodal in the neighbourhood with the expected minimizer") {
  // pick an instance whose minimizer sqrt(ln k / (n ln n)) lies inside the
  // [1, k] domain: n=2, k=256 puts it at exactly 2
  const std::size_t n = 2, k = 256;
  const double n_star = std::sqrt(std::log(static_cast<double>(k)) /
                                  (static_cast<double>(n) * std::log(static_cast<double>(n))));
  CHECK(n_star == doctest::Approx(2.0).epsilon(1e-12));
  // decreasing before the minimizer, increasing after
  double prev = bound_local_reference(n, 1.0, k);
  for (double x = 1.25; x < n_star; x += 0.25) {
    const double cur = bound_local_reference(n, x, k);
    CHECK(cur < prev);
    prev = cur;
  }
  prev = bound_local_reference(n, n_star, k);
  for (double x = n_star * 2.0; x <= static_cast<double>(k); x *= 2.0) {
    const double cur = bound_local_reference(n, x, k);
    CHECK(cur > prev);
    prev = cur;
  }
  // numeric minimizer close to the closed form
  double best_x = 0.0, best = 1e300;
  for (double x = 1.0; x <= static_cast<double>(k); x *= 1.001) {
    const double v = bound_local_reference(n, x, k);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  CHECK(best_x == doctest::Approx(n_star).epsilon(0.01));
}

TEST_CASE("measure_sync_time basics") {
  std::vector<RunTrace> traces;
  traces.push_back(synthetic_trace(3, 10));
  traces.push_back(synthetic_trace(5, 10));
  traces.push_back(synthetic_trace(7, 10));
  const SyncTimeEntry e = measure_sync_time(traces, hit_by_optimum());
  CHECK(e.median == doctest::Approx(5.0));
  CHECK(e.censored_fraction == 0.0);

  // a trace that starts at success has hitting time 0
  RunTrace immediate;
  immediate.initial_optimum = true;
  immediate.initial_feedback = 1.0;
  immediate.max_iterations = 10;
  immediate.terminal_state = PhaseState::zeros(4);
  const SyncTimeEntry zero = measure_sync_time(std::vector<RunTrace>{immediate}, hit_by_optimum());
  CHECK(zero.median == doctest::Approx(0.0));

  // all censored
  std::vector<RunTrace> censored;
  censored.push_back(synthetic_trace(99, 10));  // never hits within 10
  censored.back().records.resize(10);
  for (auto& r : censored.back().records) r.optimum = false;
  const SyncTimeEntry c = measure_sync_time(censored, hit_by_optimum());
  CHECK(c.censored_fraction == doctest::Approx(1.0));
  CHECK(c.median == doctest::Approx(10.0));  // cap convention

  CHECK_THROWS_AS(measure_sync_time(std::vector<RunTrace>{}, hit_by_optimum()), contract_error);
}

TEST_CASE("fit_scaling recognizes the exact family and rejects a wrong one") {
  // T(n) = 7 n ln n against reference n ln n (k fixed): all ratios 7
  const BoundSpec ref{BoundFamily::kGlobalTheta, 8, 2, 1.0};
  std::vector<SyncTimeEntry> entries;
  for (std::size_t n : {8, 16, 32, 64}) {
    SyncTimeEntry e;
    e.n = n;
    e.median = 7.0 * static_cast<double>(n) * 2.0 * std::log(static_cast<double>(n));
    e.samples = 5;
    entries.push_back(e);
  }
  const ScalingReport good = fit_scaling(entries, ref);
  CHECK(good.spread == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(good.consistent);
  for (const ScalingRow& row : good.rows) CHECK(row.ratio == doctest::Approx(7.0).epsilon(1e-9));

  // quadratic growth flagged as inconsistent
  std::vector<SyncTimeEntry> bad;
  for (std::size_t n : {8, 16, 32, 64}) {
    SyncTimeEntry e;
    e.n = n;
    e.median = static_cast<double>(n) * static_cast<double>(n);
    e.samples = 5;
    bad.push_back(e);
  }
  const ScalingReport wrong = fit_scaling(bad, ref);
  CHECK(wrong.spread > 2.0);
  CHECK_FALSE(wrong.consistent);

  // censored-dominated entries are excluded with a warning
  bad[1].censored_fraction = 0.8;
  const ScalingReport excl = fit_scaling(bad, ref);
  CHECK(excl.rows[1].excluded);
  CHECK(!excl.warnings.empty());

  CHECK_THROWS_AS(fit_scaling(std::vector<SyncTimeEntry>(bad.begin(), bad.begin() + 2), ref),
                  contract_error);
}

TEST_CASE("phase_dispersion reference cases") {
  // identical phases: fraction 1, variance 0
  const NodeField f4 = unit_field(4);
  const Dispersion all = phase_dispersion(PhaseState({1.1, 1.1, 1.1, 1.1}), f4);
  CHECK(all.within_band_fraction == doctest::Approx(1.0));
  CHECK(all.circular_variance == doctest::Approx(0.0).epsilon(1e-12));

  // uniform phases: fraction ~ band/(pi), variance ~ pi^2/3 (moments of the
  // uniform distribution on the circle)
  const std::size_t n = 20000;
  const NodeField big = unit_field(n);
  Rng rng(3);
  PhaseState u = PhaseState::zeros(n);
  for (double& g : u.gamma) g = rng.angle();
  const Dispersion uni = phase_dispersion(u, big);
  CHECK(uni.within_band_fraction == doctest::Approx(0.1).epsilon(0.1));
  CHECK(uni.circular_variance == doctest::Approx(kPi * kPi / 3.0).epsilon(0.05));

  // two antipodal phases: fraction 0.5 under the documented tie rule
  const NodeField f2 = unit_field(2);
  const Dispersion anti = phase_dispersion(PhaseState({0.0, kPi}), f2);
  CHECK(anti.within_band_fraction == doctest::Approx(0.5));
}

TEST_CASE("phase_dispersion is invariant under a common rotation") {
  const std::size_t n = 50;
  const NodeField f = unit_field(n);
  Rng rng(9);
  const PhaseState s = PhaseState::random(n, rng);
  const Dispersion base = phase_dispersion(s, f);
  for (double shift : {0.5, 2.5, 5.0}) {
    const Dispersion rotated = phase_dispersion(s.shifted(shift), f);
    CHECK(rotated.within_band_fraction == doctest::Approx(base.within_band_fraction));
    CHECK(std::abs(rotated.circular_variance - base.circular_variance) < 1e-12);
  }
}
