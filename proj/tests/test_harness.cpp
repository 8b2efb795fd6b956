#include <doctest.h>

#include <cmath>

#include "csync/config.hpp"
#include "csync/errors.hpp"
#include "csync/experiment.hpp"

using namespace csync;

TEST_CASE("ini parsing") {
  const IniFile ini = IniFile::parse("top = 1\n[a]\nx = 2 # comment\ny = hello world\n\n[b]\n",
                                     "test.ini");
  CHECK(ini.find("", "top")->value == "1");
  CHECK(ini.find("a", "x")->value == "2");
  CHECK(ini.find("a", "y")->value == "hello world");
  CHECK(ini.has_section("b"));
  CHECK(ini.find("a", "missing") == nullptr);

  CHECK_THROWS_AS(IniFile::parse("[broken\nx=1", "t"), parse_error);
  CHECK_THROWS_AS(IniFile::parse("just a line", "t"), parse_error);
  CHECK_THROWS_AS(IniFile::parse("[a]\nx=1\nx=2", "t"), parse_error);
  try {
    IniFile::parse("[a]\nno equals sign here", "t");
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("edit distance and suggestions") {
  CHECK(edit_distance("p_mutt", "p_mut") == 1);
  CHECK(edit_distance("abc", "abc") == 0);
  CHECK(suggest("p_mutt", {"p_mut", "dist", "variance"}) == "p_mut");
  CHECK(suggest("zzzzzz", {"p_mut", "dist"}).empty());
}

TEST_CASE("empty config yields the reference defaults") {
  const ExperimentConfig cfg = parse_config("");
  CHECK(cfg.n == 100);
  CHECK(cfg.field.area_width == doctest::Approx(30.0));
  CHECK(cfg.field.area_depth == doctest::Approx(30.0));
  CHECK(cfg.field.rx_height == doctest::Approx(30.0));
  CHECK(cfg.field.carrier_frequency == doctest::Approx(2.4e9));
  CHECK(cfg.field.tx_power == doctest::Approx(1e-3));
  CHECK(cfg.field.tx_gain == doctest::Approx(1.0));  // 0 dB
  CHECK(cfg.field.rx_gain == doctest::Approx(1.0));
  CHECK(cfg.optimizer.stop.max_iterations == 6000);
  CHECK(cfg.replication == 10);
  CHECK(cfg.noise.kind == NoiseKind::kAwgn);
  // -103 dBm in watts
  CHECK(cfg.noise.power == doctest::Approx(std::pow(10.0, -103.0 / 10.0) * 1e-3).epsilon(1e-9));
  CHECK(cfg.metric == Metric::kNegatedRmse);
  CHECK(cfg.optimizer.p_mut == kAutoPMut);  // 1/n
}

TEST_CASE("config validation errors name the violated invariant") {
  CHECK_THROWS_WITH_AS(parse_config("[optimizer]\np_mut = 1.5\n"), doctest::Contains("p_mut"),
                       validation_error);
  CHECK_THROWS_WITH_AS(parse_config("[optimizer]\nneighbourhood = 7.0\n"),
                       doctest::Contains("neighbourhood"), validation_error);
  CHECK_THROWS_WITH_AS(parse_config("[field]\nn = 0\n"), doctest::Contains("n must be"),
                       validation_error);
}

TEST_CASE("unknown keys are rejected with a suggestion") {
  CHECK_THROWS_WITH_AS(parse_config("[optimizer]\np_mutt = 0.5\n"), doctest::Contains("p_mut"),
                       validation_error);
  CHECK_THROWS_WITH_AS(parse_config("[optimiser]\np_mut = 0.5\n"), doctest::Contains("optimizer"),
                       validation_error);
  try {
    parse_config("[optimizer]\np_mutt = 0.5\n");
    FAIL("expected validation_error");
  } catch (const validation_error& e) {
    CHECK(std::string(e.what()).find("did you mean") != std::string::npos);
  }
}

TEST_CASE("config round-trips through serialization") {
  const std::string text =
      "[experiment]\n"
      "scenario = roundtrip\n"
      "replication = 3\n"
      "base_seed = 42\n"
      "metric = amplitude\n"
      "[field]\n"
      "n = 8\n"
      "rx_height = 100\n"
      "[noise]\n"
      "kind = none\n"
      "[optimizer]\n"
      "p_mut = 0.125\n"
      "dist = normal\n"
      "variance = 0.785\n"
      "neighbourhood = 1.885\n"
      "revert = complementary\n"
      "max_iterations = 123\n"
      "feedback_threshold = 7.5\n"
      "grid_k = 16\n"
      "[cluster]\n"
      "plan = split(2 x leaf(4), rep=leaf(2))\n"
      "engine = optimal\n"
      "optimum_k = 8\n"
      "[gate]\n"
      "enabled = true\n"
      "min_passing_runs = 2\n";
  const ExperimentConfig cfg = parse_config(text);
  const std::string serialized = serialize_config(cfg);
  const ExperimentConfig reparsed = parse_config(serialized);
  CHECK(serialize_config(reparsed) == serialized);
  CHECK(reparsed.scenario == "roundtrip");
  CHECK(reparsed.n == 8);
  CHECK(reparsed.optimizer.p_mut == doctest::Approx(0.125));
  CHECK(reparsed.optimizer.revert_policy == RevertPolicy::kComplementary);
  CHECK(reparsed.optimizer.stop.feedback_threshold.has_value());
  CHECK(reparsed.cluster_plan.has_value());
  CHECK(reparsed.cluster_plan->size == 8);
  CHECK(reparsed.cluster_engine == StageEngine::kOptimal);
  CHECK(reparsed.gate.enabled);
}

TEST_CASE("run_experiment determinism: identical CSV bodies for a fixed seed") {
  ExperimentConfig cfg;
  cfg.n = 8;
  cfg.replication = 3;
  cfg.optimizer.stop.max_iterations = 200;
  cfg.metric = Metric::kSumAmplitude;
  cfg.noise = NoiseModel::none();
  cfg.base_seed = 11;

  const ResultBundle a = run_experiment(cfg);
  const ResultBundle b = run_experiment(cfg);
  CHECK(series_csv(a) == series_csv(b));
  CHECK(summary_csv(a) == summary_csv(b));

  // parallel execution does not change the result
  cfg.jobs = 3;
  const ResultBundle c = run_experiment(cfg);
  CHECK(series_csv(a) == series_csv(c));
  CHECK(summary_csv(a) == summary_csv(c));

  // adding replicates never perturbs earlier ones
  cfg.jobs = 1;
  cfg.replication = 5;
  const ResultBundle d = run_experiment(cfg);
  for (std::size_t rep = 0; rep < 3; ++rep) {
    CHECK(d.summaries[rep].final_feedback == a.summaries[rep].final_feedback);
    CHECK(d.seeds[rep] == a.seeds[rep]);
  }
}

TEST_CASE("run_experiment with zero iterations reports the initial state only") {
  ExperimentConfig cfg;
  cfg.n = 4;
  cfg.replication = 1;
  cfg.optimizer.stop.max_iterations = 0;
  cfg.metric = Metric::kSumAmplitude;
  cfg.noise = NoiseModel::none();
  const ResultBundle bundle = run_experiment(cfg);
  REQUIRE(bundle.summaries.size() == 1);
  CHECK(bundle.summaries[0].iterations == 0);
  CHECK(bundle.summaries[0].final_feedback == bundle.summaries[0].initial_feedback);
  const std::string series = series_csv(bundle);
  CHECK(series.find("iteration,run_0,median") == 0);
}

TEST_CASE("reference-configuration batch produces a monotone, saturating median curve") {
  ExperimentConfig cfg;  // reference defaults, shrunk for test runtime
  cfg.n = 30;
  cfg.replication = 10;
  cfg.metric = Metric::kSumAmplitude;
  cfg.noise = NoiseModel::none();
  cfg.optimizer.stop.max_iterations = 1500;
  const ResultBundle bundle = run_experiment(cfg);

  for (const RunSummary& s : bundle.summaries) CHECK(s.status == "ok");

  // median accepted series: non-decreasing, clearly above the start, and
  // saturating (late gains smaller than early gains)
  std::vector<double> medians;
  for (std::size_t t = 0; t <= 1500; t += 50) {
    std::vector<double> vals;
    for (const RunTrace& trace : bundle.traces) {
      vals.push_back(t == 0 ? trace.initial_feedback : trace.records[t - 1].accepted);
    }
    std::sort(vals.begin(), vals.end());
    medians.push_back(0.5 * (vals[4] + vals[5]));
  }
  for (std::size_t i = 1; i < medians.size(); ++i) CHECK(medians[i] >= medians[i - 1]);
  CHECK(medians.back() > medians.front());
  const double early_gain = medians[medians.size() / 5] - medians.front();
  const double late_gain = medians.back() - medians[medians.size() - medians.size() / 5 - 1];
  CHECK(late_gain < early_gain);
}

TEST_CASE("gate semantics") {
  ExperimentConfig cfg;
  cfg.n = 6;
  cfg.replication = 2;
  cfg.metric = Metric::kSumAmplitude;
  cfg.noise = NoiseModel::none();
  cfg.optimizer.stop.max_iterations = 50;  // far too short to align
  cfg.gate.enabled = true;
  cfg.gate.min_aligned_fraction = 1.0;
  cfg.gate.min_passing_runs = 2;
  const ResultBundle fail = run_experiment(cfg);
  CHECK(fail.gate.enabled);
  CHECK_FALSE(fail.gate.passed);

  // gates never mutate outputs
  cfg.gate.enabled = false;
  const ResultBundle off = run_experiment(cfg);
  CHECK(series_csv(off) == series_csv(fail));

  cfg.gate.enabled = true;
  cfg.gate.min_aligned_fraction = 0.0;  // trivially satisfied
  const ResultBundle pass = run_experiment(cfg);
  CHECK(pass.gate.passed);
}
