#ifndef CSYNC_EXPERIMENT_HPP
#define CSYNC_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csync/analysis.hpp"
#include "csync/clustering.hpp"
#include "csync/optimizer.hpp"

namespace csync {

inline constexpr const char* kToolVersion = "carriersync 0.1.0";
/// Environment variable overriding the output directory (and nothing else).
inline constexpr const char* kOutDirEnvVar = "CARRIERSYNC_OUT";

struct GateConfig {
  bool enabled = false;
  double min_aligned_fraction = 0.98;
  double band = 0.1 * kPi;  // radians
  std::size_t min_passing_runs = 8;
};

/// Full experiment description. Defaults mirror the reference simulation
/// configuration: 100 nodes on a 30 m x 30 m square, receiver 30 m above
/// the centre, 2.4 GHz, 1 mW, 0 dB gains, AWGN at -103 dBm, RMSE feedback,
/// uniform mutation with probability 1/n, 6000 iterations, 10 runs.
struct ExperimentConfig {
  std::string scenario = "default";
  std::size_t n = 100;
  FieldParams field{};
  NoiseModel noise = NoiseModel::awgn(5.011872336272715e-14);  // -103 dBm
  Sampling sampling{};
  OptimizerConfig optimizer{};
  Metric metric = Metric::kNegatedRmse;
  std::optional<ClusterPlan> cluster_plan;
  StageEngine cluster_engine = StageEngine::kLoop;
  std::size_t cluster_optimum_k = 0;
  std::size_t replication = 10;
  std::uint64_t base_seed = 1;
  std::string out_dir = "out";
  std::size_t jobs = 1;
  bool full_trace = false;
  GateConfig gate{};

  void validate() const;
};

ExperimentConfig parse_config(std::string_view text, std::string_view source_name = "<config>");
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

struct RunSummary {
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::size_t iterations = 0;
  double initial_feedback = 0.0;
  double final_feedback = 0.0;
  std::size_t accepted_count = 0;
  double aligned_fraction = 0.0;
  double circular_variance = 0.0;
};

struct GateOutcome {
  bool enabled = false;
  bool passed = true;
  std::size_t passing_runs = 0;
  std::string detail;
};

struct ResultBundle {
  ExperimentConfig config;
  std::vector<RunTrace> traces;  // indexed by replicate; empty trace for failed ones
  std::vector<RunSummary> summaries;
  GateOutcome gate;
  std::string tool_version = kToolVersion;
  std::vector<std::uint64_t> seeds;
};

/// Executes the configured replications (seeds base_seed split per
/// replicate), aggregates summaries and evaluates the alignment gate.
/// Per-run failures are isolated and reported as failed replicates.
ResultBundle run_experiment(const ExperimentConfig& cfg);

/// CSV bodies (exposed so reproducibility can be asserted byte-for-byte).
std::string series_csv(const ResultBundle& bundle);
std::string summary_csv(const ResultBundle& bundle);

/// Writes series.csv, summary.csv and config_echo.ini under `dir`
/// (creating it). Honors nothing but the given path; the CLI resolves the
/// environment override before calling this.
void write_bundle(const ResultBundle& bundle, const std::string& dir);

}  // namespace csync

#endif  // CSYNC_EXPERIMENT_HPP
