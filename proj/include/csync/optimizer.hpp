#ifndef CSYNC_OPTIMIZER_HPP
#define CSYNC_OPTIMIZER_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csync/feedback.hpp"
#include "csync/field.hpp"

namespace csync {

enum class Distribution { kUniform, kNormal };
enum class RevertPolicy { kRevert, kComplementary };

std::string to_string(Distribution d);
std::optional<Distribution> distribution_from_string(std::string_view s);
std::string to_string(RevertPolicy p);
std::optional<RevertPolicy> revert_policy_from_string(std::string_view s);

struct StopCriterion {
  std::size_t max_iterations = 6000;
  std::optional<double> feedback_threshold;  // stop once the accepted score reaches this
};

/// p_mut < 0 means "1/n" (resolved against the field size at run time).
inline constexpr double kAutoPMut = -1.0;

struct OptimizerConfig {
  double p_mut = kAutoPMut;
  Distribution dist = Distribution::kUniform;
  double variance = 0.5 * kPi;        // radians^2, Normal only
  double neighbourhood = kTwoPi;      // radians in (0, 2pi]; 2pi = global search
  RevertPolicy revert_policy = RevertPolicy::kRevert;
  StopCriterion stop;
  /// When > 0, proposals are snapped to the k interval centres; with a 2pi
  /// neighbourhood this is exactly the uniform-over-k-intervals mutation of
  /// the discrete analysis. 0 keeps phases continuous.
  std::size_t grid_k = 0;
  /// Frequency mutation is out of model; both fields are accepted by the
  /// config schema but must be zero.
  double p_mut_freq = 0.0;
  double variance_freq = 0.0;

  double effective_p_mut(std::size_t n) const;
  void validate(std::size_t n) const;
};

struct TraceRecord {
  std::size_t iteration = 0;
  double proposed = 0.0;  // feedback measured for this iteration's proposal
  double accepted = 0.0;  // best accepted score so far (non-decreasing under Revert)
  bool was_accepted = false;
  std::uint32_t mutated_count = 0;
  bool optimum = false;  // discrete optimum predicate after this iteration (if tracked)
};

struct RunTrace {
  double initial_feedback = 0.0;
  bool initial_optimum = false;
  std::vector<TraceRecord> records;
  PhaseState terminal_state;
  std::vector<std::pair<std::size_t, PhaseState>> snapshots;
  std::uint64_t seed = 0;
  Metric metric = Metric::kSumAmplitude;
  std::size_t max_iterations = 0;  // cap the run was configured with

  struct StageMark {
    std::size_t first_record = 0;
    std::string label;
  };
  std::vector<StageMark> stages;

  /// First iteration at which the tracked optimum predicate held
  /// (0 = already optimal at the start).
  std::optional<std::size_t> first_optimum_iteration() const;
  /// First iteration whose accepted score reached the threshold.
  std::optional<std::size_t> first_feedback_at_least(double threshold) const;
  std::size_t total_iterations() const {
    return records.empty() ? 0 : records.back().iteration;
  }
};

/// One mutation step: each node independently mutates with probability
/// p_mut. Uniform draws from [gamma - N/2, gamma + N/2]; Normal adds a
/// zero-mean perturbation with the configured variance. Results are
/// canonicalized (and grid-snapped when grid_k > 0).
std::pair<PhaseState, std::vector<std::size_t>> mutate(const PhaseState& state,
                                                       const OptimizerConfig& cfg, Rng& rng);

struct LoopOptions {
  std::size_t snapshot_stride = 0;  // 0 = no snapshots
  std::size_t optimum_k = 0;        // > 0: track the discrete optimum predicate
  bool stop_on_optimum = false;
  Sampling sampling{};
};

/// The 1-bit feedback loop: mutate -> evaluate -> accept/revert until the
/// stop criterion. Strictly better scores are accepted (vs the stored best);
/// on rejection, Revert restores the previous phases and Complementary
/// applies the mirrored offset to the mutated nodes and keeps it without a
/// second evaluation.
RunTrace run_feedback_loop(const NodeField& field, const PhaseState& init,
                           const OptimizerConfig& cfg, Metric metric, const NoiseModel& noise,
                           std::uint64_t seed, const LoopOptions& options = {});

/// f(gamma) = amplitude * sin(gamma + phase) + offset, amplitude >= 0.
struct SinusoidFit {
  double amplitude = 0.0;
  double phase = 0.0;
  double offset = 0.0;

  double eval(double gamma) const;
  /// Phase maximizing the fit: pi/2 - phase, wrapped to [0, 2pi).
  double argmax() const;
};

/// Closed-form fit through three (gamma, score) measurements with pairwise
/// distinct gammas (mod 2pi). Near-coincident probes make the 3x3 system
/// singular and raise degenerate_measurement_error.
SinusoidFit sinusoid_fit(const std::array<std::pair<double, double>, 3>& measurements);

struct OptimalAlgoConfig {
  /// Relative 4th-slot deviation above which a node concludes it collided
  /// with another mutator and reverses its move.
  double deviation_threshold = 0.01;
  std::size_t max_rounds = 0;  // 0 = 20 * n
  /// Test hook: movers per round, overriding the random election. Rounds
  /// run in order; the run ends when the schedule is exhausted (or earlier
  /// if every node is fixed and the schedule is empty).
  std::optional<std::vector<std::vector<std::size_t>>> forced_schedule;
  Sampling sampling{};
  /// Probe phases are drawn at random (see run_optimal_algorithm); pairs
  /// closer than this circular separation are resampled so the fit system
  /// stays well conditioned.
  double min_probe_separation = 0.5;
};

struct MoverOutcome {
  std::size_t node = 0;
  bool fit_ok = false;
  SinusoidFit fit;
  double fit_residual = 0.0;  // max relative probe-reproduction error
  double target = 0.0;        // argmax the node jumped to
  double deviation = 0.0;     // relative 4th-slot deviation
  bool committed = false;     // kept the jump (and became fixed)
};

struct RoundRecord {
  std::size_t round = 0;
  std::vector<MoverOutcome> movers;
  std::size_t fixed_count_after = 0;
  double committed_feedback = 0.0;
};

struct OptimalRunResult {
  RunTrace trace;
  std::vector<RoundRecord> rounds;
  std::size_t slots = 0;
  std::size_t fixed_count = 0;
};

/// The 4-slot rich-feedback algorithm. Per round every unfixed node elects
/// itself with probability 1/(unfixed count); a mover takes three probe
/// measurements at random well-separated phases, fits the sinusoid, jumps to
/// its argmax and validates with a fourth measurement. A deviation above the
/// threshold means a collision: the move is reversed. Nodes whose validation
/// succeeds are fixed and stop mutating. Feedback is received power over the
/// noise floor, which is exactly sinusoidal in a single mover's phase.
OptimalRunResult run_optimal_algorithm(const NodeField& field, const PhaseState& init,
                                       const NoiseModel& noise, const OptimalAlgoConfig& cfg,
                                       std::uint64_t seed);

}  // namespace csync

#endif  // CSYNC_OPTIMIZER_HPP
