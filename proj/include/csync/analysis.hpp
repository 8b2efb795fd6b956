#ifndef CSYNC_ANALYSIS_HPP
#define CSYNC_ANALYSIS_HPP

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csync/optimizer.hpp"

namespace csync {

enum class BoundFamily { kGlobalUpper, kGlobalTheta, kLocalTheta };

/// Closed-form comparator functions for the synchronisation-time analysis.
/// All logarithms are natural.
struct BoundSpec {
  BoundFamily family = BoundFamily::kGlobalTheta;
  std::size_t n = 1;
  std::size_t k = 2;
  double neighbourhood = 1.0;  // interval units, (0, k]; local family only

  void validate() const;
};

/// e * n * k * (ln n + 1) — the explicit global upper bound.
double bound_global_upper(std::size_t n, std::size_t k);

/// n * k * ln n — the sharp-order reference (constants absorbed).
double bound_global_theta(std::size_t n, std::size_t k);

/// n * N * ln n + ln k / N — the local-search reference.
double bound_local_reference(std::size_t n, double neighbourhood, std::size_t k);

double reference_value(const BoundSpec& spec);

/// First-hitting statistics of a success predicate over a batch of traces.
/// Censored runs (never hit) enter the order statistics at the trace's
/// iteration cap.
struct SyncTimeEntry {
  std::size_t n = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double censored_fraction = 0.0;
  std::size_t samples = 0;
  std::vector<double> hitting_times;  // censored values included at the cap
  std::vector<bool> censored;
};

using HitExtractor = std::function<std::optional<std::size_t>(const RunTrace&)>;

/// Extractors for the two standard success notions.
HitExtractor hit_by_optimum();
HitExtractor hit_by_feedback(double threshold);

SyncTimeEntry measure_sync_time(std::span<const RunTrace> traces, const HitExtractor& first_hit);

struct ScalingRow {
  std::size_t n = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double censored_fraction = 0.0;
  double ratio = 0.0;  // median / reference(n)
  bool excluded = false;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  double spread = 0.0;       // max ratio / min ratio over included rows
  bool consistent = false;   // spread <= 2.0
  std::vector<std::string> warnings;
};

/// Ratio test of measured medians against a reference bound family. Entries
/// dominated by censoring (> 50%) are excluded from the spread with a
/// warning. Requires >= 3 sizes, strictly increasing n.
ScalingReport fit_scaling(std::span<const SyncTimeEntry> entries, const BoundSpec& reference);

struct Dispersion {
  double within_band_fraction = 0.0;
  double circular_variance = 0.0;  // mean squared angular deviation from the circular mean
  double mean_direction = 0.0;
};

/// Received total phases, their circular mean, the fraction within
/// +/- band radians of it, and the variance of angular deviations.
Dispersion phase_dispersion(const PhaseState& state, const NodeField& field,
                            double band = 0.1 * kPi);

}  // namespace csync

#endif  // CSYNC_ANALYSIS_HPP
