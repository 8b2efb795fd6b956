#include "csync/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csync/angles.hpp"
#include "csync/errors.hpp"

namespace csync {

void BoundSpec::validate() const {
  if (n < 1) throw contract_error("BoundSpec: n must be >= 1");
  if (k < 2) throw contract_error("BoundSpec: k must be >= 2");
  if (family == BoundFamily::kLocalTheta &&
      (neighbourhood <= 0.0 || neighbourhood > static_cast<double>(k))) {
    throw contract_error("BoundSpec: neighbourhood must lie in (0, k] interval units");
  }
}

double bound_global_upper(std::size_t n, std::size_t k) {
  if (n < 1 || k < 2) throw contract_error("bound_global_upper: need n >= 1, k >= 2");
  const double dn = static_cast<double>(n);
  return std::exp(1.0) * dn * static_cast<double>(k) * (std::log(dn) + 1.0);
}

double bound_global_theta(std::size_t n, std::size_t k) {
  if (n < 1 || k < 2) throw contract_error("bound_global_theta: need n >= 1, k >= 2");
  const double dn = static_cast<double>(n);
  return dn * static_cast<double>(k) * std::log(dn);
}

double bound_local_reference(std::size_t n, double neighbourhood, std::size_t k) {
  if (n < 1 || k < 2 || neighbourhood < 1.0) {
    throw contract_error("bound_local_reference: need n >= 1, N >= 1, k >= 2");
  }
  const double dn = static_cast<double>(n);
  return dn * neighbourhood * std::log(dn) + std::log(static_cast<double>(k)) / neighbourhood;
}

double reference_value(const BoundSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case BoundFamily::kGlobalUpper: return bound_global_upper(spec.n, spec.k);
    case BoundFamily::kGlobalTheta: return bound_global_theta(spec.n, spec.k);
    case BoundFamily::kLocalTheta:
      return bound_local_reference(spec.n, spec.neighbourhood, spec.k);
  }
  return 0.0;
}

HitExtractor hit_by_optimum() {
  return [](const RunTrace& t) { return t.first_optimum_iteration(); };
}

HitExtractor hit_by_feedback(double threshold) {
  return [threshold](const RunTrace& t) { return t.first_feedback_at_least(threshold); };
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

SyncTimeEntry measure_sync_time(std::span<const RunTrace> traces, const HitExtractor& first_hit) {
  if (traces.empty()) throw contract_error("measure_sync_time: no traces");
  SyncTimeEntry entry;
  entry.n = traces.front().terminal_state.size();
  entry.samples = traces.size();
  entry.hitting_times.reserve(traces.size());
  std::size_t censored_count = 0;
  for (const RunTrace& t : traces) {
    const std::optional<std::size_t> hit = first_hit(t);
    if (hit) {
      entry.hitting_times.push_back(static_cast<double>(*hit));
      entry.censored.push_back(false);
    } else {
      entry.hitting_times.push_back(static_cast<double>(t.max_iterations));
      entry.censored.push_back(true);
      ++censored_count;
    }
  }
  entry.censored_fraction = static_cast<double>(censored_count) / static_cast<double>(traces.size());
  std::vector<double> sorted = entry.hitting_times;
  std::sort(sorted.begin(), sorted.end());
  entry.median = quantile_sorted(sorted, 0.5);
  entry.q1 = quantile_sorted(sorted, 0.25);
  entry.q3 = quantile_sorted(sorted, 0.75);
  return entry;
}

ScalingReport fit_scaling(std::span<const SyncTimeEntry> entries, const BoundSpec& reference) {
  if (entries.size() < 3) throw contract_error("fit_scaling: need at least 3 sizes");
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].n <= entries[i - 1].n) {
      throw contract_error("fit_scaling: sizes must be strictly increasing");
    }
  }
  ScalingReport report;
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  std::size_t included = 0;
  for (const SyncTimeEntry& e : entries) {
    BoundSpec at = reference;
    at.n = e.n;
    const double ref = reference_value(at);
    ScalingRow row{e.n, e.median, e.q1, e.q3, e.censored_fraction,
                   ref > 0.0 ? e.median / ref : 0.0, false};
    if (e.censored_fraction > 0.5) {
      row.excluded = true;
      report.warnings.push_back("n=" + std::to_string(e.n) +
                                " excluded from the spread: censoring dominates (" +
                                std::to_string(e.censored_fraction) + ")");
    } else if (ref <= 0.0) {
      row.excluded = true;
      report.warnings.push_back("n=" + std::to_string(e.n) +
                                " excluded from the spread: zero reference value");
    } else {
      min_ratio = std::min(min_ratio, row.ratio);
      max_ratio = std::max(max_ratio, row.ratio);
      ++included;
    }
    report.rows.push_back(row);
  }
  if (included >= 2 && min_ratio > 0.0) {
    report.spread = max_ratio / min_ratio;
    report.consistent = report.spread <= 2.0;
  } else {
    report.spread = std::numeric_limits<double>::infinity();
    report.consistent = false;
    report.warnings.push_back("spread undefined: fewer than two usable sizes");
  }
  return report;
}

Dispersion phase_dispersion(const PhaseState& state, const NodeField& field, double band) {
  if (state.size() != field.size()) throw contract_error("phase_dispersion: dimension mismatch");
  const std::size_t n = field.size();
  std::vector<double> total(n);
  for (std::size_t i = 0; i < n; ++i) total[i] = wrap_2pi(state.gamma[i] + field.static_phase(i));

  Dispersion d;
  d.mean_direction = circular_mean(total);
  std::size_t within = 0;
  double acc = 0.0;
  for (double p : total) {
    const double dev = wrap_pi(p - d.mean_direction);
    if (std::abs(dev) <= band) ++within;
    acc += dev * dev;
  }
  d.within_band_fraction = static_cast<double>(within) / static_cast<double>(n);
  d.circular_variance = acc / static_cast<double>(n);
  return d;
}

}  // namespace csync
