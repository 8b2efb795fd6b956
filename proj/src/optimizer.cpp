#include "csync/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "csync/angles.hpp"
#include "csync/errors.hpp"
#include "csync/search_space.hpp"

namespace csync {

std::string to_string(Distribution d) {
  return d == Distribution::kUniform ? "uniform" : "normal";
}

std::optional<Distribution> distribution_from_string(std::string_view s) {
  if (s == "uniform") return Distribution::kUniform;
  if (s == "normal") return Distribution::kNormal;
  return std::nullopt;
}

std::string to_string(RevertPolicy p) {
  return p == RevertPolicy::kRevert ? "revert" : "complementary";
}

std::optional<RevertPolicy> revert_policy_from_string(std::string_view s) {
  if (s == "revert") return RevertPolicy::kRevert;
  if (s == "complementary") return RevertPolicy::kComplementary;
  return std::nullopt;
}

double OptimizerConfig::effective_p_mut(std::size_t n) const {
  if (p_mut < 0.0) return 1.0 / static_cast<double>(n);
  return p_mut;
}

void OptimizerConfig::validate(std::size_t n) const {
  const double p = effective_p_mut(n);
  if (p < 0.0 || p > 1.0) throw validation_error("p_mut must lie in [0, 1]");
  if (dist == Distribution::kNormal && variance <= 0.0) {
    throw validation_error("variance must be > 0 for the normal distribution");
  }
  if (neighbourhood <= 0.0 || neighbourhood > kTwoPi) {
    throw validation_error("neighbourhood must lie in (0, 2pi]");
  }
  if (grid_k != 0 && (grid_k < 2 || (grid_k & (grid_k - 1)) != 0)) {
    throw validation_error("grid_k must be 0 or a power of two >= 2");
  }
  if (p_mut_freq != 0.0 || variance_freq != 0.0) {
    throw validation_error("frequency mutation is out of model: p_mut_freq and variance_freq must be zero");
  }
}

std::pair<PhaseState, std::vector<std::size_t>> mutate(const PhaseState& state,
                                                       const OptimizerConfig& cfg, Rng& rng) {
  const std::size_t n = state.size();
  const double p = cfg.effective_p_mut(n);
  PhaseState proposed = state;
  std::vector<std::size_t> mutated;
  const double sigma = cfg.dist == Distribution::kNormal ? std::sqrt(cfg.variance) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!rng.bernoulli(p)) continue;
    mutated.push_back(i);
    double g = state.gamma[i];
    if (cfg.dist == Distribution::kUniform) {
      g += rng.uniform(-cfg.neighbourhood / 2.0, cfg.neighbourhood / 2.0);
    } else {
      g += rng.normal(0.0, sigma);
    }
    g = wrap_2pi(g);
    if (cfg.grid_k > 0) {
      const PhaseGrid grid(n, cfg.grid_k);
      g = grid.interval_center(grid.snap_index(g));
    }
    proposed.gamma[i] = g;
  }
  return {std::move(proposed), std::move(mutated)};
}

std::optional<std::size_t> RunTrace::first_optimum_iteration() const {
  if (initial_optimum) return 0;
  for (const TraceRecord& r : records) {
    if (r.optimum) return r.iteration;
  }
  return std::nullopt;
}

std::optional<std::size_t> RunTrace::first_feedback_at_least(double threshold) const {
  if (initial_feedback >= threshold) return 0;
  for (const TraceRecord& r : records) {
    if (r.accepted >= threshold) return r.iteration;
  }
  return std::nullopt;
}

RunTrace run_feedback_loop(const NodeField& field, const PhaseState& init,
                           const OptimizerConfig& cfg, Metric metric, const NoiseModel& noise,
                           std::uint64_t seed, const LoopOptions& options) {
  if (init.size() != field.size()) throw contract_error("run_feedback_loop: dimension mismatch");
  cfg.validate(field.size());

  Rng mutation_rng(derive_stream(seed, 1));
  FeedbackEvaluator evaluate(field, metric, noise, options.sampling, derive_stream(seed, 2));

  RunTrace trace;
  trace.seed = seed;
  trace.metric = metric;
  trace.max_iterations = cfg.stop.max_iterations;

  PhaseState current = init;
  FeedbackValue best = evaluate(current);
  trace.initial_feedback = best.score;

  const bool track_optimum = options.optimum_k > 0;
  bool current_optimum = track_optimum && is_optimum(current, field, options.optimum_k);
  trace.initial_optimum = current_optimum;

  const auto threshold_met = [&] {
    return cfg.stop.feedback_threshold && best.score >= *cfg.stop.feedback_threshold;
  };

  if (threshold_met() || (options.stop_on_optimum && current_optimum)) {
    trace.terminal_state = current;
    return trace;
  }

  trace.records.reserve(std::min<std::size_t>(cfg.stop.max_iterations, 1 << 20));
  for (std::size_t t = 1; t <= cfg.stop.max_iterations; ++t) {
    auto [proposed, mutated_nodes] = mutate(current, cfg, mutation_rng);
    const FeedbackValue f = evaluate(proposed);
    const bool accept = f.score > best.score;
    bool state_changed = false;
    if (accept) {
      current = std::move(proposed);
      best = f;
      state_changed = true;
    } else if (cfg.revert_policy == RevertPolicy::kComplementary && !mutated_nodes.empty()) {
      // mirrored offset, kept without a confirming evaluation
      for (std::size_t i : mutated_nodes) {
        const double delta = wrap_pi(proposed.gamma[i] - current.gamma[i]);
        current.gamma[i] = wrap_2pi(current.gamma[i] - delta);
      }
      state_changed = true;
    }
    if (track_optimum && state_changed) {
      current_optimum = is_optimum(current, field, options.optimum_k);
    }
    trace.records.push_back({t, f.score, best.score, accept,
                             static_cast<std::uint32_t>(mutated_nodes.size()), current_optimum});
    if (options.snapshot_stride > 0 && t % options.snapshot_stride == 0) {
      trace.snapshots.emplace_back(t, current);
    }
    if ((options.stop_on_optimum && current_optimum) || threshold_met()) break;
  }
  trace.terminal_state = std::move(current);
  return trace;
}

double SinusoidFit::eval(double gamma) const { return amplitude * std::sin(gamma + phase) + offset; }

double SinusoidFit::argmax() const { return wrap_2pi(kPi / 2.0 - phase); }

SinusoidFit sinusoid_fit(const std::array<std::pair<double, double>, 3>& measurements) {
  // A sin(g + Phi) + c == p sin(g) + q cos(g) + c with p = A cos Phi,
  // q = A sin Phi; solve the 3x3 system by elimination with partial pivoting.
  double m[3][4];
  for (int r = 0; r < 3; ++r) {
    m[r][0] = std::sin(measurements[r].first);
    m[r][1] = std::cos(measurements[r].first);
    m[r][2] = 1.0;
    m[r][3] = measurements[r].second;
  }
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (std::abs(m[pivot][col]) < 1e-9) {
      throw degenerate_measurement_error("sinusoid_fit: probe phases too close, singular system");
    }
    if (pivot != col) std::swap(m[pivot], m[col]);
    for (int r = col + 1; r < 3; ++r) {
      const double factor = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= factor * m[col][c];
    }
  }
  double x[3];
  for (int r = 2; r >= 0; --r) {
    double acc = m[r][3];
    for (int c = r + 1; c < 3; ++c) acc -= m[r][c] * x[c];
    x[r] = acc / m[r][r];
  }
  SinusoidFit fit;
  fit.amplitude = std::hypot(x[0], x[1]);
  fit.phase = fit.amplitude > 0.0 ? std::atan2(x[1], x[0]) : 0.0;
  fit.offset = x[2];
  return fit;
}

namespace {

// Three random probe phases with pairwise circular separation >= min_sep.
// Randomized per node per round: mutators sharing a deterministic probe
// pattern would shift the sum by a common per-slot rotation and be unable to
// detect one another in the validation slot.
std::array<double, 3> draw_probe_offsets(double base_gamma, double min_sep, Rng& rng) {
  for (int attempt = 0; attempt < 256; ++attempt) {
    std::array<double, 3> probes;
    for (double& p : probes) p = wrap_2pi(base_gamma + rng.angle());
    bool ok = true;
    for (int a = 0; a < 3 && ok; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        if (std::abs(wrap_pi(probes[a] - probes[b])) < min_sep) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return probes;
  }
  throw contract_error("draw_probe_offsets: could not separate probes; min_probe_separation too large");
}

}  // namespace

OptimalRunResult run_optimal_algorithm(const NodeField& field, const PhaseState& init,
                                       const NoiseModel& noise, const OptimalAlgoConfig& cfg,
                                       std::uint64_t seed) {
  const std::size_t n = field.size();
  if (n < 2) throw contract_error("run_optimal_algorithm: needs n >= 2");
  if (init.size() != n) throw contract_error("run_optimal_algorithm: dimension mismatch");
  if (cfg.deviation_threshold <= 0.0) {
    throw contract_error("run_optimal_algorithm: deviation threshold must be > 0");
  }
  if (cfg.min_probe_separation <= 0.0 || cfg.min_probe_separation > kTwoPi / 3.0) {
    throw contract_error("run_optimal_algorithm: min_probe_separation out of range");
  }

  Rng election_rng(derive_stream(seed, 1));
  FeedbackEvaluator evaluate(field, Metric::kSnr, noise, cfg.sampling, derive_stream(seed, 2));

  OptimalRunResult result;
  RunTrace& trace = result.trace;
  trace.seed = seed;
  trace.metric = Metric::kSnr;

  const std::size_t max_rounds = cfg.forced_schedule ? cfg.forced_schedule->size()
                                 : cfg.max_rounds > 0 ? cfg.max_rounds
                                                      : 20 * n;
  trace.max_iterations = 4 * max_rounds;

  PhaseState committed = init;
  std::vector<bool> fixed(n, false);
  std::size_t fixed_count = 0;

  double committed_score = evaluate(committed).score;
  trace.initial_feedback = committed_score;

  std::size_t slot = 0;
  const auto record_slot = [&](double measured, std::uint32_t movers, bool accepted) {
    ++slot;
    trace.records.push_back({slot, measured, committed_score, accepted, movers, false});
  };

  for (std::size_t round = 0; round < max_rounds; ++round) {
    if (!cfg.forced_schedule && fixed_count == n) break;

    std::vector<std::size_t> movers;
    if (cfg.forced_schedule) {
      movers = (*cfg.forced_schedule)[round];
      for (std::size_t i : movers) {
        if (i >= n) throw contract_error("run_optimal_algorithm: forced mover out of range");
      }
    } else {
      const double p = 1.0 / static_cast<double>(n - fixed_count);
      for (std::size_t i = 0; i < n; ++i) {
        if (!fixed[i] && election_rng.bernoulli(p)) movers.push_back(i);
      }
    }

    if (movers.empty()) {
      for (int s = 0; s < 4; ++s) record_slot(evaluate(committed).score, 0, false);
      continue;
    }

    struct MoverWork {
      std::size_t node;
      std::array<double, 3> probes;
      std::array<double, 3> scores;
      double pre_round_gamma;
    };
    std::vector<MoverWork> work;
    work.reserve(movers.size());
    for (std::size_t i : movers) {
      work.push_back({i,
                      draw_probe_offsets(committed.gamma[i], cfg.min_probe_separation, election_rng),
                      {},
                      committed.gamma[i]});
    }

    PhaseState probe_state = committed;
    for (int s = 0; s < 3; ++s) {
      for (MoverWork& w : work) probe_state.gamma[w.node] = w.probes[static_cast<std::size_t>(s)];
      const double f = evaluate(probe_state).score;
      for (MoverWork& w : work) w.scores[static_cast<std::size_t>(s)] = f;
      record_slot(f, static_cast<std::uint32_t>(work.size()), false);
    }

    RoundRecord round_record;
    round_record.round = round;

    PhaseState validation = committed;
    std::vector<MoverOutcome> outcomes;
    outcomes.reserve(work.size());
    for (MoverWork& w : work) {
      MoverOutcome out;
      out.node = w.node;
      try {
        out.fit = sinusoid_fit({std::pair{w.probes[0], w.scores[0]},
                                std::pair{w.probes[1], w.scores[1]},
                                std::pair{w.probes[2], w.scores[2]}});
        out.fit_ok = true;
      } catch (const degenerate_measurement_error&) {
        out.fit_ok = false;  // retry in a later round
      }
      if (out.fit_ok) {
        double scale = 0.0;
        for (double v : w.scores) scale = std::max(scale, std::abs(v));
        if (scale == 0.0) scale = 1.0;
        for (int s = 0; s < 3; ++s) {
          out.fit_residual = std::max(
              out.fit_residual,
              std::abs(out.fit.eval(w.probes[static_cast<std::size_t>(s)]) -
                       w.scores[static_cast<std::size_t>(s)]) /
                  scale);
        }
        out.target = out.fit.argmax();
        validation.gamma[w.node] = out.target;
      } else {
        validation.gamma[w.node] = w.pre_round_gamma;
      }
      outcomes.push_back(out);
    }

    const double f4 = evaluate(validation).score;

    bool any_committed = false;
    for (MoverOutcome& out : outcomes) {
      if (!out.fit_ok) continue;
      const double predicted = out.fit.amplitude + out.fit.offset;  // fit value at its argmax
      const double denom = std::abs(predicted) > 0.0 ? std::abs(predicted) : 1.0;
      out.deviation = std::abs(f4 - predicted) / denom;
      if (out.deviation <= cfg.deviation_threshold) {
        out.committed = true;
        any_committed = true;
        committed.gamma[out.node] = out.target;
        if (!fixed[out.node]) {
          fixed[out.node] = true;
          ++fixed_count;
        }
      }
      // above threshold: collision suspected, the move is reversed
    }

    if (any_committed) committed_score = evaluate(committed).score;
    record_slot(f4, static_cast<std::uint32_t>(work.size()), any_committed);

    round_record.movers = std::move(outcomes);
    round_record.fixed_count_after = fixed_count;
    round_record.committed_feedback = committed_score;
    result.rounds.push_back(std::move(round_record));
  }

  trace.terminal_state = std::move(committed);
  result.slots = slot;
  result.fixed_count = fixed_count;
  return result;
}

}  // namespace csync
