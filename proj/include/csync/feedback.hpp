#ifndef CSYNC_FEEDBACK_HPP
#define CSYNC_FEEDBACK_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <string>

#include "csync/field.hpp"

namespace csync {

enum class Metric { kNegatedRmse, kSumAmplitude, kSnr };

std::string to_string(Metric m);
std::optional<Metric> metric_from_string(std::string_view s);

/// Scalar synchronisation-quality score. All metrics are maximized.
struct FeedbackValue {
  double score = 0.0;
  Metric metric = Metric::kSumAmplitude;
};

enum class NoiseKind { kNone, kAwgn };

struct NoiseModel {
  NoiseKind kind = NoiseKind::kNone;
  double power = 0.0;   // watts, AWGN only
  bool frozen = false;  // reuse one noise realization per evaluation (reproducibility mode)

  static NoiseModel none() { return {}; }
  static NoiseModel awgn(double watts, bool frozen = false);
  void validate() const;
};

/// Time-domain sampling window for waveform-based feedback.
struct Sampling {
  int samples_per_period = 256;
  int periods = 4;
};

/// Complex phasor of the received sum carrier:
///   sum_i rss_i * exp(j(gamma_i + phi_i + psi_i)).
std::complex<double> superimpose(const NodeField& field, const PhaseState& state);

/// |superimpose|; fast noiseless proxy, same ranking as the noiseless RMSE score.
FeedbackValue amplitude_feedback(const NodeField& field, const PhaseState& state);

/// Negated RMSE of the received waveform (signal + noise) against the
/// phase-aligned optimum waveform of amplitude sum(rss); noise is disregarded
/// for the optimum. Deterministic per seed; fresh-noise draws come from the
/// supplied stream in the Rng overloads.
FeedbackValue rmse_feedback(const NodeField& field, const PhaseState& state,
                            const NoiseModel& noise, const Sampling& sampling,
                            std::uint64_t seed);
FeedbackValue rmse_feedback(const NodeField& field, const PhaseState& state,
                            const NoiseModel& noise, const Sampling& sampling, Rng& noise_rng);

/// Measured received power over the window divided by the noise floor
/// (reference 1 W when noiseless). Exactly sinusoidal in any single node's
/// phase offset, which is what the sinusoid-fitting algorithm relies on.
FeedbackValue snr_feedback(const NodeField& field, const PhaseState& state,
                           const NoiseModel& noise, const Sampling& sampling, Rng& noise_rng);

/// Metric dispatch bound to one field/noise/sampling and a noise stream.
/// Fresh mode draws an independent realization per evaluation; frozen mode
/// replays the same realization every time.
class FeedbackEvaluator {
 public:
  FeedbackEvaluator(const NodeField& field, Metric metric, NoiseModel noise, Sampling sampling,
                    std::uint64_t noise_seed);

  FeedbackValue operator()(const PhaseState& state);

  Metric metric() const { return metric_; }

 private:
  const NodeField* field_;
  Metric metric_;
  NoiseModel noise_;
  Sampling sampling_;
  std::uint64_t noise_seed_;
  std::uint64_t eval_count_ = 0;
};

/// Cosine-rule change of the resultant amplitude when one carrier of
/// amplitude rss_i moves from gamma_i to gamma_new against a rest-sum of
/// amplitude rss_rest, with both radicand arguments exactly as printed in
/// the source formula (cos(gamma_i + gamma_new) and cos(gamma_i)).
/// |result| <= 2 * rss_i always.
double rss_delta(double rss_rest, double rss_i, double gamma_i, double gamma_new);

/// Variant using the new absolute angle in the first radicand. Off by
/// default everywhere; provided because the printed argument is
/// geometrically unusual.
double rss_delta_absolute(double rss_rest, double rss_i, double gamma_i, double gamma_new);

/// Arithmetic mean of rss_delta over the k equally spaced offsets
/// gamma_i + 2 pi j / k, j = 1..k.
double avg_alteration_gain(double rss_rest, double rss_i, double gamma_i, int k);

}  // namespace csync

#endif  // CSYNC_FEEDBACK_HPP
