#include "csync/feedback.hpp"

#include <cmath>

#include "csync/angles.hpp"
#include "csync/errors.hpp"

namespace csync {

std::string to_string(Metric m) {
  switch (m) {
    case Metric::kNegatedRmse: return "rmse";
    case Metric::kSumAmplitude: return "amplitude";
    case Metric::kSnr: return "snr";
  }
  return "?";
}

std::optional<Metric> metric_from_string(std::string_view s) {
  if (s == "rmse") return Metric::kNegatedRmse;
  if (s == "amplitude") return Metric::kSumAmplitude;
  if (s == "snr") return Metric::kSnr;
  return std::nullopt;
}

NoiseModel NoiseModel::awgn(double watts, bool frozen) {
  NoiseModel m;
  m.kind = NoiseKind::kAwgn;
  m.power = watts;
  m.frozen = frozen;
  m.validate();
  return m;
}

void NoiseModel::validate() const {
  if (kind == NoiseKind::kAwgn && power <= 0.0) {
    throw contract_error("NoiseModel: AWGN power must be > 0");
  }
}

std::complex<double> superimpose(const NodeField& field, const PhaseState& state) {
  if (state.size() != field.size()) throw contract_error("superimpose: dimension mismatch");
  std::complex<double> s{0.0, 0.0};
  for (std::size_t i = 0; i < field.size(); ++i) {
    s += std::polar(field.rss(i), state.gamma[i] + field.static_phase(i));
  }
  return s;
}

FeedbackValue amplitude_feedback(const NodeField& field, const PhaseState& state) {
  return {std::abs(superimpose(field, state)), Metric::kSumAmplitude};
}

namespace {

void check_sampling(const Sampling& s) {
  if (s.periods < 1 || s.samples_per_period < 3) {
    throw contract_error("Sampling: window must cover >= 1 full carrier period");
  }
}

// All links share the carrier frequency, so the noiseless sum waveform is a
// single sinusoid |S| cos(u + arg S) over normalized phase u = 2 pi m / spp.
double mean_square_error(const NodeField& field, const PhaseState& state,
                         const NoiseModel& noise, const Sampling& sampling, Rng* noise_rng) {
  const std::complex<double> s = superimpose(field, state);
  const double amp = std::abs(s);
  const double theta = std::arg(s);
  // Optimum: perfectly aligned sum, phase-shifted onto the current sum so
  // that every member of the shifted-optimum family scores identically.
  const double mismatch = amp - field.rss_sum();
  const std::size_t m_total =
      static_cast<std::size_t>(sampling.samples_per_period) * static_cast<std::size_t>(sampling.periods);
  const double noise_std =
      (noise.kind == NoiseKind::kAwgn && noise_rng != nullptr) ? std::sqrt(noise.power) : 0.0;
  if (noise_std == 0.0) {
    // closed form: mean of (mismatch * cos)^2 over whole periods is /2
    return mismatch * mismatch / 2.0;
  }
  double acc = 0.0;
  for (std::size_t m = 0; m < m_total; ++m) {
    const double u = kTwoPi * static_cast<double>(m) / sampling.samples_per_period;
    const double e = mismatch * std::cos(u + theta) + noise_rng->normal(0.0, noise_std);
    acc += e * e;
  }
  return acc / static_cast<double>(m_total);
}

double measured_power(const NodeField& field, const PhaseState& state, const NoiseModel& noise,
                      const Sampling& sampling, Rng* noise_rng) {
  const std::complex<double> s = superimpose(field, state);
  const double amp = std::abs(s);
  const double theta = std::arg(s);
  const double noise_std =
      (noise.kind == NoiseKind::kAwgn && noise_rng != nullptr) ? std::sqrt(noise.power) : 0.0;
  if (noise_std == 0.0) return amp * amp / 2.0;
  const std::size_t m_total =
      static_cast<std::size_t>(sampling.samples_per_period) * static_cast<std::size_t>(sampling.periods);
  double acc = 0.0;
  for (std::size_t m = 0; m < m_total; ++m) {
    const double u = kTwoPi * static_cast<double>(m) / sampling.samples_per_period;
    const double v = amp * std::cos(u + theta) + noise_rng->normal(0.0, noise_std);
    acc += v * v;
  }
  return acc / static_cast<double>(m_total);
}

}  // namespace

FeedbackValue rmse_feedback(const NodeField& field, const PhaseState& state,
                            const NoiseModel& noise, const Sampling& sampling, Rng& noise_rng) {
  check_sampling(sampling);
  noise.validate();
  const double mse = mean_square_error(field, state, noise, sampling, &noise_rng);
  return {-std::sqrt(mse), Metric::kNegatedRmse};
}

FeedbackValue rmse_feedback(const NodeField& field, const PhaseState& state,
                            const NoiseModel& noise, const Sampling& sampling,
                            std::uint64_t seed) {
  Rng rng(seed);
  return rmse_feedback(field, state, noise, sampling, rng);
}

FeedbackValue snr_feedback(const NodeField& field, const PhaseState& state,
                           const NoiseModel& noise, const Sampling& sampling, Rng& noise_rng) {
  check_sampling(sampling);
  noise.validate();
  const double reference = noise.kind == NoiseKind::kAwgn ? noise.power : 1.0;
  return {measured_power(field, state, noise, sampling, &noise_rng) / reference, Metric::kSnr};
}

FeedbackEvaluator::FeedbackEvaluator(const NodeField& field, Metric metric, NoiseModel noise,
                                     Sampling sampling, std::uint64_t noise_seed)
    : field_(&field), metric_(metric), noise_(noise), sampling_(sampling), noise_seed_(noise_seed) {
  noise_.validate();
}

FeedbackValue FeedbackEvaluator::operator()(const PhaseState& state) {
  if (metric_ == Metric::kSumAmplitude) return amplitude_feedback(*field_, state);
  // Fresh noise per evaluation; frozen mode replays realization 0.
  const std::uint64_t draw = noise_.frozen ? 0 : eval_count_++;
  Rng rng(derive_stream(noise_seed_, draw));
  if (metric_ == Metric::kNegatedRmse) {
    return rmse_feedback(*field_, state, noise_, sampling_, rng);
  }
  return snr_feedback(*field_, state, noise_, sampling_, rng);
}

double rss_delta(double rss_rest, double rss_i, double gamma_i, double gamma_new) {
  if (rss_rest < 0.0 || rss_i < 0.0) throw contract_error("rss_delta: amplitudes must be >= 0");
  const double q = rss_rest * rss_rest + rss_i * rss_i;
  const double cross = 2.0 * rss_rest * rss_i;
  return std::sqrt(q - cross * std::cos(gamma_i + gamma_new)) -
         std::sqrt(q - cross * std::cos(gamma_i));
}

double rss_delta_absolute(double rss_rest, double rss_i, double gamma_i, double gamma_new) {
  if (rss_rest < 0.0 || rss_i < 0.0) throw contract_error("rss_delta: amplitudes must be >= 0");
  const double q = rss_rest * rss_rest + rss_i * rss_i;
  const double cross = 2.0 * rss_rest * rss_i;
  return std::sqrt(q - cross * std::cos(gamma_new)) - std::sqrt(q - cross * std::cos(gamma_i));
}

double avg_alteration_gain(double rss_rest, double rss_i, double gamma_i, int k) {
  if (k < 1) throw contract_error("avg_alteration_gain: k must be >= 1");
  double acc = 0.0;
  for (int j = 1; j <= k; ++j) {
    acc += rss_delta(rss_rest, rss_i, gamma_i, gamma_i + kTwoPi * j / k);
  }
  return acc / k;
}

}  // namespace csync
