#ifndef CSYNC_ANGLES_HPP
#define CSYNC_ANGLES_HPP

#include <cmath>
#include <complex>
#include <span>

namespace csync {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Canonicalize an angle into [0, 2pi).
inline double wrap_2pi(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative can land exactly on 2pi after the correction
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Signed angular difference mapped into (-pi, pi].
inline double wrap_pi(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r > kPi) r -= kTwoPi;
  if (r <= -kPi) r += kTwoPi;
  return r;
}

/// Direction of the resultant vector of unit phasors. When the resultant is
/// numerically zero (e.g. two antipodal phases) the first phase is used as
/// the mean direction; this tie rule keeps phase_dispersion deterministic.
inline double circular_mean(std::span<const double> phases) {
  std::complex<double> s{0.0, 0.0};
  for (double p : phases) s += std::polar(1.0, p);
  if (std::abs(s) < 1e-12 * static_cast<double>(phases.size() + 1)) {
    return phases.empty() ? 0.0 : wrap_2pi(phases[0]);
  }
  return wrap_2pi(std::arg(s));
}

}  // namespace csync

#endif  // CSYNC_ANGLES_HPP
