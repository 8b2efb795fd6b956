#ifndef CSYNC_FIELD_HPP
#define CSYNC_FIELD_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "csync/rng.hpp"

namespace csync {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

inline double wavelength(double frequency_hz) { return kSpeedOfLight / frequency_hz; }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Free-space received power: p_tx * (lambda / (4 pi d))^2 * g_tx * g_rx.
/// All inputs strictly positive; d = 0 raises singular_geometry_error.
double friis_rss(double p_tx, double g_tx, double g_rx, double distance, double wavelength_m);

/// Geometry and link parameters for place_nodes. Defaults follow the common
/// simulation configuration: 30 m x 30 m area, receiver 30 m above the
/// centre, 2.4 GHz, 1 mW transmit power, 0 dB antenna gains.
struct FieldParams {
  double area_width = 30.0;       // meters
  double area_depth = 30.0;       // meters
  double rx_height = 30.0;        // meters above the area plane
  double carrier_frequency = 2.4e9;  // hertz
  double tx_power = 1e-3;         // watts
  double tx_gain = 1.0;           // linear
  double rx_gain = 1.0;           // linear
};

/// Transmitter/receiver geometry plus per-link terms: rss_i (root-power
/// amplitude), psi_i (propagation phase from distance) and phi_i (oscillator
/// offset, drawn i.i.d. uniform [0, 2pi) at construction). Immutable.
class NodeField {
 public:
  /// Geometric constructor: derives rss (sqrt of Friis power) and psi
  /// ((2 pi d / lambda) mod 2pi) per link; draws phi from `rng`.
  NodeField(std::vector<Vec3> tx_positions, Vec3 rx_position, double carrier_frequency,
            double tx_power, double tx_gain, double rx_gain, Rng& rng);

  /// Direct link constructor for synthetic fields (tests, oracles).
  static NodeField from_links(std::vector<double> rss, std::vector<double> phi,
                              std::vector<double> psi, double carrier_frequency = 2.4e9);

  std::size_t size() const { return rss_.size(); }
  double carrier_frequency() const { return carrier_frequency_; }

  double rss(std::size_t i) const { return rss_[i]; }
  double phi(std::size_t i) const { return phi_[i]; }
  double psi(std::size_t i) const { return psi_[i]; }
  /// phi_i + psi_i, the uncontrollable part of the received phase.
  double static_phase(std::size_t i) const { return static_phase_[i]; }

  std::span<const double> rss() const { return rss_; }
  std::span<const Vec3> tx_positions() const { return tx_positions_; }
  Vec3 rx_position() const { return rx_position_; }

  double rss_sum() const { return rss_sum_; }

  /// Field restricted to the given links (same rss/phi/psi values).
  NodeField subset(std::span<const std::size_t> indices) const;

 private:
  NodeField() = default;

  std::vector<Vec3> tx_positions_;
  Vec3 rx_position_;
  double carrier_frequency_ = 2.4e9;
  std::vector<double> rss_;
  std::vector<double> phi_;
  std::vector<double> psi_;
  std::vector<double> static_phase_;
  double rss_sum_ = 0.0;
};

/// Uniform node placement over the rectangle at z = 0 with the receiver
/// rx_height above the rectangle centre. Deterministic for a fixed seed.
/// Zero-area rectangles are rejected with invalid_geometry_error.
NodeField place_nodes(std::size_t n, const FieldParams& params, std::uint64_t seed);

/// The controllable carrier phase offsets gamma, canonicalized to [0, 2pi).
struct PhaseState {
  std::vector<double> gamma;

  PhaseState() = default;
  explicit PhaseState(std::vector<double> g);

  std::size_t size() const { return gamma.size(); }

  static PhaseState zeros(std::size_t n);
  static PhaseState random(std::size_t n, Rng& rng);

  /// Every entry shifted by a common offset (re-canonicalized).
  PhaseState shifted(double offset) const;

  PhaseState subset(std::span<const std::size_t> indices) const;
  void scatter(std::span<const std::size_t> indices, const PhaseState& values);
};

}  // namespace csync

#endif  // CSYNC_FIELD_HPP
