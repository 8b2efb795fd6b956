#include "csync/field.hpp"

#include <cmath>
#include <utility>

#include "csync/angles.hpp"
#include "csync/errors.hpp"

namespace csync {

double friis_rss(double p_tx, double g_tx, double g_rx, double distance, double wavelength_m) {
  if (distance == 0.0) throw singular_geometry_error("friis_rss: zero distance");
  if (p_tx <= 0.0 || g_tx <= 0.0 || g_rx <= 0.0 || distance < 0.0 || wavelength_m <= 0.0) {
    throw contract_error("friis_rss: all inputs must be strictly positive");
  }
  const double f = wavelength_m / (4.0 * kPi * distance);
  return p_tx * g_tx * g_rx * f * f;
}

NodeField::NodeField(std::vector<Vec3> tx_positions, Vec3 rx_position, double carrier_frequency,
                     double tx_power, double tx_gain, double rx_gain, Rng& rng)
    : tx_positions_(std::move(tx_positions)),
      rx_position_(rx_position),
      carrier_frequency_(carrier_frequency) {
  if (tx_positions_.empty()) throw contract_error("NodeField: need at least one transmitter");
  if (carrier_frequency_ <= 0.0) throw contract_error("NodeField: carrier frequency must be positive");
  const double lambda = wavelength(carrier_frequency_);
  const std::size_t n = tx_positions_.size();
  rss_.reserve(n);
  psi_.reserve(n);
  phi_.reserve(n);
  for (const Vec3& p : tx_positions_) {
    const double dx = p.x - rx_position_.x;
    const double dy = p.y - rx_position_.y;
    const double dz = p.z - rx_position_.z;
    const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
    if (d <= 0.0) throw invalid_geometry_error("NodeField: transmitter coincides with receiver");
    rss_.push_back(std::sqrt(friis_rss(tx_power, tx_gain, rx_gain, d, lambda)));
    psi_.push_back(wrap_2pi(kTwoPi * d / lambda));
  }
  for (std::size_t i = 0; i < n; ++i) phi_.push_back(rng.angle());
  static_phase_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    static_phase_[i] = wrap_2pi(phi_[i] + psi_[i]);
    rss_sum_ += rss_[i];
  }
}

NodeField NodeField::from_links(std::vector<double> rss, std::vector<double> phi,
                                std::vector<double> psi, double carrier_frequency) {
  if (rss.empty()) throw contract_error("NodeField: need at least one link");
  if (rss.size() != phi.size() || rss.size() != psi.size()) {
    throw contract_error("NodeField: rss/phi/psi length mismatch");
  }
  for (double r : rss) {
    if (r <= 0.0) throw contract_error("NodeField: rss must be strictly positive");
  }
  NodeField f;
  f.carrier_frequency_ = carrier_frequency;
  f.rss_ = std::move(rss);
  f.phi_ = std::move(phi);
  f.psi_ = std::move(psi);
  f.static_phase_.resize(f.rss_.size());
  for (std::size_t i = 0; i < f.rss_.size(); ++i) {
    f.phi_[i] = wrap_2pi(f.phi_[i]);
    f.psi_[i] = wrap_2pi(f.psi_[i]);
    f.static_phase_[i] = wrap_2pi(f.phi_[i] + f.psi_[i]);
    f.rss_sum_ += f.rss_[i];
  }
  return f;
}

NodeField NodeField::subset(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw contract_error("NodeField::subset: empty index set");
  NodeField f;
  f.carrier_frequency_ = carrier_frequency_;
  f.rx_position_ = rx_position_;
  for (std::size_t i : indices) {
    if (i >= size()) throw contract_error("NodeField::subset: index out of range");
    if (!tx_positions_.empty()) f.tx_positions_.push_back(tx_positions_[i]);
    f.rss_.push_back(rss_[i]);
    f.phi_.push_back(phi_[i]);
    f.psi_.push_back(psi_[i]);
    f.static_phase_.push_back(static_phase_[i]);
    f.rss_sum_ += rss_[i];
  }
  return f;
}

NodeField place_nodes(std::size_t n, const FieldParams& params, std::uint64_t seed) {
  if (n < 1) throw contract_error("place_nodes: n must be >= 1");
  if (params.area_width <= 0.0 || params.area_depth <= 0.0) {
    throw invalid_geometry_error("place_nodes: zero-area node distribution rectangle");
  }
  Rng rng(derive_stream(seed, 0));
  std::vector<Vec3> tx;
  tx.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    tx.push_back({rng.uniform(0.0, params.area_width), rng.uniform(0.0, params.area_depth), 0.0});
  }
  const Vec3 rx{params.area_width / 2.0, params.area_depth / 2.0, params.rx_height};
  return NodeField(std::move(tx), rx, params.carrier_frequency, params.tx_power, params.tx_gain,
                   params.rx_gain, rng);
}

PhaseState::PhaseState(std::vector<double> g) : gamma(std::move(g)) {
  for (double& v : gamma) v = wrap_2pi(v);
}

PhaseState PhaseState::zeros(std::size_t n) {
  PhaseState s;
  s.gamma.assign(n, 0.0);
  return s;
}

PhaseState PhaseState::random(std::size_t n, Rng& rng) {
  PhaseState s;
  s.gamma.reserve(n);
  for (std::size_t i = 0; i < n; ++i) s.gamma.push_back(rng.angle());
  return s;
}

PhaseState PhaseState::shifted(double offset) const {
  PhaseState s;
  s.gamma.reserve(gamma.size());
  for (double v : gamma) s.gamma.push_back(wrap_2pi(v + offset));
  return s;
}

PhaseState PhaseState::subset(std::span<const std::size_t> indices) const {
  PhaseState s;
  s.gamma.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= gamma.size()) throw contract_error("PhaseState::subset: index out of range");
    s.gamma.push_back(gamma[i]);
  }
  return s;
}

void PhaseState::scatter(std::span<const std::size_t> indices, const PhaseState& values) {
  if (indices.size() != values.size()) throw contract_error("PhaseState::scatter: size mismatch");
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= gamma.size()) throw contract_error("PhaseState::scatter: index out of range");
    gamma[indices[j]] = wrap_2pi(values.gamma[j]);
  }
}

}  // namespace csync
