#include "csync/search_space.hpp"

#include <cmath>
#include <complex>

#include "csync/angles.hpp"
#include "csync/errors.hpp"
#include "csync/feedback.hpp"

namespace csync {

namespace {

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::size_t log2_exact(std::size_t v) {
  std::size_t b = 0;
  while ((std::size_t{1} << b) < v) ++b;
  return b;
}

}  // namespace

PhaseGrid::PhaseGrid(std::size_t n_nodes, std::size_t k_intervals) : n(n_nodes), k(k_intervals) {
  if (n < 1) throw contract_error("PhaseGrid: n must be >= 1");
  if (k < 2 || !is_power_of_two(k)) throw contract_error("PhaseGrid: k must be a power of two >= 2");
  bits_ = log2_exact(k);
}

double PhaseGrid::interval_width() const { return kTwoPi / static_cast<double>(k); }

double PhaseGrid::interval_center(std::size_t index) const {
  if (index >= k) throw contract_error("PhaseGrid: interval index out of range");
  return kTwoPi * (static_cast<double>(index) + 0.5) / static_cast<double>(k);
}

std::size_t PhaseGrid::snap_index(double gamma) const {
  const double g = wrap_2pi(gamma);
  auto idx = static_cast<std::size_t>(g / interval_width());
  return idx >= k ? k - 1 : idx;
}

std::uint32_t gray_encode(std::uint32_t index, std::size_t k) {
  if (!is_power_of_two(k) || k < 2) throw contract_error("gray_encode: k must be a power of two >= 2");
  if (index >= k) throw contract_error("gray_encode: index out of range");
  return index ^ (index >> 1);
}

std::uint32_t gray_decode(std::uint32_t code, std::size_t k) {
  if (!is_power_of_two(k) || k < 2) throw contract_error("gray_decode: k must be a power of two >= 2");
  if (code >= k) throw contract_error("gray_decode: code out of range");
  std::uint32_t v = code;
  for (std::uint32_t shift = 1; shift < 32; shift <<= 1) v ^= v >> shift;
  return v;
}

EncodedPoint encode_point(std::span<const std::size_t> indices, const PhaseGrid& grid) {
  if (indices.size() != grid.n) throw contract_error("encode_point: index count != n");
  EncodedPoint p;
  p.block_bits = grid.bits_per_block();
  p.bits.reserve(indices.size() * p.block_bits);
  for (std::size_t idx : indices) {
    const std::uint32_t g = gray_encode(static_cast<std::uint32_t>(idx), grid.k);
    for (std::size_t b = p.block_bits; b-- > 0;) p.bits.push_back(((g >> b) & 1u) != 0);
  }
  return p;
}

std::vector<std::size_t> decode_point(const EncodedPoint& point, const PhaseGrid& grid) {
  if (point.block_bits != grid.bits_per_block() || point.bits.size() != grid.n * point.block_bits) {
    throw contract_error("decode_point: shape mismatch");
  }
  std::vector<std::size_t> indices;
  indices.reserve(grid.n);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    std::uint32_t g = 0;
    for (std::size_t b = 0; b < point.block_bits; ++b) g = (g << 1) | (point.bits[pos++] ? 1u : 0u);
    indices.push_back(gray_decode(g, grid.k));
  }
  return indices;
}

std::size_t hamming(const EncodedPoint& a, const EncodedPoint& b) {
  if (a.bits.size() != b.bits.size()) throw contract_error("hamming: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) d += a.bits[i] != b.bits[i] ? 1 : 0;
  return d;
}

bool phases_within_arc(std::span<const double> phases, double width) {
  if (phases.size() <= 1) return true;
  if (width >= kTwoPi) return true;
  for (double start : phases) {
    double max_off = 0.0;
    for (double p : phases) {
      const double off = wrap_2pi(p - start);
      if (off > max_off) max_off = off;
    }
    if (max_off <= width) return true;
  }
  return false;
}

bool is_optimum(const PhaseState& state, const NodeField& field, std::size_t k) {
  if (k < 2) throw contract_error("is_optimum: k must be >= 2");
  if (state.size() != field.size()) throw contract_error("is_optimum: dimension mismatch");
  std::vector<double> total(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    total[i] = wrap_2pi(state.gamma[i] + field.static_phase(i));
  }
  return phases_within_arc(total, 4.0 * kPi / static_cast<double>(k));
}

NoLocalOptimaReport verify_no_local_optima(const NodeField& field, std::size_t k) {
  const std::size_t n = field.size();
  const PhaseGrid grid(n, k);
  const double space = std::pow(static_cast<double>(k), static_cast<double>(n));
  if (space > 1e7) throw size_error("verify_no_local_optima: k^n exceeds the enumeration guard of 1e7");

  NoLocalOptimaReport report;
  report.holds = true;

  std::vector<std::size_t> idx(n, 0);
  PhaseState state = PhaseState::zeros(n);
  const auto apply = [&](const std::vector<std::size_t>& v) {
    for (std::size_t i = 0; i < n; ++i) state.gamma[i] = grid.interval_center(v[i]);
  };

  const double width = 4.0 * kPi / static_cast<double>(k);
  std::vector<double> total(n);
  const auto totals = [&](const std::vector<std::size_t>& v) {
    for (std::size_t i = 0; i < n; ++i) {
      total[i] = wrap_2pi(grid.interval_center(v[i]) + field.static_phase(i));
    }
  };

  while (true) {
    ++report.configurations_checked;
    totals(idx);
    if (phases_within_arc(total, width)) {
      ++report.optima_count;
    } else {
      apply(idx);
      const double base = amplitude_feedback(field, state).score;
      bool improvable = false;
      for (std::size_t i = 0; i < n && !improvable; ++i) {
        const std::size_t saved = idx[i];
        for (int dir : {1, -1}) {
          const std::size_t moved = (saved + k + static_cast<std::size_t>(dir)) % k;
          state.gamma[i] = grid.interval_center(moved);
          if (amplitude_feedback(field, state).score > base + 1e-12) {
            improvable = true;
            break;
          }
        }
        state.gamma[i] = grid.interval_center(saved);
      }
      if (!improvable) {
        report.holds = false;
        report.counterexample = idx;
        return report;
      }
    }
    // odometer over the k^n grid
    std::size_t pos = 0;
    while (pos < n && ++idx[pos] == k) idx[pos++] = 0;
    if (pos == n) break;
  }
  return report;
}

}  // namespace csync
