#ifndef CSYNC_SEARCH_SPACE_HPP
#define CSYNC_SEARCH_SPACE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "csync/field.hpp"

namespace csync {

/// Discretization of [0, 2pi) into k intervals per node; k a power of two so
/// the log2(k)-bit Gray blocks are exact.
struct PhaseGrid {
  std::size_t n = 1;
  std::size_t k = 2;

  PhaseGrid(std::size_t n_nodes, std::size_t k_intervals);

  std::size_t bits_per_block() const { return bits_; }
  double interval_width() const;
  /// Representative phase of interval j: its centre, 2 pi (j + 0.5) / k.
  double interval_center(std::size_t index) const;
  /// Interval containing the given phase.
  std::size_t snap_index(double gamma) const;

 private:
  std::size_t bits_ = 1;
};

/// Binary-reflected Gray code of an interval index, bits_per_block wide.
std::uint32_t gray_encode(std::uint32_t index, std::size_t k);
std::uint32_t gray_decode(std::uint32_t code, std::size_t k);

/// Concatenation of per-node Gray blocks.
struct EncodedPoint {
  std::vector<bool> bits;
  std::size_t block_bits = 0;
};

EncodedPoint encode_point(std::span<const std::size_t> indices, const PhaseGrid& grid);
std::vector<std::size_t> decode_point(const EncodedPoint& point, const PhaseGrid& grid);

std::size_t hamming(const EncodedPoint& a, const EncodedPoint& b);

/// Exact circular-arc check: true iff all phases fit inside some arc of the
/// given width. Every phase is tried as the arc start (O(n^2), wrap-exact).
bool phases_within_arc(std::span<const double> phases, double width);

/// Optimum predicate of the discrete analysis: all received total phases
/// (gamma_i + phi_i + psi_i) within some circular arc of width 4 pi / k.
bool is_optimum(const PhaseState& state, const NodeField& field, std::size_t k);

struct NoLocalOptimaReport {
  bool holds = false;
  std::size_t configurations_checked = 0;
  std::size_t optima_count = 0;
  /// Interval indices of the first configuration with no strictly improving
  /// single-node single-interval move, if any.
  std::optional<std::vector<std::size_t>> counterexample;
};

/// Exhaustively enumerates the k^n grid (guard: k^n <= 10^7, otherwise
/// size_error). For every non-optimal configuration there must exist a
/// single-node move by one interval (+/-1, wrapping) that strictly increases
/// amplitude_feedback.
NoLocalOptimaReport verify_no_local_optima(const NodeField& field, std::size_t k);

}  // namespace csync

#endif  // CSYNC_SEARCH_SPACE_HPP
