#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>

#include "adaptff/gaussian_state.hpp"
#include "adaptff/observables.hpp"
#include "adaptff/rng.hpp"

namespace adaptff {

/// Odd links join sites (2j-1, 2j) in 1-based numbering, i.e. (0,1), (2,3), ...
/// Even links join (2j, 2j+1): (1,2), ..., (L-1, 0) on the ring.
enum class LinkParity { odd, even };

/// Sites of the k-th link of the given parity, left endpoint first.
inline std::pair<std::size_t, std::size_t> link_sites(LinkParity parity, std::size_t k,
                                                      std::size_t num_sites) {
  const std::size_t left = 2 * k + (parity == LinkParity::odd ? 0 : 1);
  return {left, (left + 1) % num_sites};
}

/// The measured pair (n_left, n_right) that matches the Neel target 1010...
/// on this link: (1,0) on odd links, (0,1) on even links.
inline bool is_target_order(LinkParity parity, bool left, bool right) {
  return parity == LinkParity::odd ? (left && !right) : (!left && right);
}

struct InitialState {
  enum class Kind { neel, random_half_filling, explicit_bits };
  Kind kind = Kind::random_half_filling;
  Bits bits;  // only for explicit_bits

  /// "neel", "random_half_filling", or a 0/1 string.
  static InitialState parse(const std::string& text);
  std::string to_string() const;
  /// Random half filling draws a uniformly random arrangement of L/2 particles.
  Bits realize(std::size_t num_sites, Rng& rng) const;
};

struct CircuitParams {
  std::size_t num_sites = 16;
  double p = 0.5;  // measurement rate
  double r = 1.0;  // feedback rate
  std::int64_t t_max = 100;
  std::uint64_t seed = 1;
  InitialState initial_state;
  ProbeSchedule probes;

  /// Throws std::invalid_argument: L even and >= 2, rates in [0, 1], t_max >= 0.
  void validate() const;
};

/// Neel occupations 1010... (site 0 occupied).
Bits neel_bits(std::size_t num_sites);

}  // namespace adaptff
