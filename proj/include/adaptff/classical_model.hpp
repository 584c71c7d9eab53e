#pragma once

#include <cstddef>
#include <cstdint>

#include "adaptff/circuit_params.hpp"
#include "adaptff/observables.hpp"
#include "adaptff/rng.hpp"

namespace adaptff {

/// Definite occupations plus flags: the support dynamics of one trajectory.
struct ClassicalState {
  Bits bits;
  FlagRegister flags;
  std::int64_t t = 0;

  std::size_t size() const { return bits.size(); }
};

/// All flags active, t = 0, bits from the params' initial state drawn on `rng`.
ClassicalState init_classical(const CircuitParams& params, Rng& rng);

/// Random gate on link (i, i+1 mod L) read as a support transition: hopping
/// resamples {10, 01} uniformly, pairing resamples {00, 11} uniformly, anything
/// else is left alone. Both flags become active. One 64-bit draw: bit 63 picks
/// the gate (set = hopping), bit 62 the resampled pair.
void classical_unitary_update(ClassicalState& state, std::size_t i, Rng& rng);

/// With probability p reads link (i, i+1 mod L) and applies the same outcome
/// rules as the quantum measurement layer, the swap being a bit exchange.
/// Draws: one for "measure?", one more for the feedback on a wrong-order pair.
void classical_measure_feedback(ClassicalState& state, std::size_t i, LinkParity parity,
                                double p, double r, Rng& rng);

/// Flips each bit independently with probability `rate`.
void apply_bitflip_noise(ClassicalState& state, double rate, Rng& rng);

/// One time step: odd unitaries, odd measurements, even unitaries, even
/// measurements, then bit-flip noise if `noise` > 0.
///
/// Without noise a link whose flags are both inactive is skipped entirely
/// (no draws). Inactive sites then always hold their Neel value, so such a
/// link can neither be gated nor change under measurement.
void classical_step(ClassicalState& state, const CircuitParams& params, double noise, Rng& rng);

/// Bond i joins sites i and i+1 (mod L); 1 marks equal neighbours (a particle).
Bits bond_particles(const Bits& bits);
double bond_density(const Bits& bits);

/// Records rho_active, delta (from the definite bits) and bond_density.
TimeSeries run_classical(const CircuitParams& params, double noise, std::uint64_t trajectory = 0);

/// Hard-core branching-annihilating random walk on a ring.
struct BarwParams {
  std::size_t num_sites = 1000;
  double q = 1.0;          // annihilation probability on contact
  double branching = 0.3;  // probability that an update is a branching attempt
  std::int64_t t_max = 1000;
  std::uint64_t seed = 1;
  ProbeSchedule probes;

  void validate() const;
};

/// Random sequential BARW. Each update picks a random particle; with
/// probability `branching` it tries A -> 3A with offspring on both neighbours,
/// otherwise it hops to a random neighbour. Landing on an occupied site
/// annihilates both particles with probability q (otherwise the move is
/// rejected); an offspring aimed at an occupied site annihilates with it with
/// probability q, the other offspring being placed only when both moves go
/// through. One time unit is N(t) updates. Starts fully occupied. Records
/// "density" at every probe time.
TimeSeries run_barw(const BarwParams& params, std::uint64_t trajectory = 0);

/// State-level BARW driver, exposed for tests.
class Barw {
 public:
  Barw(const BarwParams& params, std::uint64_t trajectory);
  explicit Barw(const BarwParams& params, const Bits& occupied, std::uint64_t trajectory = 0);

  /// One random sequential update; no-op when empty.
  void update();
  /// Updates until the time has advanced by one unit, or the lattice empties.
  void sweep();

  std::size_t count() const { return particles_.size(); }
  double density() const;
  double time() const { return time_; }
  const Bits& occupied() const { return occupied_; }

 private:
  void add(std::size_t site);
  void remove(std::size_t site);

  BarwParams params_;
  Rng rng_;
  Bits occupied_;
  std::vector<std::size_t> particles_;
  std::vector<std::size_t> slot_;  // index into particles_ for occupied sites
  double time_ = 0.0;
};

}  // namespace adaptff
