#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "adaptff/circuit_params.hpp"
#include "adaptff/gaussian_state.hpp"
#include "adaptff/observables.hpp"
#include "adaptff/rng.hpp"

namespace adaptff {

/// Flag and feedback events, for auditing the update rules.
struct CircuitEvent {
  enum class Kind { gate, measurement_pair, swap, deactivate };
  Kind kind;
  std::int64_t t;
  std::size_t left;
  std::size_t right;
};

struct QuantumOptions {
  MeasurementUpdate update = MeasurementUpdate::householder;
  /// Full Gram-Schmidt pass every this many steps (0 disables).
  int reorthonormalize_every = 10;
  /// Moves every link one site to the right while keeping its rule (used to
  /// check that exchanging the odd and even rules is a lattice translation).
  bool shift_links = false;
};

/// A simulator failure annotated with the trajectory and step it happened in.
class TrajectoryError : public std::runtime_error {
 public:
  TrajectoryError(std::uint64_t trajectory, std::int64_t step, const std::string& what)
      : std::runtime_error("trajectory " + std::to_string(trajectory) + ", step " +
                           std::to_string(step) + ": " + what),
        trajectory_(trajectory),
        step_(step) {}
  std::uint64_t trajectory() const { return trajectory_; }
  std::int64_t step() const { return step_; }

 private:
  std::uint64_t trajectory_;
  std::int64_t step_;
};

/// One quantum trajectory of the adaptive circuit: Gaussian state, classical
/// flags and a private random stream.
///
/// Random draws are consumed in a fixed order. Unitary half-layer: one draw per
/// eligible link (ascending), u < 1/2 selects hopping. Measurement half-layer,
/// per link ascending: one draw for "measure?" (u < p); if measured, one Born
/// draw per site, lower site index first; on a wrong-order outcome one draw for
/// the feedback (u < r).
class AdaptiveCircuit {
 public:
  static constexpr double kGateAngle = 0.78539816339744830962;  // pi / 4

  /// All flags active, t = 0, stream derived from (params.seed, trajectory).
  explicit AdaptiveCircuit(const CircuitParams& params, std::uint64_t trajectory = 0,
                           QuantumOptions options = {});

  void unitary_half_layer(LinkParity parity);
  void measurement_half_layer(LinkParity parity);
  /// Odd unitaries, odd measurements, even unitaries, even measurements.
  void step();

  const GaussianState& state() const { return state_; }
  const FlagRegister& flags() const { return flags_; }
  std::int64_t time() const { return t_; }
  const CircuitParams& params() const { return params_; }
  Rng& rng() { return rng_; }

  /// Replaces state and flags (tests and restarts).
  void reset(GaussianState state, FlagRegister flags);
  void set_event_log(std::vector<CircuitEvent>* log) { log_ = log; }

 private:
  std::pair<std::size_t, std::size_t> link(LinkParity parity, std::size_t k) const;
  void record(CircuitEvent::Kind kind, std::size_t left, std::size_t right);

  CircuitParams params_;
  QuantumOptions options_;
  Rng rng_;
  GaussianState state_;
  FlagRegister flags_;
  std::int64_t t_ = 0;
  ComplexMatrix hopping_block_;
  ComplexMatrix pairing_block_;
  std::vector<CircuitEvent>* log_ = nullptr;
};

/// What `run_trajectory` records at each probe time besides rho_active and
/// delta: S^(renyi_index) of [0, round(f * L)) for each fraction f, in columns
/// named "S<n>_A<size>".
struct QuantumProbeSpec {
  std::vector<double> entropy_fractions;
  int renyi_index = 2;
};

std::vector<std::size_t> entropy_cut_sizes(std::size_t num_sites,
                                           const std::vector<double>& fractions);

/// Runs t_max steps and records rho_active, delta and the requested entropies
/// at every probe time. Simulator failures are rethrown as TrajectoryError.
TimeSeries run_trajectory(const CircuitParams& params, const QuantumProbeSpec& probes,
                          std::uint64_t trajectory = 0, QuantumOptions options = {});

}  // namespace adaptff
