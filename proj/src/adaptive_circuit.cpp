#include "adaptff/adaptive_circuit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace adaptff {

// ---------------------------------------------------------------------------
// Parameters

InitialState InitialState::parse(const std::string& text) {
  InitialState init;
  if (text == "neel") {
    init.kind = Kind::neel;
  } else if (text == "random_half_filling") {
    init.kind = Kind::random_half_filling;
  } else {
    if (text.empty() || text.find_first_not_of("01") != std::string::npos) {
      throw std::invalid_argument("initial_state must be neel, random_half_filling or a 0/1 string, got '" +
                                  text + "'");
    }
    init.kind = Kind::explicit_bits;
    for (char c : text) {
      init.bits.push_back(c == '1' ? 1 : 0);
    }
  }
  return init;
}

std::string InitialState::to_string() const {
  switch (kind) {
    case Kind::neel:
      return "neel";
    case Kind::random_half_filling:
      return "random_half_filling";
    case Kind::explicit_bits:
      break;
  }
  std::string s;
  for (auto b : bits) {
    s.push_back(b ? '1' : '0');
  }
  return s;
}

Bits InitialState::realize(std::size_t num_sites, Rng& rng) const {
  switch (kind) {
    case Kind::neel:
      return neel_bits(num_sites);
    case Kind::random_half_filling: {
      Bits bits(num_sites, 0);
      std::fill(bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(num_sites / 2), 1);
      // Fisher-Yates with our own stream so the result is platform independent.
      for (std::size_t i = num_sites; i > 1; --i) {
        std::swap(bits[i - 1], bits[rng.below(i)]);
      }
      return bits;
    }
    case Kind::explicit_bits:
      if (bits.size() != num_sites) {
        throw std::invalid_argument("initial bitstring length differs from L");
      }
      return bits;
  }
  return {};
}

Bits neel_bits(std::size_t num_sites) {
  Bits bits(num_sites);
  for (std::size_t i = 0; i < num_sites; ++i) {
    bits[i] = (i % 2 == 0) ? 1 : 0;
  }
  return bits;
}

void CircuitParams::validate() const {
  if (num_sites < 2 || num_sites % 2 != 0) {
    throw std::invalid_argument("L must be even and at least 2");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("measurement rate p must lie in [0, 1]");
  }
  if (!(r >= 0.0 && r <= 1.0)) {
    throw std::invalid_argument("feedback rate r must lie in [0, 1]");
  }
  if (t_max < 0) {
    throw std::invalid_argument("t_max must be nonnegative");
  }
  if (initial_state.kind == InitialState::Kind::explicit_bits &&
      initial_state.bits.size() != num_sites) {
    throw std::invalid_argument("initial bitstring length differs from L");
  }
  probes.times(t_max);  // throws on a malformed schedule
}

// ---------------------------------------------------------------------------
// Circuit

namespace {

GaussianState initial_gaussian_state(const CircuitParams& params, Rng& rng) {
  params.validate();
  return GaussianState::product_state(params.initial_state.realize(params.num_sites, rng));
}

}  // namespace

AdaptiveCircuit::AdaptiveCircuit(const CircuitParams& params, std::uint64_t trajectory,
                                 QuantumOptions options)
    : params_(params),
      options_(options),
      rng_(params.seed, trajectory),
      state_(initial_gaussian_state(params, rng_)),
      flags_(params.num_sites, true) {
  hopping_block_ =
      exponentiate(build_gate_kernel(params.num_sites, GateKind::hopping, 0, 1, kGateAngle)).block;
  pairing_block_ =
      exponentiate(build_gate_kernel(params.num_sites, GateKind::pairing, 0, 1, kGateAngle)).block;
}

void AdaptiveCircuit::reset(GaussianState state, FlagRegister flags) {
  if (state.num_sites() != params_.num_sites || flags.size() != params_.num_sites) {
    throw std::invalid_argument("AdaptiveCircuit::reset: size mismatch");
  }
  state_ = std::move(state);
  flags_ = std::move(flags);
}

void AdaptiveCircuit::record(CircuitEvent::Kind kind, std::size_t left, std::size_t right) {
  if (log_ != nullptr) {
    log_->push_back({kind, t_, left, right});
  }
}

std::pair<std::size_t, std::size_t> AdaptiveCircuit::link(LinkParity parity,
                                                          std::size_t k) const {
  const std::size_t n = params_.num_sites;
  auto sites = link_sites(parity, k, n);
  if (options_.shift_links) {
    sites = {(sites.first + 1) % n, (sites.second + 1) % n};
  }
  return sites;
}

void AdaptiveCircuit::unitary_half_layer(LinkParity parity) {
  const std::size_t n = params_.num_sites;
  for (std::size_t k = 0; k < n / 2; ++k) {
    const auto [left, right] = link(parity, k);
    if (!flags_.active(left) && !flags_.active(right)) {
      continue;
    }
    const bool hopping = rng_.uniform() < 0.5;
    // Block ordering is (c_i, c_j, c_i^dag, c_j^dag) with i < j.
    const std::size_t i = std::min(left, right);
    const std::size_t j = std::max(left, right);
    const std::array<std::size_t, 4> modes{i, j, i + n, j + n};
    state_.apply_unitary(modes, hopping ? hopping_block_ : pairing_block_);
    flags_.activate(left);
    flags_.activate(right);
    record(CircuitEvent::Kind::gate, left, right);
  }
}

void AdaptiveCircuit::measurement_half_layer(LinkParity parity) {
  const std::size_t n = params_.num_sites;
  for (std::size_t k = 0; k < n / 2; ++k) {
    const auto [left, right] = link(parity, k);
    if (!(rng_.uniform() < params_.p)) {
      continue;
    }
    bool n_left = false;
    bool n_right = false;
    const std::size_t first = std::min(left, right);
    const std::size_t second = std::max(left, right);
    const bool n_first = state_.measure(first, rng_.uniform(), options_.update).outcome;
    const bool n_second = state_.measure(second, rng_.uniform(), options_.update).outcome;
    (first == left ? n_left : n_right) = n_first;
    (second == left ? n_left : n_right) = n_second;
    record(CircuitEvent::Kind::measurement_pair, left, right);
    if (n_left == n_right) {
      continue;
    }
    if (is_target_order(parity, n_left, n_right)) {
      flags_.deactivate(left);
      flags_.deactivate(right);
      record(CircuitEvent::Kind::deactivate, left, right);
    } else if (rng_.uniform() < params_.r) {
      state_.apply_mode_swap(left, right);
      record(CircuitEvent::Kind::swap, left, right);
      flags_.deactivate(left);
      flags_.deactivate(right);
      record(CircuitEvent::Kind::deactivate, left, right);
    }
  }
}

void AdaptiveCircuit::step() {
  unitary_half_layer(LinkParity::odd);
  measurement_half_layer(LinkParity::odd);
  unitary_half_layer(LinkParity::even);
  measurement_half_layer(LinkParity::even);
  ++t_;
  if (options_.reorthonormalize_every > 0 && t_ % options_.reorthonormalize_every == 0) {
    state_.orthonormalize();
  }
}

// ---------------------------------------------------------------------------
// Trajectory driver

std::vector<std::size_t> entropy_cut_sizes(std::size_t num_sites,
                                           const std::vector<double>& fractions) {
  std::vector<std::size_t> cuts;
  for (double f : fractions) {
    const auto cut = static_cast<std::size_t>(std::llround(f * static_cast<double>(num_sites)));
    if (cut == 0 || cut >= num_sites) {
      throw std::invalid_argument("entropy fraction " + std::to_string(f) +
                                  " gives an empty or full region");
    }
    cuts.push_back(cut);
  }
  return cuts;
}

TimeSeries run_trajectory(const CircuitParams& params, const QuantumProbeSpec& probes,
                          std::uint64_t trajectory, QuantumOptions options) {
  params.validate();
  const auto cuts = entropy_cut_sizes(params.num_sites, probes.entropy_fractions);
  TimeSeries series;
  series.times = params.probes.times(params.t_max);
  const std::size_t rho_col = series.add_column("rho_active");
  const std::size_t delta_col = series.add_column("delta");
  std::vector<std::size_t> entropy_cols;
  for (std::size_t cut : cuts) {
    entropy_cols.push_back(series.add_column("S" + std::to_string(probes.renyi_index) + "_A" +
                                             std::to_string(cut)));
  }

  AdaptiveCircuit circuit(params, trajectory, options);
  try {
    for (std::int64_t probe_time : series.times) {
      while (circuit.time() < probe_time) {
        circuit.step();
      }
      series.values[rho_col].push_back(active_density(circuit.flags()));
      series.values[delta_col].push_back(charge_imbalance(circuit.state()));
      if (!cuts.empty()) {
        const auto profile = entropy_profile(circuit.state(), probes.renyi_index, cuts);
        for (std::size_t c = 0; c < cuts.size(); ++c) {
          series.values[entropy_cols[c]].push_back(profile[c].entropy);
        }
      }
    }
  } catch (const RankDeficiencyError& err) {
    throw TrajectoryError(trajectory, circuit.time(), err.what());
  }
  return series;
}

}  // namespace adaptff
