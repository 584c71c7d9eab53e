#include "adaptff/classical_model.hpp"

#include <cmath>
#include <stdexcept>

namespace adaptff {

ClassicalState init_classical(const CircuitParams& params, Rng& rng) {
  params.validate();
  ClassicalState state;
  state.bits = params.initial_state.realize(params.num_sites, rng);
  state.flags = FlagRegister(params.num_sites, true);
  return state;
}

void classical_unitary_update(ClassicalState& state, std::size_t i, Rng& rng) {
  const std::size_t j = (i + 1) % state.size();
  const std::uint64_t draw = rng.next_u64();
  const bool hopping = (draw >> 63) != 0;
  const std::uint8_t coin = (draw >> 62) & 1;
  const bool unequal = state.bits[i] != state.bits[j];
  if (hopping == unequal) {
    // Hopping mixes 10 <-> 01, pairing mixes 00 <-> 11.
    state.bits[i] = coin;
    state.bits[j] = hopping ? coin ^ 1 : coin;
  }
  state.flags.activate(i);
  state.flags.activate(j);
}

void classical_measure_feedback(ClassicalState& state, std::size_t i, LinkParity parity,
                                double p, double r, Rng& rng) {
  if (!(rng.uniform() < p)) {
    return;
  }
  const std::size_t j = (i + 1) % state.size();
  const bool left = state.bits[i] != 0;
  const bool right = state.bits[j] != 0;
  if (left == right) {
    return;
  }
  if (is_target_order(parity, left, right)) {
    state.flags.deactivate(i);
    state.flags.deactivate(j);
  } else if (rng.uniform() < r) {
    std::swap(state.bits[i], state.bits[j]);
    state.flags.deactivate(i);
    state.flags.deactivate(j);
  }
}

void apply_bitflip_noise(ClassicalState& state, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw std::invalid_argument("bit-flip rate must lie in [0, 1]");
  }
  if (rate == 0.0) {
    return;
  }
  for (auto& b : state.bits) {
    if (rng.uniform() < rate) {
      b ^= 1;
    }
  }
}

namespace {

void half_step(ClassicalState& state, LinkParity parity, const CircuitParams& params,
               bool skip_idle, Rng& rng) {
  const std::size_t n = state.size();
  const std::size_t offset = parity == LinkParity::odd ? 0 : 1;
  for (std::size_t k = 0; k < n / 2; ++k) {
    const std::size_t i = 2 * k + offset;
    const std::size_t j = (i + 1) % n;
    if (state.flags.active(i) || state.flags.active(j)) {
      classical_unitary_update(state, i, rng);
    }
  }
  for (std::size_t k = 0; k < n / 2; ++k) {
    const std::size_t i = 2 * k + offset;
    if (skip_idle && !state.flags.active(i) && !state.flags.active((i + 1) % n)) {
      continue;
    }
    classical_measure_feedback(state, i, parity, params.p, params.r, rng);
  }
}

}  // namespace

void classical_step(ClassicalState& state, const CircuitParams& params, double noise, Rng& rng) {
  const bool skip_idle = noise == 0.0;
  half_step(state, LinkParity::odd, params, skip_idle, rng);
  half_step(state, LinkParity::even, params, skip_idle, rng);
  apply_bitflip_noise(state, noise, rng);
  ++state.t;
}

Bits bond_particles(const Bits& bits) {
  const std::size_t n = bits.size();
  Bits bonds(n);
  for (std::size_t i = 0; i < n; ++i) {
    bonds[i] = bits[i] == bits[(i + 1) % n] ? 1 : 0;
  }
  return bonds;
}

double bond_density(const Bits& bits) {
  return bits.empty() ? 0.0 : 1.0 - charge_imbalance(bits);
}

TimeSeries run_classical(const CircuitParams& params, double noise, std::uint64_t trajectory) {
  params.validate();
  if (!(noise >= 0.0 && noise <= 1.0)) {
    throw std::invalid_argument("bit-flip rate must lie in [0, 1]");
  }
  Rng rng(params.seed, trajectory);
  ClassicalState state = init_classical(params, rng);
  TimeSeries series;
  series.times = params.probes.times(params.t_max);
  const std::size_t rho_col = series.add_column("rho_active");
  const std::size_t delta_col = series.add_column("delta");
  const std::size_t bond_col = series.add_column("bond_density");
  for (std::int64_t probe_time : series.times) {
    // Without noise an absorbed state is frozen and draws nothing, so the
    // remaining steps can be skipped without changing the stream.
    while (state.t < probe_time) {
      if (noise == 0.0 && state.flags.count_active() == 0) {
        state.t = probe_time;
        break;
      }
      classical_step(state, params, noise, rng);
    }
    const double delta = charge_imbalance(state.bits);
    series.values[rho_col].push_back(active_density(state.flags));
    series.values[delta_col].push_back(delta);
    series.values[bond_col].push_back(1.0 - delta);
  }
  return series;
}

// ---------------------------------------------------------------------------
// BARW

void BarwParams::validate() const {
  if (num_sites < 3) {
    throw std::invalid_argument("BARW needs at least 3 sites");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("annihilation probability q must lie in [0, 1]");
  }
  if (!(branching >= 0.0 && branching <= 1.0)) {
    throw std::invalid_argument("branching probability must lie in [0, 1]");
  }
  if (t_max < 0) {
    throw std::invalid_argument("t_max must be nonnegative");
  }
  probes.times(t_max);
}

Barw::Barw(const BarwParams& params, std::uint64_t trajectory)
    : Barw(params, Bits(params.num_sites, 1), trajectory) {}

Barw::Barw(const BarwParams& params, const Bits& occupied, std::uint64_t trajectory)
    : params_(params),
      rng_(params.seed, trajectory),
      occupied_(params.num_sites, 0),
      slot_(params.num_sites, 0) {
  params_.validate();
  if (occupied.size() != params.num_sites) {
    throw std::invalid_argument("BARW occupation length differs from L");
  }
  for (std::size_t i = 0; i < occupied.size(); ++i) {
    if (occupied[i]) {
      add(i);
    }
  }
}

void Barw::add(std::size_t site) {
  occupied_[site] = 1;
  slot_[site] = particles_.size();
  particles_.push_back(site);
}

void Barw::remove(std::size_t site) {
  const std::size_t idx = slot_[site];
  const std::size_t last = particles_.back();
  particles_[idx] = last;
  slot_[last] = idx;
  particles_.pop_back();
  occupied_[site] = 0;
}

double Barw::density() const {
  return static_cast<double>(particles_.size()) / static_cast<double>(params_.num_sites);
}

void Barw::update() {
  if (particles_.empty()) {
    return;
  }
  const std::size_t n = params_.num_sites;
  time_ += 1.0 / static_cast<double>(particles_.size());
  const std::size_t site = particles_[rng_.below(particles_.size())];
  const std::size_t left = (site + n - 1) % n;
  const std::size_t right = (site + 1) % n;
  if (rng_.uniform() < params_.branching) {
    const bool left_occ = occupied_[left] != 0;
    const bool right_occ = occupied_[right] != 0;
    if (!left_occ && !right_occ) {
      add(left);
      add(right);
    } else if (left_occ && right_occ) {
      if (rng_.uniform() < params_.q) {
        remove(left);
        remove(right);
      }
    } else if (rng_.uniform() < params_.q) {
      // One offspring annihilates with the occupied neighbour, the other lands.
      remove(left_occ ? left : right);
      add(left_occ ? right : left);
    }
    return;
  }
  const std::size_t target = rng_.uniform() < 0.5 ? left : right;
  if (!occupied_[target]) {
    remove(site);
    add(target);
  } else if (rng_.uniform() < params_.q) {
    remove(site);
    remove(target);
  }
}

void Barw::sweep() {
  const double next = std::floor(time_) + 1.0;
  while (!particles_.empty() && time_ < next) {
    update();
  }
  if (particles_.empty()) {
    time_ = next;
  }
}

TimeSeries run_barw(const BarwParams& params, std::uint64_t trajectory) {
  Barw barw(params, trajectory);
  TimeSeries series;
  series.times = params.probes.times(params.t_max);
  const std::size_t col = series.add_column("density");
  std::int64_t t = 0;
  for (std::int64_t probe_time : series.times) {
    while (t < probe_time) {
      barw.sweep();
      ++t;
    }
    series.values[col].push_back(barw.density());
  }
  return series;
}

}  // namespace adaptff
