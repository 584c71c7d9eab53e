#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adaptff/gaussian_state.hpp"

namespace adaptff {

/// Per-site active (1) / inactive (0) flags.
class FlagRegister {
 public:
  FlagRegister() = default;
  explicit FlagRegister(std::size_t num_sites, bool active = true)
      : flags_(num_sites, active ? 1 : 0) {}
  explicit FlagRegister(Bits flags) : flags_(std::move(flags)) {}

  std::size_t size() const { return flags_.size(); }
  bool active(std::size_t site) const { return flags_[site] != 0; }
  void activate(std::size_t site) { flags_[site] = 1; }
  void deactivate(std::size_t site) { flags_[site] = 0; }
  std::size_t count_active() const;
  const Bits& bits() const { return flags_; }

  friend bool operator==(const FlagRegister&, const FlagRegister&) = default;

 private:
  Bits flags_;
};

/// Probe times with named observable columns. After ensemble averaging each
/// column also carries a standard error.
struct TimeSeries {
  std::vector<std::int64_t> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;   // values[column][probe]
  std::vector<std::vector<double>> stderrs;  // same shape as values, or empty
  std::map<std::string, std::string> metadata;

  std::size_t add_column(std::string name);
  std::size_t column_index(std::string_view name) const;  // throws if absent
  const std::vector<double>& column(std::string_view name) const;
  const std::vector<double>& column_stderr(std::string_view name) const;
  bool has_stderr() const { return !stderrs.empty(); }
  /// Throws std::logic_error when column lengths disagree with `times`.
  void validate() const;
};

/// Probe schedule shared by every runner: t = 0 plus either every `interval`
/// steps or `per_decade` log-spaced integer times, always ending at t_max.
struct ProbeSchedule {
  enum class Kind { linear, log };
  Kind kind = Kind::linear;
  std::int64_t interval = 1;
  int per_decade = 20;

  std::vector<std::int64_t> times(std::int64_t t_max) const;
};

/// rho_active = (1/L) sum_i f_i.
double active_density(const FlagRegister& flags);

/// Delta = (1/L) sum_i |<n_i> - <n_{i+1}>| on the ring.
double charge_imbalance(std::span<const double> occupations);
double charge_imbalance(const GaussianState& state);
double charge_imbalance(const Bits& bits);

/// log((L / pi) sin(pi |A| / L)).
double log_chord_length(std::size_t num_sites, std::size_t cut);

struct EntropyPoint {
  std::size_t cut = 0;
  double log_chord = 0.0;
  double entropy = 0.0;
};

/// S^(n) of the regions [0, cut) for each cut, with the chord coordinate.
std::vector<EntropyPoint> entropy_profile(const GaussianState& state, int n,
                                          std::span<const std::size_t> cuts);

/// Mean and standard error (sample standard deviation / sqrt(N)) per column
/// and probe time. Inputs must share times and column names. Summation runs in
/// input order, so the result does not depend on how inputs were produced.
TimeSeries ensemble_average(std::span<const TimeSeries> series);

}  // namespace adaptff
