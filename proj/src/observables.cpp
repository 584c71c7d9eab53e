#include "adaptff/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace adaptff {

std::size_t FlagRegister::count_active() const {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), std::uint8_t{1}));
}

std::size_t TimeSeries::add_column(std::string name) {
  if (std::find(names.begin(), names.end(), name) != names.end()) {
    throw std::invalid_argument("TimeSeries: duplicate column " + name);
  }
  names.push_back(std::move(name));
  values.emplace_back();
  return names.size() - 1;
}

std::size_t TimeSeries::column_index(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw std::out_of_range("TimeSeries: no column named " + std::string(name));
  }
  return static_cast<std::size_t>(it - names.begin());
}

const std::vector<double>& TimeSeries::column(std::string_view name) const {
  return values[column_index(name)];
}

const std::vector<double>& TimeSeries::column_stderr(std::string_view name) const {
  if (!has_stderr()) {
    throw std::logic_error("TimeSeries: no standard errors (not an ensemble average)");
  }
  return stderrs[column_index(name)];
}

void TimeSeries::validate() const {
  if (values.size() != names.size() || (has_stderr() && stderrs.size() != names.size())) {
    throw std::logic_error("TimeSeries: column bookkeeping is inconsistent");
  }
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (values[c].size() != times.size() ||
        (has_stderr() && stderrs[c].size() != times.size())) {
      throw std::logic_error("TimeSeries: column " + names[c] + " has the wrong length");
    }
  }
}

std::vector<std::int64_t> ProbeSchedule::times(std::int64_t t_max) const {
  if (t_max < 0) {
    throw std::invalid_argument("ProbeSchedule: t_max must be nonnegative");
  }
  std::vector<std::int64_t> out{0};
  if (kind == Kind::linear) {
    if (interval <= 0) {
      throw std::invalid_argument("ProbeSchedule: interval must be positive");
    }
    for (std::int64_t t = interval; t <= t_max; t += interval) {
      out.push_back(t);
    }
  } else {
    if (per_decade <= 0) {
      throw std::invalid_argument("ProbeSchedule: per_decade must be positive");
    }
    for (int k = 0;; ++k) {
      const auto t = static_cast<std::int64_t>(std::llround(std::pow(10.0, k / static_cast<double>(per_decade))));
      if (t > t_max) {
        break;
      }
      if (t > out.back()) {
        out.push_back(t);
      }
    }
  }
  if (out.back() != t_max) {
    out.push_back(t_max);
  }
  return out;
}

double active_density(const FlagRegister& flags) {
  if (flags.size() == 0) {
    return 0.0;
  }
  return static_cast<double>(flags.count_active()) / static_cast<double>(flags.size());
}

double charge_imbalance(std::span<const double> occupations) {
  const std::size_t n = occupations.size();
  if (n == 0) {
    return 0.0;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += std::abs(occupations[i] - occupations[(i + 1) % n]);
  }
  return sum / static_cast<double>(n);
}

double charge_imbalance(const GaussianState& state) {
  const auto occ = state.occupations();
  return charge_imbalance(std::span<const double>(occ));
}

double charge_imbalance(const Bits& bits) {
  const std::size_t n = bits.size();
  std::size_t unequal = 0;
  for (std::size_t i = 0; i < n; ++i) {
    unequal += bits[i] != bits[(i + 1) % n];
  }
  return n == 0 ? 0.0 : static_cast<double>(unequal) / static_cast<double>(n);
}

double log_chord_length(std::size_t num_sites, std::size_t cut) {
  const double l = static_cast<double>(num_sites);
  return std::log(l / std::numbers::pi * std::sin(std::numbers::pi * static_cast<double>(cut) / l));
}

std::vector<EntropyPoint> entropy_profile(const GaussianState& state, int n,
                                          std::span<const std::size_t> cuts) {
  const auto cov = state.covariance();
  std::vector<EntropyPoint> profile;
  profile.reserve(cuts.size());
  for (std::size_t cut : cuts) {
    if (cut == 0 || cut >= state.num_sites()) {
      throw std::invalid_argument("entropy_profile: cuts must lie in (0, L)");
    }
    profile.push_back({cut, log_chord_length(state.num_sites(), cut),
                       renyi_entropy(cov, SiteInterval{0, cut}, n)});
  }
  return profile;
}

TimeSeries ensemble_average(std::span<const TimeSeries> series) {
  if (series.empty()) {
    throw std::invalid_argument("ensemble_average: no series");
  }
  const TimeSeries& first = series.front();
  first.validate();
  for (const auto& s : series) {
    if (s.times != first.times || s.names != first.names) {
      throw std::invalid_argument("ensemble_average: mismatched times or columns");
    }
    s.validate();
  }
  TimeSeries out;
  out.times = first.times;
  out.names = first.names;
  out.metadata = first.metadata;
  out.metadata["trajectories"] = std::to_string(series.size());
  const std::size_t probes = first.times.size();
  const auto count = static_cast<double>(series.size());
  for (std::size_t c = 0; c < first.names.size(); ++c) {
    std::vector<double> mean(probes, 0.0);
    std::vector<double> err(probes, 0.0);
    for (std::size_t k = 0; k < probes; ++k) {
      double sum = 0.0;
      for (const auto& s : series) {
        sum += s.values[c][k];
      }
      mean[k] = sum / count;
      if (series.size() > 1) {
        double sq = 0.0;
        for (const auto& s : series) {
          const double d = s.values[c][k] - mean[k];
          sq += d * d;
        }
        err[k] = std::sqrt(sq / (count - 1.0) / count);
      }
    }
    out.values.push_back(std::move(mean));
    out.stderrs.push_back(std::move(err));
  }
  return out;
}

}  // namespace adaptff
