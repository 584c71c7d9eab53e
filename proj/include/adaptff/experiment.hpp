#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "adaptff/adaptive_circuit.hpp"
#include "adaptff/classical_model.hpp"
#include "adaptff/observables.hpp"
#include "adaptff/scaling.hpp"

namespace adaptff {

#ifndef ADAPTFF_VERSION
#define ADAPTFF_VERSION "unknown"
#endif
inline constexpr const char* kCodeVersion = ADAPTFF_VERSION;

enum class ExperimentMode { quantum, classical, barw };

/// A run described by a flat JSON object. Keys:
///
///   mode          "quantum" | "classical" | "barw"          (required)
///   L, t_max, seed, trajectories, probes, output            (all modes)
///   p, r, initial_state                                     (quantum, classical)
///   entropy_cuts, renyi_index                               (quantum)
///   noise                                                   (classical)
///   q, branching                                            (barw)
///
/// `probes` is {"kind": "linear", "interval": n} or {"kind": "log",
/// "per_decade": n}. `entropy_cuts` lists region sizes as fractions of L.
/// Keys outside this set, or not belonging to the mode, are errors.
struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::classical;
  CircuitParams circuit;  // quantum and classical
  BarwParams barw;        // barw
  std::size_t trajectories = 1;
  double noise = 0.0;
  QuantumProbeSpec quantum_probes;
  std::string output;

  std::uint64_t seed() const;
  void set_seed(std::uint64_t seed);

  /// Throws std::invalid_argument with a message naming the offending key.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  /// Every key of the mode, defaults included; from_json(to_json()) round-trips.
  nlohmann::json to_json() const;
  void validate() const;
};

std::string to_string(ExperimentMode mode);
ExperimentMode parse_mode(const std::string& text);

/// Calls `task(k)` for k in [0, count) on up to `threads` workers and returns
/// the results in index order. If any task throws, the exception of the lowest
/// failing index is rethrown after all workers stop; tasks not yet started are
/// skipped.
std::vector<TimeSeries> run_parallel(std::size_t count, std::size_t threads,
                                     const std::function<TimeSeries(std::size_t)>& task);

/// One trajectory of the configured model.
TimeSeries run_single(const ExperimentConfig& config, std::uint64_t trajectory);

/// Ensemble mean and standard error over `config.trajectories`. The reduction
/// runs in trajectory order, so the result is independent of `threads`.
/// Failures surface as TrajectoryError carrying the trajectory index.
TimeSeries run_experiment(const ExperimentConfig& config, std::size_t threads = 1);

/// Header "t,<col>_mean,<col>_stderr,..." then one row per probe time, every
/// number printed with 17 significant digits.
void write_csv(std::ostream& out, const TimeSeries& series);
std::string csv_string(const TimeSeries& series);
/// Reads a file written by write_csv.
TimeSeries read_csv(const std::string& path);

/// Config echo, master seed, trajectory count and code version.
nlohmann::json metadata_json(const ExperimentConfig& config);

/// Writes <path> and <path>.meta.json.
void write_outputs(const std::string& path, const ExperimentConfig& config,
                   const TimeSeries& series);

/// Mean of a column over the final quarter of the probe times (at least one).
double steady_state(const TimeSeries& series, std::string_view column);

/// Ensemble entropy profile at the last probe time: one point per column
/// "S<n>_A<cut>", with the chord coordinate of the cut.
struct ProfilePoint {
  std::size_t cut = 0;
  double log_chord = 0.0;
  double mean = 0.0;
  double error = 0.0;  // standard error of the mean
};
std::vector<ProfilePoint> final_entropy_profile(const TimeSeries& series, std::size_t num_sites,
                                                int renyi_index);
ChordFit fit_profile(const std::vector<ProfilePoint>& profile);

/// Phase table over (p, r) points, each run with the base config.
struct SweepRow {
  double p = 0.0;
  double r = 0.0;
  double rho_active = 0.0;
  double delta = 0.0;
  std::optional<ChordFit> chord;  // quantum runs with at least 5 entropy cuts
  std::string status = "ok";      // or the failure message
};

/// Reads {"base": <config>, "grid": [[p, r], ...]}.
struct SweepConfig {
  ExperimentConfig base;
  std::vector<std::pair<double, double>> grid;

  static SweepConfig from_json(const nlohmann::json& j);
  static SweepConfig load(const std::string& path);
};

/// A failing grid point yields a row with its message and the sweep continues.
std::vector<SweepRow> run_sweep(const SweepConfig& sweep, std::size_t threads = 1);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Collapse score of a family at the given exponents and with each exponent
/// scaled by 0.8 and 1.2 in turn (theta, z in critical_L mode; beta, nu_par in
/// off_critical_p mode).
struct CollapseEntry {
  std::string label;
  ScalingExponents exponents;
  double score = 0.0;
};
std::vector<CollapseEntry> collapse_table(const std::vector<Curve>& family, CollapseMode mode,
                                          double p_c, const ScalingExponents& reference);

}  // namespace adaptff
