#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "adaptff/observables.hpp"

namespace adaptff {

/// Critical exponents; theta and z are always derived, never stored.
struct ScalingExponents {
  double beta = 0.0;
  double nu_par = 0.0;
  double nu_perp = 0.0;

  double theta() const { return beta / nu_par; }
  double z() const { return nu_par / nu_perp; }

  /// Exponents with the given theta and z; nu_par only fixes the overall scale.
  static ScalingExponents from_theta_z(double theta, double z, double nu_par = 1.0);
  /// Throws std::invalid_argument unless all three are positive.
  void validate() const;
};

/// Reference values for the parity-conserving class and for diffusive decay.
struct PcReference {
  static constexpr double theta = 0.286;
  static constexpr double z = 1.744;
  static constexpr double diffusive_theta = 0.5;
  static constexpr double diffusive_z = 2.0;
};

struct PowerLawFit {
  double exponent = 0.0;  // positive for a decay
  double error = 0.0;     // standard error from the residuals
  double intercept = 0.0; // of log(value) against log(t)
  std::size_t points = 0;
};

/// Least-squares slope of log(value) against log(t) over t in [t_min, t_max],
/// sign-flipped. Needs at least 10 points in the window, all positive.
PowerLawFit powerlaw_exponent(std::span<const std::int64_t> times, std::span<const double> values,
                              double t_min, double t_max);
PowerLawFit powerlaw_exponent(const TimeSeries& series, std::string_view column, double t_min,
                              double t_max);

/// Fitting window [t_min, t_end] with the final decade dropped when the curve
/// has flattened there (local exponent below `plateau_slope`).
struct FitWindow {
  double t_min = 0.0;
  double t_max = 0.0;
};
FitWindow default_fit_window(std::span<const std::int64_t> times, std::span<const double> values,
                             double t_min = 100.0, double plateau_slope = 0.05);

/// One curve of a scaling family: `key` is L (critical_L) or p (off_critical_p).
struct Curve {
  double key = 0.0;
  std::vector<double> x;
  std::vector<double> y;
};

/// Curve from a TimeSeries column, keeping probe times in [t_min, t_max].
/// With `max_relative_stderr` set (ensemble series only), the curve ends
/// before the first kept probe whose stderr / mean exceeds it.
Curve curve_from_series(const TimeSeries& series, std::string_view column, double key,
                        double t_min = 0.0, double t_max = 1e300,
                        double max_relative_stderr = 0.0);

enum class CollapseMode { critical_L, off_critical_p };

/// critical_L: (t, n) -> (t / L^z, n L^(z theta)).
/// off_critical_p: (t, n) -> (|p - p_c| t^(1/nu_par), n |p - p_c|^(-beta)).
std::vector<Curve> collapse_transform(std::span<const Curve> curves, CollapseMode mode, double p_c,
                                      const ScalingExponents& exponents);

/// Mean over a 64-point log-spaced grid on the common x range, and over all
/// curve pairs, of (ln y_a - ln y_b)^2. Curves are interpolated linearly in
/// log-log coordinates; points with x <= 0 are dropped and each curve stops at
/// its first nonpositive y. Throws if fewer than two curves or no overlap.
double collapse_score(std::span<const Curve> curves);

/// Best off-critical collapse over a (beta, nu_par) grid; nu_perp is carried
/// along unchanged since the off-critical transform does not use it.
struct OffCriticalFit {
  double beta = 0.0;
  double nu_par = 0.0;
  double score = 0.0;
};
OffCriticalFit fit_off_critical_collapse(std::span<const Curve> curves, double p_c,
                                         std::span<const double> beta_grid,
                                         std::span<const double> nu_par_grid);

struct CriticalScan {
  double p_c = 0.0;
  double theta = 0.0;
  /// residual[i][j] for p_c_grid[i], theta_grid[j].
  std::vector<std::vector<double>> residual;
};

/// For each candidate p_c the curve is interpolated linearly in p between the
/// neighbouring family members (in ln y); its straightness for a given theta
/// is the variance of ln y + theta ln t over the window. Returns the minimum.
CriticalScan scan_critical_point(std::span<const Curve> family, std::span<const double> p_c_grid,
                                 std::span<const double> theta_grid, double t_min, double t_max);

struct ChordFit {
  double alpha = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// S against log((L / pi) sin(pi |A| / L)); needs at least 5 cuts and a
/// nonconstant abscissa. A profile fitted without residual has R^2 = 1.
ChordFit fit_log_chord(std::span<const EntropyPoint> profile);

}  // namespace adaptff
