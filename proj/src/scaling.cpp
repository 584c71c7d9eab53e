#include "adaptff/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace adaptff {

namespace {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_error = 0.0;
  double ss_res = 0.0;
  double ss_tot = 0.0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) {
    throw std::invalid_argument("least squares: abscissa is constant");
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    fit.ss_res += r * r;
  }
  fit.ss_tot = syy;
  if (x.size() > 2) {
    fit.slope_error = std::sqrt(fit.ss_res / (n - 2.0) / sxx);
  }
  return fit;
}

}  // namespace

ScalingExponents ScalingExponents::from_theta_z(double theta, double z, double nu_par) {
  ScalingExponents e;
  e.nu_par = nu_par;
  e.beta = theta * nu_par;
  e.nu_perp = nu_par / z;
  e.validate();
  return e;
}

void ScalingExponents::validate() const {
  if (!(beta > 0.0 && nu_par > 0.0 && nu_perp > 0.0)) {
    throw std::invalid_argument("scaling exponents must be positive");
  }
}

PowerLawFit powerlaw_exponent(std::span<const std::int64_t> times, std::span<const double> values,
                              double t_min, double t_max) {
  if (times.size() != values.size()) {
    throw std::invalid_argument("powerlaw_exponent: times and values differ in length");
  }
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto t = static_cast<double>(times[i]);
    if (t < t_min || t > t_max) {
      continue;
    }
    if (!(values[i] > 0.0) || t <= 0.0) {
      throw std::invalid_argument("powerlaw_exponent: nonpositive value at t = " +
                                  std::to_string(times[i]));
    }
    x.push_back(std::log(t));
    y.push_back(std::log(values[i]));
  }
  if (x.size() < 10) {
    throw std::invalid_argument("powerlaw_exponent: fewer than 10 points in the window");
  }
  const LinearFit fit = least_squares(x, y);
  return {-fit.slope, fit.slope_error, fit.intercept, x.size()};
}

PowerLawFit powerlaw_exponent(const TimeSeries& series, std::string_view column, double t_min,
                              double t_max) {
  return powerlaw_exponent(series.times, series.column(column), t_min, t_max);
}

FitWindow default_fit_window(std::span<const std::int64_t> times, std::span<const double> values,
                             double t_min, double plateau_slope) {
  if (times.empty()) {
    throw std::invalid_argument("default_fit_window: empty series");
  }
  FitWindow window{t_min, static_cast<double>(times.back())};
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto t = static_cast<double>(times[i]);
    if (t >= window.t_max / 10.0 && t >= t_min && values[i] > 0.0) {
      x.push_back(std::log(t));
      y.push_back(std::log(values[i]));
    }
  }
  if (x.size() >= 3 && -least_squares(x, y).slope < plateau_slope) {
    window.t_max /= 10.0;
  }
  return window;
}

Curve curve_from_series(const TimeSeries& series, std::string_view column, double key,
                        double t_min, double t_max, double max_relative_stderr) {
  const auto& values = series.column(column);
  const std::vector<double>* errors = nullptr;
  if (max_relative_stderr > 0.0) {
    if (!series.has_stderr()) {
      throw std::invalid_argument("curve_from_series: stderr cut needs an ensemble series");
    }
    errors = &series.column_stderr(column);
  }
  Curve curve;
  curve.key = key;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const auto t = static_cast<double>(series.times[i]);
    if (t >= t_min && t <= t_max) {
      if (errors != nullptr && !((*errors)[i] <= max_relative_stderr * std::abs(values[i]))) {
        break;
      }
      curve.x.push_back(t);
      curve.y.push_back(values[i]);
    }
  }
  return curve;
}

std::vector<Curve> collapse_transform(std::span<const Curve> curves, CollapseMode mode, double p_c,
                                      const ScalingExponents& exponents) {
  exponents.validate();
  std::vector<Curve> out;
  out.reserve(curves.size());
  for (const Curve& c : curves) {
    if (c.x.size() != c.y.size()) {
      throw std::invalid_argument("collapse_transform: curve x and y differ in length");
    }
    double x_scale = 1.0;
    double x_power = 1.0;
    double y_scale = 1.0;
    if (mode == CollapseMode::critical_L) {
      if (!(c.key > 0.0)) {
        throw std::invalid_argument("collapse_transform: L must be positive");
      }
      x_scale = std::pow(c.key, -exponents.z());
      y_scale = std::pow(c.key, exponents.z() * exponents.theta());
    } else {
      const double distance = std::abs(c.key - p_c);
      if (distance == 0.0) {
        throw std::invalid_argument("collapse_transform: p equals p_c in off-critical mode");
      }
      x_scale = distance;
      x_power = 1.0 / exponents.nu_par;
      y_scale = std::pow(distance, -exponents.beta);
    }
    Curve t{c.key, {}, {}};
    t.x.reserve(c.x.size());
    t.y.reserve(c.y.size());
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      const double x = x_power == 1.0 ? c.x[i] : std::copysign(std::pow(std::abs(c.x[i]), x_power), c.x[i]);
      t.x.push_back(x_scale * x);
      t.y.push_back(y_scale * c.y[i]);
    }
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

constexpr int kCollapseGrid = 64;

/// Log-log samples of a curve: x > 0, cut at the first nonpositive y.
struct LogCurve {
  std::vector<double> lx;
  std::vector<double> ly;

  double at(double l) const {
    const auto it = std::upper_bound(lx.begin(), lx.end(), l);
    if (it == lx.begin()) {
      return ly.front();
    }
    if (it == lx.end()) {
      return ly.back();
    }
    const auto k = static_cast<std::size_t>(it - lx.begin());
    const double w = (l - lx[k - 1]) / (lx[k] - lx[k - 1]);
    return (1.0 - w) * ly[k - 1] + w * ly[k];
  }
};

LogCurve to_log_curve(const Curve& c) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    if (c.x[i] <= 0.0) {
      continue;
    }
    pts.emplace_back(c.x[i], c.y[i]);
  }
  std::sort(pts.begin(), pts.end());
  LogCurve out;
  for (const auto& [x, y] : pts) {
    if (!(y > 0.0)) {
      break;
    }
    const double lx = std::log(x);
    if (!out.lx.empty() && lx <= out.lx.back()) {
      continue;  // duplicate abscissa
    }
    out.lx.push_back(lx);
    out.ly.push_back(std::log(y));
  }
  return out;
}

}  // namespace

double collapse_score(std::span<const Curve> curves) {
  if (curves.size() < 2) {
    throw std::invalid_argument("collapse_score: need at least two curves");
  }
  std::vector<LogCurve> logs;
  double lo = -1e300;
  double hi = 1e300;
  for (const Curve& c : curves) {
    logs.push_back(to_log_curve(c));
    if (logs.back().lx.size() < 2) {
      throw std::invalid_argument("collapse_score: a curve has fewer than two usable points");
    }
    lo = std::max(lo, logs.back().lx.front());
    hi = std::min(hi, logs.back().lx.back());
  }
  if (!(hi > lo)) {
    throw std::invalid_argument("collapse_score: curves do not overlap");
  }
  double total = 0.0;
  std::size_t terms = 0;
  for (int g = 0; g < kCollapseGrid; ++g) {
    const double l = lo + (hi - lo) * g / (kCollapseGrid - 1);
    for (std::size_t a = 0; a < logs.size(); ++a) {
      const double ya = logs[a].at(l);
      for (std::size_t b = a + 1; b < logs.size(); ++b) {
        const double d = ya - logs[b].at(l);
        total += d * d;
        ++terms;
      }
    }
  }
  return total / static_cast<double>(terms);
}

OffCriticalFit fit_off_critical_collapse(std::span<const Curve> curves, double p_c,
                                         std::span<const double> beta_grid,
                                         std::span<const double> nu_par_grid) {
  if (beta_grid.empty() || nu_par_grid.empty()) {
    throw std::invalid_argument("fit_off_critical_collapse: empty grid");
  }
  OffCriticalFit best;
  best.score = std::numeric_limits<double>::infinity();
  for (double beta : beta_grid) {
    for (double nu : nu_par_grid) {
      const ScalingExponents e{beta, nu, 1.0};
      const auto transformed = collapse_transform(curves, CollapseMode::off_critical_p, p_c, e);
      // Exponents that pull the curves apart in x have no collapse to score.
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (const Curve& c : transformed) {
        lo = std::max(lo, c.x.front());
        hi = std::min(hi, c.x.back());
      }
      if (!(hi > lo)) {
        continue;
      }
      const double s = collapse_score(transformed);
      if (s < best.score) {
        best = {beta, nu, s};
      }
    }
  }
  if (!std::isfinite(best.score)) {
    throw std::invalid_argument("fit_off_critical_collapse: no grid point gives overlapping curves");
  }
  return best;
}

CriticalScan scan_critical_point(std::span<const Curve> family, std::span<const double> p_c_grid,
                                 std::span<const double> theta_grid, double t_min, double t_max) {
  if (family.size() < 2) {
    throw std::invalid_argument("scan_critical_point: need at least two curves");
  }
  std::vector<const Curve*> sorted;
  for (const Curve& c : family) {
    if (c.x != family.front().x || c.y.size() != c.x.size()) {
      throw std::invalid_argument("scan_critical_point: curves must share probe times");
    }
    sorted.push_back(&c);
  }
  std::sort(sorted.begin(), sorted.end(), [](const Curve* a, const Curve* b) { return a->key < b->key; });

  const auto& times = family.front().x;
  CriticalScan scan;
  double best = 1e300;
  for (double p_c : p_c_grid) {
    if (p_c < sorted.front()->key || p_c > sorted.back()->key) {
      throw std::invalid_argument("scan_critical_point: candidate p_c outside the family");
    }
    std::size_t upper = 1;
    while (upper + 1 < sorted.size() && sorted[upper]->key < p_c) {
      ++upper;
    }
    const Curve& a = *sorted[upper - 1];
    const Curve& b = *sorted[upper];
    const double w = (p_c - a.key) / (b.key - a.key);
    std::vector<double> lt;
    std::vector<double> ly;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] < t_min || times[i] > t_max || times[i] <= 0.0) {
        continue;
      }
      if (!(a.y[i] > 0.0) || !(b.y[i] > 0.0)) {
        break;
      }
      lt.push_back(std::log(times[i]));
      ly.push_back((1.0 - w) * std::log(a.y[i]) + w * std::log(b.y[i]));
    }
    if (lt.size() < 3) {
      throw std::invalid_argument("scan_critical_point: window holds fewer than 3 points");
    }
    std::vector<double> row;
    for (double theta : theta_grid) {
      double mean = 0.0;
      for (std::size_t i = 0; i < lt.size(); ++i) {
        mean += ly[i] + theta * lt[i];
      }
      mean /= static_cast<double>(lt.size());
      double var = 0.0;
      for (std::size_t i = 0; i < lt.size(); ++i) {
        const double d = ly[i] + theta * lt[i] - mean;
        var += d * d;
      }
      var /= static_cast<double>(lt.size());
      row.push_back(var);
      if (var < best) {
        best = var;
        scan.p_c = p_c;
        scan.theta = theta;
      }
    }
    scan.residual.push_back(std::move(row));
  }
  return scan;
}

ChordFit fit_log_chord(std::span<const EntropyPoint> profile) {
  if (profile.size() < 5) {
    throw std::invalid_argument("fit_log_chord: need at least 5 cuts");
  }
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& point : profile) {
    x.push_back(point.log_chord);
    y.push_back(point.entropy);
  }
  const LinearFit fit = least_squares(x, y);
  ChordFit out;
  out.alpha = fit.slope;
  out.intercept = fit.intercept;
  out.r_squared = fit.ss_tot > 0.0 ? 1.0 - fit.ss_res / fit.ss_tot : (fit.ss_res == 0.0 ? 1.0 : 0.0);
  return out;
}

}  // namespace adaptff
