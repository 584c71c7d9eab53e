// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// `acceptance 4 8` runs only the listed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "adaptff/adaptive_circuit.hpp"
#include "adaptff/classical_model.hpp"
#include "adaptff/experiment.hpp"
#include "adaptff/oracle_check.hpp"
#include "adaptff/scaling.hpp"

using namespace adaptff;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::size_t threads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentConfig classical_config(std::size_t L, double p, double r, std::int64_t t_max,
                                  std::size_t trajectories, std::uint64_t seed = 1) {
  return ExperimentConfig::from_json(json{{"mode", "classical"},
                                          {"L", L},
                                          {"p", p},
                                          {"r", r},
                                          {"t_max", t_max},
                                          {"seed", seed},
                                          {"trajectories", trajectories},
                                          {"probes", {{"kind", "log"}, {"per_decade", 20}}}});
}

// Critical ensembles at p = 0.605 with t_max = L^z, shared by criteria 4 and 8.
const std::map<std::size_t, std::size_t> kCollapseTrajectories{{250, 2000}, {500, 600}, {1000, 200}};
constexpr double kCriticalP = 0.605;

const TimeSeries& critical_series(std::size_t L) {
  static std::map<std::size_t, TimeSeries> cache;
  auto it = cache.find(L);
  if (it == cache.end()) {
    const auto t_max = static_cast<std::int64_t>(std::pow(static_cast<double>(L), PcReference::z));
    it = cache.emplace(L, run_experiment(classical_config(L, kCriticalP, 1.0, t_max,
                                                          kCollapseTrajectories.at(L)),
                                         threads()))
             .first;
  }
  return it->second;
}

double critical_theta() {
  return powerlaw_exponent(critical_series(1000), "rho_active", 100, 1e4).exponent;
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  OracleCheckOptions options;
  options.depth = 10;
  options.sizes = {2, 4, 6, 8};
  options.trials = 100;
  const auto report = oracle_check(options);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {report.passed() && seconds < 60.0,
          fmt("%zu scripts, max |dC| %.2e, max |dS2| %.2e (tol 1e-8), max |dP| %.2e (tol 1e-10), %.1f s",
              report.scripts, report.max.covariance, report.max.entropy, report.max.born, seconds)};
}

int parity_of(const Bits& bits) {
  return std::accumulate(bits.begin(), bits.end(), 0) % 2;
}

Outcome parity_conservation() {
  const auto start = std::chrono::steady_clock::now();
  CircuitParams params;
  params.num_sites = 16;
  params.p = 0.5;
  params.r = 0.5;
  std::size_t samples = 0;
  std::size_t violations = 0;
  for (std::uint64_t traj = 0; traj < 50; ++traj) {
    AdaptiveCircuit circuit(params, traj);
    Rng sampler(1000, traj);
    const int initial = parity_of(sample_bitstring(circuit.state(), sampler));
    for (int t = 0; t < 200; ++t) {
      circuit.step();
      violations += parity_of(sample_bitstring(circuit.state(), sampler)) != initial;
      ++samples;
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {violations == 0 && seconds < 60.0,
          fmt("%zu sampled bitstrings, %zu parity changes, %.1f s", samples, violations, seconds)};
}

Outcome absorbing_fixed_point() {
  std::size_t failures = 0;
  for (double p : {0.0, 0.5, 1.0}) {
    for (double r : {0.0, 0.5, 1.0}) {
      CircuitParams params;
      params.num_sites = 16;
      params.p = p;
      params.r = r;
      AdaptiveCircuit circuit(params, 0);
      const GaussianState neel = GaussianState::product_state(neel_bits(16));
      circuit.reset(neel, FlagRegister(16, false));
      const auto before = neel.covariance().matrix;
      for (int t = 0; t < 1000; ++t) {
        circuit.step();
      }
      failures += circuit.state().covariance().matrix != before || circuit.flags().count_active() != 0;

      ClassicalState s{neel_bits(16), FlagRegister(16, false), 0};
      Rng rng(1, 0);
      for (int t = 0; t < 1000; ++t) {
        classical_step(s, params, 0.0, rng);
      }
      failures += s.bits != neel_bits(16) || s.flags.count_active() != 0;
    }
  }
  return {failures == 0, fmt("9 (p, r) pairs x {quantum, classical}, 1000 steps, %zu changed states", failures)};
}

Outcome pc_exponents() {
  const double theta_c = critical_theta();
  const auto above = run_experiment(classical_config(1000, 0.8, 1.0, 10000, 200), threads());
  const double theta_above = powerlaw_exponent(above, "rho_active", 100, 1e4).exponent;
  const auto below = run_experiment(classical_config(1000, 0.4, 1.0, 10000, 200), threads());
  // Saturation: the last decade is flat by the plateau test and the level is finite.
  const double late_slope = powerlaw_exponent(below, "rho_active", 1e3, 1e4).exponent;
  const double level = steady_state(below, "rho_active");
  const bool ok = theta_c >= 0.256 && theta_c <= 0.316 && theta_above >= 0.45 && theta_above <= 0.55 &&
                  std::abs(late_slope) < 0.05 && level > 0.05;
  return {ok, fmt("theta(0.605) = %.4f in [0.256, 0.316], theta(0.8) = %.4f in [0.45, 0.55], "
                  "p = 0.4 plateau %.4f (last-decade slope %.4f)",
                  theta_c, theta_above, level, late_slope)};
}

Outcome feedback_transition() {
  // Effective-exponent test: a curve whose last-decade decay is slower than the
  // critical decay at p = 0.605 bends towards saturation, a faster one decays.
  const double theta = critical_theta();
  std::string detail;
  double last_saturating = -1.0;
  double first_decaying = 2.0;
  for (double r : {0.2, 0.25, 0.3, 0.325, 0.35, 0.375, 0.4, 0.45, 0.5}) {
    const auto series = run_experiment(classical_config(1000, 1.0, r, 10000, 50), threads());
    const double slope = powerlaw_exponent(series, "rho_active", 1e3, 1e4).exponent;
    if (slope < theta) {
      last_saturating = std::max(last_saturating, r);
    } else {
      first_decaying = std::min(first_decaying, r);
    }
    detail += fmt("%s%.3f:%.3f", detail.empty() ? "" : " ", r, slope);
  }
  const double r_c = 0.5 * (last_saturating + first_decaying);
  const bool ordered = last_saturating < first_decaying;
  return {ordered && r_c >= 0.30 && r_c <= 0.40,
          fmt("r_c = %.4f in [0.30, 0.40] (%s); last-decade exponents against theta = %.4f: ", r_c,
              ordered ? "monotone" : "NOT monotone", theta) +
              detail};
}

Outcome quantum_classical_agreement() {
  const json probes{{"kind", "linear"}, {"interval", 10}};
  const auto quantum = run_experiment(
      ExperimentConfig::from_json(json{{"mode", "quantum"}, {"L", 32}, {"p", 0.5}, {"r", 1.0},
                                       {"t_max", 200}, {"seed", 1}, {"trajectories", 200}, {"probes", probes}}),
      threads());
  const auto classical = run_experiment(
      ExperimentConfig::from_json(json{{"mode", "classical"}, {"L", 32}, {"p", 0.5}, {"r", 1.0},
                                       {"t_max", 200}, {"seed", 2}, {"trajectories", 200}, {"probes", probes}}),
      threads());
  const auto& qm = quantum.column("rho_active");
  const auto& qe = quantum.column_stderr("rho_active");
  const auto& cm = classical.column("rho_active");
  const auto& ce = classical.column_stderr("rho_active");
  double worst = 0.0;
  bool ok = quantum.times == classical.times;
  for (std::size_t k = 0; ok && k < qm.size(); ++k) {
    const double se = std::hypot(qe[k], ce[k]);
    const double diff = std::abs(qm[k] - cm[k]);
    if (se == 0.0) {
      ok = diff == 0.0;
      continue;
    }
    worst = std::max(worst, diff / se);
  }
  ok = ok && worst <= 3.0;
  return {ok, fmt("%zu probe times, worst |difference| = %.2f combined standard errors (limit 3)",
                  qm.size(), worst)};
}

Outcome entanglement_phases() {
  std::vector<double> fractions;
  for (int cut = 4; cut <= 64; cut += 4) {
    fractions.push_back(cut / 128.0);
  }
  auto profile_at = [&](double p) {
    const auto config = ExperimentConfig::from_json(
        json{{"mode", "quantum"}, {"L", 128}, {"p", p}, {"r", 1.0}, {"t_max", 256}, {"seed", 1},
             {"trajectories", 50}, {"entropy_cuts", fractions}, {"renyi_index", 2},
             {"probes", {{"kind", "linear"}, {"interval", 256}}}});
    return final_entropy_profile(run_experiment(config, threads()), 128, 2);
  };
  const auto low = profile_at(0.1);
  const ChordFit fit = fit_profile(low);
  const auto high = profile_at(0.5);
  double s16 = 0.0;
  double s32 = 0.0;
  for (const auto& point : high) {
    s16 = point.cut == 16 ? point.mean : s16;
    s32 = point.cut == 32 ? point.mean : s32;
  }
  const bool ok = fit.alpha > 0.0 && fit.r_squared >= 0.98 && s32 - s16 < 0.1;
  return {ok, fmt("p = 0.1: alpha = %.4f, R^2 = %.4f (>= 0.98); p = 0.5: S(32) - S(16) = %.4f (< 0.1)",
                  fit.alpha, fit.r_squared, s32 - s16)};
}

Outcome scaling_collapse() {
  // Curves start at t = 100 (transients) and stop where the ensemble
  // standard error passes 10% of the mean.
  constexpr double kMaxRelativeError = 0.1;
  std::vector<Curve> family;
  for (const auto& [L, n] : kCollapseTrajectories) {
    family.push_back(curve_from_series(critical_series(L), "rho_active", static_cast<double>(L), 100.0,
                                       1e300, kMaxRelativeError));
  }
  const auto table = collapse_table(family, CollapseMode::critical_L, 0.0,
                                    ScalingExponents::from_theta_z(PcReference::theta, PcReference::z));
  bool collapse_ok = true;
  std::string scores;
  for (std::size_t k = 0; k < table.size(); ++k) {
    collapse_ok = collapse_ok && (k == 0 || table[0].score < table[k].score);
    scores += fmt("%s%s %.3e", k == 0 ? "" : ", ", table[k].label.c_str(), table[k].score);
  }

  // Off-critical family on the active side, L = 1000.
  std::vector<Curve> off;
  for (double p : {0.53, 0.55, 0.57, 0.58, 0.59}) {
    const auto series = run_experiment(classical_config(1000, p, 1.0, 20000, 100, 7), threads());
    off.push_back(curve_from_series(series, "rho_active", p, 100.0, 1e300, kMaxRelativeError));
  }
  std::vector<double> beta_grid;
  for (int k = 40; k <= 160; ++k) {
    beta_grid.push_back(k / 100.0);
  }
  std::vector<double> nu_grid;
  for (int k = 20; k <= 120; ++k) {
    nu_grid.push_back(k / 20.0);
  }
  const auto fit = fit_off_critical_collapse(off, kCriticalP, beta_grid, nu_grid);
  const double theta = critical_theta();
  const double ratio = fit.beta / (fit.nu_par * theta);
  const bool relation_ok = std::abs(ratio - 1.0) <= 0.15;
  return {collapse_ok && relation_ok,
          "scores: " + scores +
              fmt("; beta = %.2f, nu_par = %.2f, theta = %.4f, beta / (nu_par theta) = %.3f (within 0.15 of 1)",
                  fit.beta, fit.nu_par, theta, ratio)};
}

Outcome determinism() {
  const std::vector<json> configs{
      json{{"mode", "classical"}, {"L", 200}, {"p", 0.6}, {"r", 1.0}, {"t_max", 500}, {"seed", 5},
           {"trajectories", 24}, {"probes", {{"kind", "log"}, {"per_decade", 10}}}},
      json{{"mode", "quantum"}, {"L", 16}, {"p", 0.3}, {"r", 0.5}, {"t_max", 60}, {"seed", 5},
           {"trajectories", 24}, {"entropy_cuts", {0.25, 0.5}}, {"probes", {{"kind", "linear"}, {"interval", 5}}}},
      json{{"mode", "barw"}, {"L", 200}, {"q", 0.5}, {"t_max", 200}, {"seed", 5}, {"trajectories", 24},
           {"probes", {{"kind", "log"}, {"per_decade", 10}}}}};
  const auto dir = std::filesystem::temp_directory_path();
  auto slurp = [](const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::size_t mismatches = 0;
  std::size_t files = 0;
  for (const auto& j : configs) {
    const auto config = ExperimentConfig::from_json(j);
    std::string reference;
    int run = 0;
    for (std::size_t n : {std::size_t{1}, std::size_t{1}, std::size_t{2}, std::size_t{7}}) {
      const auto path = dir / ("adaptff_acceptance_" + to_string(config.mode) + std::to_string(run++) + ".csv");
      write_outputs(path.string(), config, run_experiment(config, n));
      const std::string bytes = slurp(path) + slurp(path.string() + ".meta.json");
      if (reference.empty()) {
        reference = bytes;
      } else {
        mismatches += bytes != reference;
      }
      ++files;
      std::filesystem::remove(path);
      std::filesystem::remove(path.string() + ".meta.json");
    }
  }
  return {mismatches == 0, fmt("%zu CSV + sidecar outputs over 3 modes and threads {1, 1, 2, 7}: %zu differ",
                               files, mismatches)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"parity conservation", parity_conservation},
      {"absorbing fixed point", absorbing_fixed_point},
      {"PC critical exponent", pc_exponents},
      {"feedback-rate transition", feedback_transition},
      {"quantum-classical agreement", quantum_classical_agreement},
      {"entanglement phases", entanglement_phases},
      {"scaling collapse and consistency", scaling_collapse},
      {"determinism", determinism},
  };
  std::set<int> only;
  for (int a = 1; a < argc; ++a) {
    only.insert(std::atoi(argv[a]));
  }
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && only.count(id) == 0) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[k].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %d %s: %s [%.0f s]\n", outcome.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(),
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    failures += !outcome.pass;
  }
  return failures == 0 ? 0 : 1;
}
