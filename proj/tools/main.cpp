// adaptff: command-line driver for the adaptive free-fermion circuit, its
// classical twin and the BARW reference process.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "adaptff/experiment.hpp"
#include "adaptff/oracle_check.hpp"

using namespace adaptff;

namespace {

struct RunFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trajectories;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
};

void add_run_flags(CLI::App* cmd, RunFlags& flags, bool config_required = true) {
  auto* c = cmd->add_option("--config", flags.config, "JSON config file");
  if (config_required) {
    c->required()->check(CLI::ExistingFile);
  }
  cmd->add_option("--out", flags.out, "output path (overrides the config's output)");
  cmd->add_option("--seed", flags.seed, "master seed (overrides the config)");
  cmd->add_option("--trajectories", flags.trajectories, "ensemble size (overrides the config)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
}

void apply_overrides(ExperimentConfig& config, const RunFlags& flags) {
  if (!flags.out.empty()) {
    config.output = flags.out;
  }
  if (flags.seed) {
    config.set_seed(*flags.seed);
  }
  if (flags.trajectories) {
    config.trajectories = *flags.trajectories;
  }
  config.validate();
}

int run_mode(ExperimentMode mode, const RunFlags& flags) {
  ExperimentConfig config = ExperimentConfig::load(flags.config);
  if (config.mode != mode) {
    std::cerr << "error: config mode is '" << to_string(config.mode) << "', subcommand is '"
              << to_string(mode) << "'\n";
    return 2;
  }
  apply_overrides(config, flags);
  const TimeSeries series = run_experiment(config, flags.threads);
  if (config.output.empty()) {
    write_csv(std::cout, series);
  } else {
    write_outputs(config.output, config, series);
    std::cerr << "wrote " << config.output << " and " << config.output << ".meta.json\n";
  }
  return 0;
}

int run_sweep_cmd(const RunFlags& flags) {
  SweepConfig sweep = SweepConfig::load(flags.config);
  apply_overrides(sweep.base, flags);
  const auto rows = run_sweep(sweep, flags.threads);
  if (sweep.base.output.empty()) {
    write_sweep_csv(std::cout, rows);
  } else {
    std::ofstream out(sweep.base.output);
    write_sweep_csv(out, rows);
    std::ofstream meta(sweep.base.output + ".meta.json");
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& [p, r] : sweep.grid) {
      grid.push_back({p, r});
    }
    auto j = metadata_json(sweep.base);
    j["grid"] = grid;
    meta << j.dump(2) << '\n';
  }
  int failures = 0;
  for (const auto& row : rows) {
    failures += row.status != "ok";
  }
  if (failures > 0) {
    std::cerr << failures << " grid point(s) failed; see the status column\n";
  }
  return failures > 0 ? 1 : 0;
}

int run_entropy_profile(const RunFlags& flags) {
  ExperimentConfig config = ExperimentConfig::load(flags.config);
  if (config.mode != ExperimentMode::quantum) {
    std::cerr << "error: entropy-profile needs a quantum config\n";
    return 2;
  }
  apply_overrides(config, flags);
  const TimeSeries series = run_experiment(config, flags.threads);
  const auto profile =
      final_entropy_profile(series, config.circuit.num_sites, config.quantum_probes.renyi_index);
  std::ofstream file;
  if (!config.output.empty()) {
    file.open(config.output);
  }
  std::ostream& out = config.output.empty() ? std::cout : file;
  out << "cut,log_chord,S_mean,S_stderr\n";
  char buf[128];
  for (const auto& p : profile) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", p.cut, p.log_chord, p.mean, p.error);
    out << buf;
  }
  if (profile.size() >= 5) {
    const ChordFit fit = fit_profile(profile);
    std::fprintf(stderr, "chord fit at t = %lld: alpha = %.6g, intercept = %.6g, R^2 = %.6g\n",
                 static_cast<long long>(series.times.back()), fit.alpha, fit.intercept, fit.r_squared);
    if (!config.output.empty()) {
      auto j = metadata_json(config);
      j["chord_fit"] = {{"alpha", fit.alpha}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}};
      std::ofstream(config.output + ".meta.json") << j.dump(2) << '\n';
    }
  } else {
    std::cerr << "fewer than 5 cuts: no chord fit\n";
  }
  return 0;
}

struct CollapseFlags {
  std::vector<std::string> inputs;
  std::string mode = "critical_L";
  std::string column = "rho_active";
  double t_min = 100.0;
  double t_max = 1e300;
  double max_rel_stderr = 0.0;
  double p_c = 0.605;
  double theta = PcReference::theta;
  double z = PcReference::z;
  double beta = 0.0;
  double nu_par = 0.0;
};

int run_collapse(const CollapseFlags& flags) {
  const bool critical = flags.mode == "critical_L";
  std::vector<Curve> family;
  for (const auto& input : flags.inputs) {
    const auto eq = input.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --input expects KEY=PATH, got '" << input << "'\n";
      return 2;
    }
    const double key = std::stod(input.substr(0, eq));
    family.push_back(curve_from_series(read_csv(input.substr(eq + 1)), flags.column, key,
                                       flags.t_min, flags.t_max, flags.max_rel_stderr));
  }
  ScalingExponents reference;
  if (critical) {
    reference = ScalingExponents::from_theta_z(flags.theta, flags.z);
  } else {
    reference = ScalingExponents{flags.beta, flags.nu_par, flags.nu_par / flags.z};
  }
  const auto table = collapse_table(
      family, critical ? CollapseMode::critical_L : CollapseMode::off_critical_p, flags.p_c, reference);
  std::printf("label,beta,nu_par,theta,z,score\n");
  for (const auto& e : table) {
    std::printf("%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.label.c_str(), e.exponents.beta,
                e.exponents.nu_par, e.exponents.theta(), e.exponents.z(), e.score);
  }
  bool best = true;
  for (std::size_t k = 1; k < table.size(); ++k) {
    best = best && table[0].score < table[k].score;
  }
  std::fprintf(stderr, "reference exponents %s every perturbation\n", best ? "beat" : "do not beat");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive free-fermion circuit simulator"};
  app.require_subcommand(1);

  RunFlags quantum_flags, classical_flags, barw_flags, sweep_flags, profile_flags;
  auto* quantum = app.add_subcommand("quantum", "ensemble of Gaussian-state trajectories");
  add_run_flags(quantum, quantum_flags);
  auto* classical = app.add_subcommand("classical", "ensemble of classical-twin trajectories");
  add_run_flags(classical, classical_flags);
  auto* barw = app.add_subcommand("barw", "branching-annihilating random walk ensemble");
  add_run_flags(barw, barw_flags);
  auto* sweep = app.add_subcommand("sweep", "steady-state table over a (p, r) grid");
  add_run_flags(sweep, sweep_flags);
  auto* profile = app.add_subcommand("entropy-profile", "final-time entropy against chord length");
  add_run_flags(profile, profile_flags);

  CollapseFlags collapse_flags;
  auto* collapse = app.add_subcommand("collapse", "collapse score of a family of CSV curves");
  collapse->add_option("--input", collapse_flags.inputs, "KEY=PATH, key is L or p")->required();
  collapse->add_option("--mode", collapse_flags.mode)
      ->check(CLI::IsMember({"critical_L", "off_critical_p"}));
  collapse->add_option("--column", collapse_flags.column);
  collapse->add_option("--t-min", collapse_flags.t_min);
  collapse->add_option("--t-max", collapse_flags.t_max);
  collapse->add_option("--max-rel-stderr", collapse_flags.max_rel_stderr,
                       "end each curve before the first probe with stderr / mean above this (0: off)");
  collapse->add_option("--p-c", collapse_flags.p_c);
  collapse->add_option("--theta", collapse_flags.theta);
  collapse->add_option("--z", collapse_flags.z);
  collapse->add_option("--beta", collapse_flags.beta, "off_critical_p only");
  collapse->add_option("--nu-par", collapse_flags.nu_par, "off_critical_p only");

  OracleCheckOptions oracle_options;
  std::string oracle_out;
  auto* oracle = app.add_subcommand("oracle-check", "Gaussian simulator against exact diagonalization");
  oracle->add_option("--depth", oracle_options.depth);
  oracle->add_option("--sizes", oracle_options.sizes);
  oracle->add_option("--trials", oracle_options.trials);
  oracle->add_option("--seed", oracle_options.seed);
  oracle->add_option("--out", oracle_out, "write the JSON report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*quantum) {
      return run_mode(ExperimentMode::quantum, quantum_flags);
    }
    if (*classical) {
      return run_mode(ExperimentMode::classical, classical_flags);
    }
    if (*barw) {
      return run_mode(ExperimentMode::barw, barw_flags);
    }
    if (*sweep) {
      return run_sweep_cmd(sweep_flags);
    }
    if (*profile) {
      return run_entropy_profile(profile_flags);
    }
    if (*collapse) {
      return run_collapse(collapse_flags);
    }
    if (*oracle) {
      const OracleCheckReport report = oracle_check(oracle_options);
      const std::string text = report.to_json().dump(2);
      if (oracle_out.empty()) {
        std::cout << text << '\n';
      } else {
        std::ofstream(oracle_out) << text << '\n';
      }
      std::fprintf(stderr, "%zu scripts: covariance %.3g, entropy %.3g, Born %.3g -> %s\n",
                   report.scripts, report.max.covariance, report.max.entropy, report.max.born,
                   report.passed() ? "PASS" : "FAIL");
      return report.passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
