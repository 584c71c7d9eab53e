#include "adaptff/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace adaptff {

namespace {

using nlohmann::json;

const std::set<std::string> kCommonKeys{"mode", "L", "t_max", "seed", "trajectories", "probes", "output"};
const std::set<std::string> kQuantumKeys{"p", "r", "initial_state", "entropy_cuts", "renyi_index"};
const std::set<std::string> kClassicalKeys{"p", "r", "initial_state", "noise"};
const std::set<std::string> kBarwKeys{"q", "branching"};

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  throw std::invalid_argument("config key '" + key + "': " + what);
}

std::uint64_t get_unsigned(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    config_error(key, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

double get_real(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number()) {
    config_error(key, "expected a number");
  }
  return v.get<double>();
}

std::string get_string(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_string()) {
    config_error(key, "expected a string");
  }
  return v.get<std::string>();
}

ProbeSchedule parse_probes(const json& j) {
  if (!j.is_object()) {
    config_error("probes", "expected an object");
  }
  ProbeSchedule probes;
  const std::string kind = j.contains("kind") ? get_string(j, "kind") : "linear";
  const std::string other = kind == "linear" ? "per_decade" : "interval";
  for (const auto& [key, value] : j.items()) {
    if (key != "kind" && key != "interval" && key != "per_decade") {
      config_error("probes." + key, "unknown key");
    }
    if (key == other) {
      config_error("probes." + key, "not valid for kind '" + kind + "'");
    }
  }
  if (kind == "linear") {
    probes.kind = ProbeSchedule::Kind::linear;
    if (j.contains("interval")) {
      probes.interval = static_cast<std::int64_t>(get_unsigned(j, "interval"));
    }
  } else if (kind == "log") {
    probes.kind = ProbeSchedule::Kind::log;
    if (j.contains("per_decade")) {
      probes.per_decade = static_cast<int>(get_unsigned(j, "per_decade"));
    }
  } else {
    config_error("probes.kind", "expected 'linear' or 'log', got '" + kind + "'");
  }
  return probes;
}

json probes_json(const ProbeSchedule& probes) {
  if (probes.kind == ProbeSchedule::Kind::linear) {
    return json{{"kind", "linear"}, {"interval", probes.interval}};
  }
  return json{{"kind", "log"}, {"per_decade", probes.per_decade}};
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') {
      out += '"';
    }
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) {
    out.push_back(field);
  }
  if (!line.empty() && line.back() == sep) {
    out.emplace_back();
  }
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw std::invalid_argument(where + ": not a number: '" + s + "'");
  }
  return v;
}

}  // namespace

std::string to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::quantum:
      return "quantum";
    case ExperimentMode::classical:
      return "classical";
    case ExperimentMode::barw:
      return "barw";
  }
  return "";
}

ExperimentMode parse_mode(const std::string& text) {
  if (text == "quantum") {
    return ExperimentMode::quantum;
  }
  if (text == "classical") {
    return ExperimentMode::classical;
  }
  if (text == "barw") {
    return ExperimentMode::barw;
  }
  config_error("mode", "expected quantum, classical or barw, got '" + text + "'");
}

std::uint64_t ExperimentConfig::seed() const {
  return mode == ExperimentMode::barw ? barw.seed : circuit.seed;
}

void ExperimentConfig::set_seed(std::uint64_t seed) {
  circuit.seed = seed;
  barw.seed = seed;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("config: expected a JSON object");
  }
  if (!j.contains("mode")) {
    config_error("mode", "missing");
  }
  ExperimentConfig c;
  c.mode = parse_mode(get_string(j, "mode"));
  const auto& extra = c.mode == ExperimentMode::quantum     ? kQuantumKeys
                      : c.mode == ExperimentMode::classical ? kClassicalKeys
                                                            : kBarwKeys;
  for (const auto& [key, value] : j.items()) {
    if (kCommonKeys.count(key) == 0 && extra.count(key) == 0) {
      const bool known = kQuantumKeys.count(key) || kClassicalKeys.count(key) || kBarwKeys.count(key);
      config_error(key, known ? "not valid in mode '" + to_string(c.mode) + "'" : "unknown key");
    }
  }

  ProbeSchedule probes;
  if (j.contains("probes")) {
    probes = parse_probes(j.at("probes"));
  }
  if (j.contains("trajectories")) {
    c.trajectories = get_unsigned(j, "trajectories");
  }
  if (j.contains("output")) {
    c.output = get_string(j, "output");
  }
  if (c.mode == ExperimentMode::barw) {
    if (j.contains("L")) {
      c.barw.num_sites = get_unsigned(j, "L");
    }
    if (j.contains("t_max")) {
      c.barw.t_max = static_cast<std::int64_t>(get_unsigned(j, "t_max"));
    }
    if (j.contains("seed")) {
      c.barw.seed = get_unsigned(j, "seed");
    }
    if (j.contains("q")) {
      c.barw.q = get_real(j, "q");
    }
    if (j.contains("branching")) {
      c.barw.branching = get_real(j, "branching");
    }
    c.barw.probes = probes;
    c.circuit.seed = c.barw.seed;
  } else {
    if (j.contains("L")) {
      c.circuit.num_sites = get_unsigned(j, "L");
    }
    if (j.contains("t_max")) {
      c.circuit.t_max = static_cast<std::int64_t>(get_unsigned(j, "t_max"));
    }
    if (j.contains("seed")) {
      c.circuit.seed = get_unsigned(j, "seed");
    }
    if (j.contains("p")) {
      c.circuit.p = get_real(j, "p");
    }
    if (j.contains("r")) {
      c.circuit.r = get_real(j, "r");
    }
    if (j.contains("initial_state")) {
      c.circuit.initial_state = InitialState::parse(get_string(j, "initial_state"));
    }
    if (j.contains("noise")) {
      c.noise = get_real(j, "noise");
    }
    if (j.contains("entropy_cuts")) {
      const json& cuts = j.at("entropy_cuts");
      if (!cuts.is_array()) {
        config_error("entropy_cuts", "expected an array of fractions");
      }
      for (const json& f : cuts) {
        if (!f.is_number()) {
          config_error("entropy_cuts", "expected an array of fractions");
        }
        c.quantum_probes.entropy_fractions.push_back(f.get<double>());
      }
    }
    if (j.contains("renyi_index")) {
      c.quantum_probes.renyi_index = static_cast<int>(get_unsigned(j, "renyi_index"));
    }
    c.circuit.probes = probes;
    c.barw.seed = c.circuit.seed;
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file " + path);
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json j{{"mode", to_string(mode)}, {"trajectories", trajectories}, {"output", output}};
  if (mode == ExperimentMode::barw) {
    j["L"] = barw.num_sites;
    j["t_max"] = barw.t_max;
    j["seed"] = barw.seed;
    j["probes"] = probes_json(barw.probes);
    j["q"] = barw.q;
    j["branching"] = barw.branching;
    return j;
  }
  j["L"] = circuit.num_sites;
  j["t_max"] = circuit.t_max;
  j["seed"] = circuit.seed;
  j["probes"] = probes_json(circuit.probes);
  j["p"] = circuit.p;
  j["r"] = circuit.r;
  j["initial_state"] = circuit.initial_state.to_string();
  if (mode == ExperimentMode::quantum) {
    j["entropy_cuts"] = quantum_probes.entropy_fractions;
    j["renyi_index"] = quantum_probes.renyi_index;
  } else {
    j["noise"] = noise;
  }
  return j;
}

void ExperimentConfig::validate() const {
  if (trajectories < 1) {
    config_error("trajectories", "must be at least 1");
  }
  if (mode == ExperimentMode::barw) {
    barw.validate();
    barw.probes.times(barw.t_max);
    return;
  }
  circuit.validate();
  circuit.probes.times(circuit.t_max);
  if (mode == ExperimentMode::classical && !(noise >= 0.0 && noise <= 1.0)) {
    config_error("noise", "must lie in [0, 1]");
  }
  if (mode == ExperimentMode::quantum) {
    if (quantum_probes.renyi_index < 1) {
      config_error("renyi_index", "must be at least 1");
    }
    entropy_cut_sizes(circuit.num_sites, quantum_probes.entropy_fractions);
  }
}

std::vector<TimeSeries> run_parallel(std::size_t count, std::size_t threads,
                                     const std::function<TimeSeries(std::size_t)>& task) {
  std::vector<TimeSeries> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= count || failed.load()) {
        return;
      }
      try {
        results[k] = task(k);
      } catch (...) {
        errors[k] = std::current_exception();
        failed.store(true);
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, count));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back(worker);
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return results;
}

TimeSeries run_single(const ExperimentConfig& config, std::uint64_t trajectory) {
  try {
    switch (config.mode) {
      case ExperimentMode::quantum:
        return run_trajectory(config.circuit, config.quantum_probes, trajectory);
      case ExperimentMode::classical:
        return run_classical(config.circuit, config.noise, trajectory);
      case ExperimentMode::barw:
        return run_barw(config.barw, trajectory);
    }
  } catch (const TrajectoryError&) {
    throw;
  } catch (const std::exception& e) {
    throw TrajectoryError(trajectory, -1, e.what());
  }
  return {};
}

TimeSeries run_experiment(const ExperimentConfig& config, std::size_t threads) {
  config.validate();
  const auto runs = run_parallel(config.trajectories, threads,
                                 [&](std::size_t k) { return run_single(config, k); });
  return ensemble_average(runs);
}

void write_csv(std::ostream& out, const TimeSeries& series) {
  series.validate();
  out << 't';
  for (const auto& name : series.names) {
    out << ',' << name << "_mean," << name << "_stderr";
  }
  out << '\n';
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    out << series.times[k];
    for (std::size_t c = 0; c < series.names.size(); ++c) {
      out << ',' << format_double(series.values[c][k]) << ','
          << format_double(series.has_stderr() ? series.stderrs[c][k] : 0.0);
    }
    out << '\n';
  }
}

std::string csv_string(const TimeSeries& series) {
  std::ostringstream out;
  write_csv(out, series);
  return out.str();
}

TimeSeries read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument(path + ": empty file");
  }
  const auto header = split(line, ',');
  if (header.empty() || header[0] != "t" || header.size() % 2 != 1) {
    throw std::invalid_argument(path + ": header must be t followed by mean/stderr pairs");
  }
  TimeSeries series;
  for (std::size_t c = 1; c < header.size(); c += 2) {
    const std::string& m = header[c];
    const std::string& s = header[c + 1];
    const std::string base = m.size() > 5 ? m.substr(0, m.size() - 5) : "";
    if (base.empty() || m != base + "_mean" || s != base + "_stderr") {
      throw std::invalid_argument(path + ": bad column pair " + m + "," + s);
    }
    series.add_column(base);
  }
  series.stderrs.resize(series.names.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) {
      continue;
    }
    const auto fields = split(line, ',');
    const std::string where = path + ":" + std::to_string(row);
    if (fields.size() != header.size()) {
      throw std::invalid_argument(where + ": wrong number of fields");
    }
    series.times.push_back(static_cast<std::int64_t>(parse_number(fields[0], where)));
    for (std::size_t c = 0; c < series.names.size(); ++c) {
      series.values[c].push_back(parse_number(fields[1 + 2 * c], where));
      series.stderrs[c].push_back(parse_number(fields[2 + 2 * c], where));
    }
  }
  series.validate();
  return series;
}

json metadata_json(const ExperimentConfig& config) {
  return json{{"config", config.to_json()},
              {"master_seed", config.seed()},
              {"trajectories", config.trajectories},
              {"code_version", kCodeVersion}};
}

void write_outputs(const std::string& path, const ExperimentConfig& config,
                   const TimeSeries& series) {
  std::ofstream csv(path);
  if (!csv) {
    throw std::runtime_error("cannot write " + path);
  }
  write_csv(csv, series);
  std::ofstream meta(path + ".meta.json");
  if (!meta) {
    throw std::runtime_error("cannot write " + path + ".meta.json");
  }
  meta << metadata_json(config).dump(2) << '\n';
}

double steady_state(const TimeSeries& series, std::string_view column) {
  const auto& v = series.column(column);
  if (v.empty()) {
    throw std::invalid_argument("steady_state: empty series");
  }
  const std::size_t k = std::max<std::size_t>(1, v.size() / 4);
  double sum = 0.0;
  for (std::size_t i = v.size() - k; i < v.size(); ++i) {
    sum += v[i];
  }
  return sum / static_cast<double>(k);
}

std::vector<ProfilePoint> final_entropy_profile(const TimeSeries& series, std::size_t num_sites,
                                                int renyi_index) {
  const std::string prefix = "S" + std::to_string(renyi_index) + "_A";
  std::vector<ProfilePoint> profile;
  for (std::size_t c = 0; c < series.names.size(); ++c) {
    const auto& name = series.names[c];
    if (name.rfind(prefix, 0) != 0) {
      continue;
    }
    ProfilePoint point;
    point.cut = static_cast<std::size_t>(std::stoul(name.substr(prefix.size())));
    point.log_chord = log_chord_length(num_sites, point.cut);
    point.mean = series.values[c].back();
    point.error = series.has_stderr() ? series.stderrs[c].back() : 0.0;
    profile.push_back(point);
  }
  std::sort(profile.begin(), profile.end(),
            [](const ProfilePoint& a, const ProfilePoint& b) { return a.cut < b.cut; });
  return profile;
}

ChordFit fit_profile(const std::vector<ProfilePoint>& profile) {
  std::vector<EntropyPoint> points;
  for (const auto& p : profile) {
    points.push_back({p.cut, p.log_chord, p.mean});
  }
  return fit_log_chord(points);
}

SweepConfig SweepConfig::from_json(const json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("sweep config: expected a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "base" && key != "grid") {
      config_error(key, "unknown key (a sweep config holds only base and grid)");
    }
  }
  if (!j.contains("base") || !j.contains("grid")) {
    throw std::invalid_argument("sweep config: needs base and grid");
  }
  SweepConfig sweep;
  sweep.base = ExperimentConfig::from_json(j.at("base"));
  if (sweep.base.mode == ExperimentMode::barw) {
    config_error("base.mode", "a sweep runs quantum or classical models");
  }
  const json& grid = j.at("grid");
  if (!grid.is_array() || grid.empty()) {
    config_error("grid", "expected a nonempty array of [p, r] pairs");
  }
  for (const json& point : grid) {
    if (!point.is_array() || point.size() != 2 || !point[0].is_number() || !point[1].is_number()) {
      config_error("grid", "expected a nonempty array of [p, r] pairs");
    }
    sweep.grid.emplace_back(point[0].get<double>(), point[1].get<double>());
  }
  return sweep;
}

SweepConfig SweepConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file " + path);
  }
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("sweep config " + path + ": " + e.what());
  }
}

std::vector<SweepRow> run_sweep(const SweepConfig& sweep, std::size_t threads) {
  std::vector<SweepRow> rows;
  for (const auto& [p, r] : sweep.grid) {
    SweepRow row;
    row.p = p;
    row.r = r;
    try {
      ExperimentConfig config = sweep.base;
      config.circuit.p = p;
      config.circuit.r = r;
      const TimeSeries series = run_experiment(config, threads);
      row.rho_active = steady_state(series, "rho_active");
      row.delta = steady_state(series, "delta");
      if (config.mode == ExperimentMode::quantum && config.quantum_probes.entropy_fractions.size() >= 5) {
        row.chord = fit_profile(final_entropy_profile(series, config.circuit.num_sites,
                                                      config.quantum_probes.renyi_index));
      }
    } catch (const std::exception& e) {
      row.rho_active = row.delta = std::numeric_limits<double>::quiet_NaN();
      row.chord.reset();
      row.status = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "p,r,rho_active,delta,alpha,alpha_r2,status\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : rows) {
    out << format_double(row.p) << ',' << format_double(row.r) << ','
        << format_double(row.rho_active) << ',' << format_double(row.delta) << ','
        << format_double(row.chord ? row.chord->alpha : nan) << ','
        << format_double(row.chord ? row.chord->r_squared : nan) << ',' << csv_quote(row.status)
        << '\n';
  }
}

std::vector<CollapseEntry> collapse_table(const std::vector<Curve>& family, CollapseMode mode,
                                          double p_c, const ScalingExponents& reference) {
  reference.validate();
  std::vector<CollapseEntry> table;
  auto add = [&](std::string label, const ScalingExponents& e) {
    table.push_back({std::move(label), e, collapse_score(collapse_transform(family, mode, p_c, e))});
  };
  add("reference", reference);
  for (double f : {0.8, 1.2}) {
    const std::string tag = f < 1.0 ? "x0.8" : "x1.2";
    if (mode == CollapseMode::critical_L) {
      add("theta " + tag, ScalingExponents::from_theta_z(reference.theta() * f, reference.z()));
      add("z " + tag, ScalingExponents::from_theta_z(reference.theta(), reference.z() * f));
    } else {
      add("beta " + tag, ScalingExponents{reference.beta * f, reference.nu_par, reference.nu_perp});
      add("nu_par " + tag, ScalingExponents{reference.beta, reference.nu_par * f, reference.nu_perp});
    }
  }
  return table;
}

}  // namespace adaptff
