#include "adaptff/oracle_check.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "adaptff/fock_oracle.hpp"

namespace adaptff {

namespace {

using nlohmann::json;

const char* kind_name(ScriptOp::Kind kind) {
  switch (kind) {
    case ScriptOp::Kind::gate:
      return "gate";
    case ScriptOp::Kind::swap:
      return "swap";
    case ScriptOp::Kind::measure:
      return "measure";
  }
  return "";
}

std::size_t random_other(std::size_t n, std::size_t i, Rng& rng) {
  auto j = static_cast<std::size_t>(rng.below(n - 1));
  return j >= i ? j + 1 : j;
}

void default_swap(GaussianState& state, std::size_t i, std::size_t j) {
  state.apply_mode_swap(i, j);
}

ScriptDeviation compare(const GaussianState& gs, const FockVector& fock) {
  ScriptDeviation d;
  d.covariance = (gs.covariance().matrix - fock.covariance().matrix).cwiseAbs().maxCoeff();
  for (std::size_t k = 1; k < gs.num_sites(); ++k) {
    const SiteInterval region{0, k};
    d.entropy = std::max(d.entropy,
                         std::abs(renyi_entropy(gs, region, 2) - fock.renyi_entropy(region, 2)));
  }
  return d;
}

void accumulate(ScriptDeviation& into, const ScriptDeviation& d) {
  into.covariance = std::max(into.covariance, d.covariance);
  into.entropy = std::max(into.entropy, d.entropy);
  into.born = std::max(into.born, d.born);
}

}  // namespace

json OracleScript::to_json() const {
  json ops_json = json::array();
  for (const ScriptOp& op : ops) {
    json o{{"op", kind_name(op.kind)}, {"i", op.i}};
    switch (op.kind) {
      case ScriptOp::Kind::gate:
        o["gate"] = op.gate == GateKind::hopping ? "hopping" : "pairing";
        o["j"] = op.j;
        o["angle"] = op.angle;
        break;
      case ScriptOp::Kind::swap:
        o["j"] = op.j;
        break;
      case ScriptOp::Kind::measure:
        o["outcome"] = op.outcome ? 1 : 0;
        break;
    }
    ops_json.push_back(std::move(o));
  }
  std::string bits;
  for (auto b : initial) {
    bits.push_back(b ? '1' : '0');
  }
  return json{{"initial", bits}, {"ops", ops_json}};
}

OracleScript OracleScript::from_json(const json& j) {
  OracleScript script;
  for (char c : j.at("initial").get<std::string>()) {
    if (c != '0' && c != '1') {
      throw std::invalid_argument("oracle script: initial state must be a 0/1 string");
    }
    script.initial.push_back(c == '1' ? 1 : 0);
  }
  for (const json& o : j.at("ops")) {
    ScriptOp op;
    const auto name = o.at("op").get<std::string>();
    op.i = o.at("i").get<std::size_t>();
    if (name == "gate") {
      op.kind = ScriptOp::Kind::gate;
      const auto gate = o.at("gate").get<std::string>();
      if (gate != "hopping" && gate != "pairing") {
        throw std::invalid_argument("oracle script: unknown gate '" + gate + "'");
      }
      op.gate = gate == "hopping" ? GateKind::hopping : GateKind::pairing;
      op.j = o.at("j").get<std::size_t>();
      op.angle = o.at("angle").get<double>();
    } else if (name == "swap") {
      op.kind = ScriptOp::Kind::swap;
      op.j = o.at("j").get<std::size_t>();
    } else if (name == "measure") {
      op.kind = ScriptOp::Kind::measure;
      op.outcome = o.at("outcome").get<int>() != 0;
    } else {
      throw std::invalid_argument("oracle script: unknown op '" + name + "'");
    }
    script.ops.push_back(op);
  }
  return script;
}

ScriptDeviation replay_script(const OracleScript& script, const SwapImpl& swap,
                              MeasurementUpdate update) {
  const std::size_t n = script.initial.size();
  GaussianState gs = GaussianState::product_state(script.initial);
  FockVector fock = FockVector::product_state(script.initial);
  ScriptDeviation worst = compare(gs, fock);
  for (const ScriptOp& op : script.ops) {
    if (op.i >= n || (op.kind != ScriptOp::Kind::measure && (op.j >= n || op.j == op.i))) {
      throw std::invalid_argument("oracle script: site index out of range");
    }
    ScriptDeviation d;
    switch (op.kind) {
      case ScriptOp::Kind::gate:
        gs.apply_unitary(build_gate_kernel(n, op.gate, op.i, op.j, op.angle));
        fock.apply_gate(op.gate, op.i, op.j, op.angle);
        break;
      case ScriptOp::Kind::swap:
        (swap ? swap : SwapImpl(default_swap))(gs, op.i, op.j);
        fock.apply_mode_swap(op.i, op.j);
        break;
      case ScriptOp::Kind::measure:
        d.born = std::abs(gs.occupation(op.i) - fock.probability_one(op.i));
        gs.measure_forced(op.i, op.outcome, update);
        fock.measure_forced(op.i, op.outcome);
        break;
    }
    const ScriptDeviation after = compare(gs, fock);
    d.covariance = after.covariance;
    d.entropy = after.entropy;
    accumulate(worst, d);
  }
  return worst;
}

OracleScript random_script(std::size_t num_sites, std::size_t depth, Rng& rng) {
  if (num_sites < 2) {
    throw std::invalid_argument("random_script: need at least two sites");
  }
  OracleScript script;
  script.initial.resize(num_sites);
  for (auto& b : script.initial) {
    b = rng.bernoulli(0.5) ? 1 : 0;
  }
  // The oracle is advanced alongside so that forced outcomes stay possible.
  FockVector fock = FockVector::product_state(script.initial);
  for (std::size_t k = 0; k < depth; ++k) {
    ScriptOp op;
    op.kind = static_cast<ScriptOp::Kind>(rng.below(3));
    op.i = static_cast<std::size_t>(rng.below(num_sites));
    switch (op.kind) {
      case ScriptOp::Kind::gate:
        op.gate = rng.bernoulli(0.5) ? GateKind::hopping : GateKind::pairing;
        op.j = random_other(num_sites, op.i, rng);
        op.angle = 2.0 * std::numbers::pi * rng.uniform();
        fock.apply_gate(op.gate, op.i, op.j, op.angle);
        break;
      case ScriptOp::Kind::swap:
        op.j = random_other(num_sites, op.i, rng);
        fock.apply_mode_swap(op.i, op.j);
        break;
      case ScriptOp::Kind::measure: {
        const double p1 = std::clamp(fock.probability_one(op.i), 0.0, 1.0);
        op.outcome = rng.uniform() < p1;
        if ((op.outcome ? p1 : 1.0 - p1) < 1e-6) {
          op.outcome = !op.outcome;
        }
        fock.measure_forced(op.i, op.outcome);
        break;
      }
    }
    script.ops.push_back(op);
  }
  return script;
}

json OracleCheckReport::to_json() const {
  json j{{"scripts", scripts},
         {"max_covariance_deviation", max.covariance},
         {"max_entropy_deviation", max.entropy},
         {"max_born_deviation", max.born},
         {"passed", passed()}};
  if (failing) {
    j["failing_script"] = failing->to_json();
  }
  return j;
}

OracleCheckReport oracle_check(const OracleCheckOptions& options) {
  for (std::size_t n : options.sizes) {
    if (n < 2 || n > FockVector::kMaxSites) {
      throw std::invalid_argument("oracle_check: sizes must lie in [2, " +
                                  std::to_string(FockVector::kMaxSites) + "]");
    }
  }
  OracleCheckReport report;
  for (std::size_t n : options.sizes) {
    for (std::size_t k = 0; k < options.trials; ++k) {
      Rng rng(options.seed, (static_cast<std::uint64_t>(n) << 32) + k);
      const OracleScript script = random_script(n, options.depth, rng);
      const ScriptDeviation d = replay_script(script, options.swap, options.update);
      accumulate(report.max, d);
      ++report.scripts;
      const bool breach = !(d.covariance <= options.covariance_tol) ||
                          !(d.entropy <= options.entropy_tol) || !(d.born <= options.born_tol);
      if (breach && !report.failing) {
        report.failing = script;
      }
    }
  }
  return report;
}

}  // namespace adaptff
