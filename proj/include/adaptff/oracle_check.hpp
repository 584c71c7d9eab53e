#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adaptff/gaussian_state.hpp"

namespace adaptff {

/// One operation of a differential test script.
struct ScriptOp {
  enum class Kind { gate, swap, measure };
  Kind kind = Kind::gate;
  GateKind gate = GateKind::hopping;
  std::size_t i = 0;
  std::size_t j = 0;      // unused for measure
  double angle = 0.0;     // gate only
  bool outcome = false;   // measure only; forced on both simulators
};

struct OracleScript {
  Bits initial;
  std::vector<ScriptOp> ops;

  nlohmann::json to_json() const;
  static OracleScript from_json(const nlohmann::json& j);
};

/// Swap used on the Gaussian side; replaceable so tests can inject a faulty one.
using SwapImpl = std::function<void(GaussianState&, std::size_t, std::size_t)>;

struct ScriptDeviation {
  double covariance = 0.0;  // max |C_gauss - C_fock| over all entries
  double entropy = 0.0;     // max |S2 difference| over regions [0, k)
  double born = 0.0;        // max |P(n=1) difference| before each measurement
};

/// Replays the script on both simulators and compares after every operation.
/// Measurement outcomes in the script are forced.
ScriptDeviation replay_script(const OracleScript& script, const SwapImpl& swap = {},
                              MeasurementUpdate update = MeasurementUpdate::householder);

/// Random script: product initial state, then `depth` operations drawn
/// uniformly among gates (random kind, pair and angle), mode swaps and
/// measurements. Measurement outcomes are Born-sampled on the oracle, taking
/// the other branch when the sampled one has probability below 1e-6.
OracleScript random_script(std::size_t num_sites, std::size_t depth, Rng& rng);

struct OracleCheckOptions {
  std::size_t depth = 10;
  std::vector<std::size_t> sizes{2, 4, 6, 8};
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  double covariance_tol = 1e-8;
  double entropy_tol = 1e-8;
  double born_tol = 1e-10;
  SwapImpl swap;
  MeasurementUpdate update = MeasurementUpdate::householder;
};

struct OracleCheckReport {
  std::size_t scripts = 0;
  ScriptDeviation max;
  std::optional<OracleScript> failing;  // first script over a threshold
  bool passed() const { return !failing.has_value(); }
  nlohmann::json to_json() const;
};

/// Script k for size L is drawn from Rng(seed, L * 2^32 + k). Sizes above
/// FockVector::kMaxSites are rejected.
OracleCheckReport oracle_check(const OracleCheckOptions& options);

}  // namespace adaptff
