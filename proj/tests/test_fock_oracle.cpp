#include "doctest.h"

#include <cmath>
#include <numbers>

#include "adaptff/fock_oracle.hpp"
#include "test_support.hpp"

using namespace adaptff;
using adaptff::testing::bits_from_string;
using adaptff::testing::max_abs_diff;
using adaptff::testing::scramble;

namespace {

constexpr double kQuarterTurn = std::numbers::pi / 4.0;

std::size_t basis_index(const char* bits) {
  std::size_t index = 0;
  for (std::size_t k = 0; bits[k]; ++k) {
    if (bits[k] == '1') {
      index |= std::size_t{1} << k;
    }
  }
  return index;
}

}  // namespace

TEST_CASE("oracle gates") {
  auto hop = FockVector::product_state(bits_from_string("10"));
  hop.apply_gate(GateKind::hopping, 0, 1, kQuarterTurn);
  CHECK(std::norm(hop.amplitudes()(basis_index("10"))) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::norm(hop.amplitudes()(basis_index("01"))) == doctest::Approx(0.5).epsilon(1e-14));

  auto inert = FockVector::product_state(bits_from_string("10"));
  inert.apply_gate(GateKind::pairing, 0, 1, 1.1);
  CHECK(std::abs(inert.amplitudes()(basis_index("10")) - Complex(1.0)) < 1e-14);

  Rng rng(1);
  auto fock = FockVector::product_state(bits_from_string("110100"));
  GaussianState gs = GaussianState::product_state(bits_from_string("110100"));
  scramble(gs, &fock, 25, rng);
  CHECK(fock.norm() == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(FockVector::product_state(Bits(13, 0)), std::invalid_argument);
  CHECK_THROWS_AS(hop.apply_gate(GateKind::hopping, 1, 1, 0.1), std::invalid_argument);
}

TEST_CASE("oracle measurement") {
  auto definite = FockVector::product_state(bits_from_string("10"));
  const auto m = definite.measure(0, 0.99);
  CHECK(m.outcome);
  CHECK(m.probability_one == doctest::Approx(1.0));

  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(4);
  amps(basis_index("00")) = 1.0;
  amps(basis_index("11")) = Complex(0.0, 1.0);
  auto bell = FockVector::from_amplitudes(amps);
  CHECK(bell.probability_one(0) == doctest::Approx(0.5).epsilon(1e-14));
  auto collapsed = bell;
  const auto outcome = collapsed.measure(0, 0.9);
  CHECK_FALSE(outcome.outcome);
  CHECK(collapsed.probability_one(0) == 0.0);
  CHECK(collapsed.probability_one(1) == 0.0);
}

TEST_CASE("oracle covariance and entropy") {
  const auto neel = FockVector::product_state(bits_from_string("1010")).covariance();
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(neel.occupation(i) == doctest::Approx(i % 2 == 0 ? 1.0 : 0.0));
  }
  CHECK(std::abs(FockVector::product_state(bits_from_string("1010")).renyi_entropy({1, 2}, 2)) <
        1e-14);

  auto bell = FockVector::product_state(bits_from_string("00"));
  bell.apply_gate(GateKind::pairing, 0, 1, kQuarterTurn);
  const auto cov = bell.covariance();
  // <c_1 c_2> sits in the upper-right block at (0, 1).
  CHECK(std::abs(cov.matrix(0, 3)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(bell.renyi_entropy({0, 1}, 2) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  Rng rng(8);
  auto fock = FockVector::product_state(bits_from_string("1001101"));
  auto gs = GaussianState::product_state(bits_from_string("1001101"));
  scramble(gs, &fock, 30, rng);
  const ComplexMatrix c = fock.covariance().matrix;
  CHECK(max_abs_diff(c * c, c) < 1e-10);
  for (std::size_t len = 1; len < 7; ++len) {
    CHECK(std::abs(fock.renyi_entropy({0, len}, 2) - fock.renyi_entropy({len, 7 - len}, 2)) <
          1e-10);
  }
  // Wrapping region goes through its complement.
  CHECK(std::abs(fock.renyi_entropy({5, 3}, 2) - fock.renyi_entropy({1, 4}, 2)) < 1e-12);
  CHECK_THROWS_AS(fock.renyi_entropy({0, 7}, 2), std::invalid_argument);
}

TEST_CASE("oracle and Gaussian simulator agree") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    auto fock = FockVector::product_state(bits_from_string("011010"));
    auto gs = GaussianState::product_state(bits_from_string("011010"));
    scramble(gs, &fock, 8, rng);
    CHECK(max_abs_diff(gs.covariance().matrix, fock.covariance().matrix) < 1e-8);
    for (std::size_t len = 1; len < 6; ++len) {
      CHECK(std::abs(renyi_entropy(gs, {0, len}, 2) - fock.renyi_entropy({0, len}, 2)) < 1e-8);
      CHECK(std::abs(renyi_entropy(gs, {2, len}, 3) - fock.renyi_entropy({2, len}, 3)) < 1e-8);
    }

    const auto site = static_cast<std::size_t>(rng.below(6));
    const double p_oracle = fock.probability_one(site);
    CHECK(std::abs(gs.occupation(site) - p_oracle) < 1e-10);
    const bool outcome = p_oracle > 0.5;
    for (auto update : {MeasurementUpdate::pivot_gram_schmidt, MeasurementUpdate::householder}) {
      auto copy = gs;
      copy.measure_forced(site, outcome, update);
      auto fock_copy = fock;
      fock_copy.measure_forced(site, outcome);
      CHECK(max_abs_diff(copy.covariance().matrix, fock_copy.covariance().matrix) < 1e-8);
    }

    gs.apply_mode_swap(1, 4);
    fock.apply_mode_swap(1, 4);
    CHECK(max_abs_diff(gs.covariance().matrix, fock.covariance().matrix) < 1e-8);
  }
}

TEST_CASE("Born frequencies match the oracle") {
  Rng rng(77);
  auto fock = FockVector::product_state(bits_from_string("100110"));
  auto gs = GaussianState::product_state(bits_from_string("100110"));
  scramble(gs, &fock, 20, rng);
  const double p = fock.probability_one(3);
  const int draws = 10000;
  int ones = 0;
  for (int k = 0; k < draws; ++k) {
    auto copy = gs;
    ones += copy.measure(3, rng.uniform(), MeasurementUpdate::householder).outcome ? 1 : 0;
  }
  const double sigma = std::sqrt(p * (1.0 - p) / draws);
  CHECK(std::abs(ones / static_cast<double>(draws) - p) < 3.0 * sigma);
}

TEST_CASE("parity is conserved along oracle trajectories") {
  Rng rng(5);
  auto fock = FockVector::product_state(bits_from_string("11010000"));
  const double initial = fock.parity();
  CHECK(initial == doctest::Approx(-1.0));
  for (int step = 0; step < 40; ++step) {
    const auto i = static_cast<std::size_t>(rng.below(8));
    const auto j = (i + 1) % 8;
    fock.apply_gate(rng.bernoulli(0.5) ? GateKind::hopping : GateKind::pairing, i, j,
                    kQuarterTurn);
    fock.measure(static_cast<std::size_t>(rng.below(8)), rng.uniform());
    if (step % 5 == 0) {
      fock.apply_mode_swap(i, j);
    }
    CHECK(fock.parity() == doctest::Approx(initial).epsilon(1e-12));
  }
}
