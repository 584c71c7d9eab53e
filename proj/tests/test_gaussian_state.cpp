#include "doctest.h"

#include <cmath>
#include <numbers>

#include "adaptff/gaussian_state.hpp"
#include "test_support.hpp"

using namespace adaptff;
using adaptff::testing::bits_from_string;
using adaptff::testing::max_abs_diff;
using adaptff::testing::random_gaussian_state;

namespace {

constexpr double kQuarterTurn = std::numbers::pi / 4.0;

GaussianState bell_pair() {
  GaussianState gs = GaussianState::product_state(bits_from_string("00"));
  gs.apply_unitary(build_gate_kernel(2, GateKind::pairing, 0, 1, kQuarterTurn));
  return gs;
}

ComplexMatrix occupation_block(const CovarianceMatrix& cov) {
  const auto n = static_cast<Eigen::Index>(cov.num_sites());
  return cov.matrix.bottomRightCorner(n, n);
}

}  // namespace

TEST_CASE("product states encode occupations") {
  auto two = GaussianState::product_state(bits_from_string("10"));
  CHECK(two.occupation(0) == doctest::Approx(1.0));
  CHECK(two.occupation(1) == doctest::Approx(0.0));

  auto vacuum = GaussianState::product_state(bits_from_string("0000"));
  CHECK(occupation_block(vacuum.covariance()).cwiseAbs().maxCoeff() == 0.0);

  auto neel = GaussianState::product_state(bits_from_string("1010")).covariance();
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(neel.occupation(i) == doctest::Approx(i % 2 == 0 ? 1.0 : 0.0));
  }

  CHECK_THROWS_AS(GaussianState::product_state(Bits{1}), std::invalid_argument);
}

TEST_CASE("covariance is a rank-L projector") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    auto gs = random_gaussian_state(6, rng);
    const ComplexMatrix c = gs.covariance().matrix;
    CHECK(c.trace().real() == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(max_abs_diff(c, c.adjoint()) < 1e-12);
    CHECK(max_abs_diff(c * c, c) < 1e-10);
    // <c c^dag> block is 1 - <c^dag c>^T.
    const ComplexMatrix top = c.topLeftCorner(6, 6);
    const ComplexMatrix bottom = c.bottomRightCorner(6, 6);
    CHECK(max_abs_diff(top, ComplexMatrix::Identity(6, 6) - bottom.transpose()) < 1e-10);
  }
}

TEST_CASE("gate kernels") {
  SUBCASE("validation") {
    CHECK_THROWS_AS(build_gate_kernel(4, GateKind::hopping, 1, 1, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(build_gate_kernel(4, GateKind::pairing, 0, 4, 0.3), std::invalid_argument);
    for (GateKind kind : {GateKind::hopping, GateKind::pairing}) {
      const auto k = build_gate_kernel(5, kind, 3, 1, 0.7);
      CHECK(k.is_valid());
      const ComplexMatrix h = k.dense();
      const ComplexMatrix a = h.topLeftCorner(5, 5);
      const ComplexMatrix b = h.topRightCorner(5, 5);
      CHECK(max_abs_diff(h, h.adjoint()) < 1e-12);
      CHECK(max_abs_diff(a, a.adjoint()) < 1e-12);
      CHECK(max_abs_diff(b.transpose(), -b) < 1e-12);
      CHECK(max_abs_diff(h.bottomRightCorner(5, 5), -a.transpose()) < 1e-12);
    }
  }

  SUBCASE("zero angle is the identity") {
    Rng rng(3);
    auto gs = random_gaussian_state(4, rng);
    const ComplexMatrix before = gs.alpha();
    gs.apply_unitary(build_gate_kernel(4, GateKind::pairing, 0, 2, 0.0));
    CHECK(max_abs_diff(gs.alpha(), before) < 1e-15);
    QuadraticKernel empty{4, {}, ComplexMatrix()};
    gs.apply_unitary(empty);
    CHECK(max_abs_diff(gs.alpha(), before) == 0.0);
  }

  SUBCASE("hopping splits a particle evenly and transfers it at twice the angle") {
    auto gs = GaussianState::product_state(bits_from_string("10"));
    const auto gate = build_gate_kernel(2, GateKind::hopping, 0, 1, kQuarterTurn);
    gs.apply_unitary(gate);
    CHECK(gs.occupation(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gs.occupation(1) == doctest::Approx(0.5).epsilon(1e-12));
    gs.apply_unitary(gate);
    CHECK(std::abs(gs.occupation(0)) < 1e-12);
    CHECK(gs.occupation(1) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("pairing on the vacuum makes a Bell pair") {
    auto gs = bell_pair();
    CHECK(gs.occupation(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gs.occupation(1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(renyi_entropy(gs, {0, 1}, 2) == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  }

  SUBCASE("non-Hermitian kernels are rejected") {
    auto gs = GaussianState::product_state(bits_from_string("0110"));
    auto bad = build_gate_kernel(4, GateKind::hopping, 0, 1, 0.5);
    bad.block(0, 1) = Complex(0.0, 1.0);
    CHECK_THROWS_AS(gs.apply_unitary(bad), std::invalid_argument);
    auto asymmetric = build_gate_kernel(4, GateKind::pairing, 0, 1, 0.5);
    asymmetric.block(1, 2) = 0.5;  // breaks B^T = -B while staying Hermitian
    asymmetric.block(2, 1) = 0.5;
    CHECK_FALSE(asymmetric.is_valid());
  }

  SUBCASE("unitaries keep alpha orthonormal") {
    Rng rng(5);
    auto gs = random_gaussian_state(8, rng, 500);
    CHECK(gs.orthonormality_error() < 1e-12);
  }
}

TEST_CASE("mode swap") {
  auto gs = GaussianState::product_state(bits_from_string("10"));
  gs.apply_mode_swap(0, 1);
  CHECK(gs.occupation(0) == doctest::Approx(0.0));
  CHECK(gs.occupation(1) == doctest::Approx(1.0));

  Rng rng(9);
  auto state = random_gaussian_state(6, rng);
  state.measure(2, 0.3);
  state.measure(3, 0.8);
  const auto before = state.occupations();
  const ComplexMatrix alpha = state.alpha();
  state.apply_mode_swap(2, 3);
  const auto after = state.occupations();
  CHECK(after[2] == doctest::Approx(before[3]));
  CHECK(after[3] == doctest::Approx(before[2]));
  for (std::size_t k : {0, 1, 4, 5}) {
    CHECK(after[k] == doctest::Approx(before[k]));
  }
  state.apply_mode_swap(2, 3);
  CHECK(max_abs_diff(state.alpha(), alpha) == 0.0);

  CHECK_THROWS_AS(state.apply_mode_swap(1, 1), std::invalid_argument);
}

TEST_CASE("occupation measurement") {
  SUBCASE("definite occupation is read without disturbance") {
    auto gs = GaussianState::product_state(bits_from_string("10"));
    const ComplexMatrix before = gs.covariance().matrix;
    for (double u : {0.0, 0.5, 0.999}) {
      auto copy = gs;
      const auto m = copy.measure(0, u);
      CHECK(m.outcome);
      CHECK(m.probability_one == doctest::Approx(1.0));
      CHECK(max_abs_diff(copy.covariance().matrix, before) < 1e-14);
    }
  }

  SUBCASE("Bell pair collapses both sites") {
    for (auto update : {MeasurementUpdate::pivot_gram_schmidt, MeasurementUpdate::householder}) {
      for (double u : {0.2, 0.7}) {
        auto gs = bell_pair();
        const auto m = gs.measure(0, u, update);
        CHECK(m.probability_one == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(m.outcome == (u < 0.5));
        const double expected = m.outcome ? 1.0 : 0.0;
        CHECK(gs.occupation(0) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(gs.occupation(1) == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }

  SUBCASE("degeneracy guard takes the certain branch") {
    auto gs = GaussianState::product_state(bits_from_string("0100"));
    CHECK_FALSE(gs.measure(0, 0.0).outcome);  // P(1) = 0 even though u < anything
    CHECK(gs.measure(1, 0.999999).outcome);
    CHECK_THROWS_AS(gs.measure_forced(0, true), std::domain_error);
  }

  SUBCASE("post-measurement occupation is exact and both updates agree") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
      auto a = random_gaussian_state(6, rng);
      auto b = a;
      const auto site = static_cast<std::size_t>(rng.below(6));
      const double u = rng.uniform();
      const auto ma = a.measure(site, u, MeasurementUpdate::pivot_gram_schmidt);
      const auto mb = b.measure(site, u, MeasurementUpdate::householder);
      CHECK(ma.outcome == mb.outcome);
      CHECK(std::abs(a.occupation(site) - (ma.outcome ? 1.0 : 0.0)) < 1e-12);
      CHECK(a.orthonormality_error() < 1e-12);
      CHECK(b.orthonormality_error() < 1e-12);
      CHECK(max_abs_diff(a.covariance().matrix, b.covariance().matrix) < 1e-10);
    }
  }
}

TEST_CASE("orthonormalize") {
  Rng rng(4);
  auto gs = random_gaussian_state(6, rng);
  const ComplexMatrix c0 = gs.covariance().matrix;
  const ComplexMatrix alpha0 = gs.alpha();
  gs.orthonormalize();
  CHECK(max_abs_diff(gs.alpha(), alpha0) < 1e-12);

  ComplexMatrix scaled = alpha0;
  scaled.col(2) *= 2.0;
  scaled.col(4) += 0.3 * scaled.col(1);
  auto stretched = GaussianState::from_alpha(scaled);
  stretched.orthonormalize();
  CHECK(stretched.orthonormality_error() < 1e-12);
  CHECK(max_abs_diff(stretched.covariance().matrix, c0) < 1e-12);

  ComplexMatrix degenerate = alpha0;
  degenerate.col(3) = degenerate.col(0);
  auto broken = GaussianState::from_alpha(degenerate);
  CHECK_THROWS_AS(broken.orthonormalize(), RankDeficiencyError);
}

TEST_CASE("Renyi entropy") {
  auto product = GaussianState::product_state(bits_from_string("10110010"));
  for (std::size_t len = 1; len < 8; ++len) {
    CHECK(std::abs(renyi_entropy(product, {0, len}, 2)) < 1e-10);
  }

  Rng rng(17);
  auto gs = random_gaussian_state(8, rng, 80);
  const auto cov = gs.covariance();
  for (std::size_t len = 1; len < 8; ++len) {
    const double a = renyi_entropy(cov, {0, len}, 2);
    const double complement = renyi_entropy(cov, {len, 8 - len}, 2);
    CHECK(a >= 0.0);
    CHECK(std::abs(a - complement) < 1e-8);
  }
  CHECK(renyi_entropy(cov, {0, 4}, 3) <= renyi_entropy(cov, {0, 4}, 2) + 1e-12);

  CHECK_THROWS_AS(renyi_entropy(cov, {0, 0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(renyi_entropy(cov, {0, 8}, 2), std::invalid_argument);
  CHECK_THROWS_AS(renyi_entropy(cov, {0, 3}, 1), std::invalid_argument);
}

TEST_CASE("Renyi entropy follows an explicit lattice shift") {
  Rng rng(23);
  const std::size_t n = 8;
  auto gs = random_gaussian_state(n, rng, 60);
  // Shift every site by one: site k of the new state is site k-1 of the old.
  ComplexMatrix shifted(2 * n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = (k + n - 1) % n;
    shifted.row(k) = gs.alpha().row(src);
    shifted.row(k + n) = gs.alpha().row(src + n);
  }
  auto moved = GaussianState::from_alpha(shifted);
  for (std::size_t first = 0; first < n; ++first) {
    const double original = renyi_entropy(gs, {first, 3}, 2);
    const double translated = renyi_entropy(moved, {(first + 1) % n, 3}, 2);
    CHECK(std::abs(original - translated) < 1e-10);
  }
}

TEST_CASE("bitstring sampling") {
  Rng rng(31);
  auto neel = GaussianState::product_state(bits_from_string("1010"));
  for (int k = 0; k < 20; ++k) {
    CHECK(sample_bitstring(neel, rng) == bits_from_string("1010"));
  }

  const auto bell = bell_pair();
  const ComplexMatrix alpha = bell.alpha();
  const int draws = 10000;
  int ones = 0;
  for (int k = 0; k < draws; ++k) {
    const Bits s = sample_bitstring(bell, rng);
    REQUIRE(s[0] == s[1]);
    ones += s[0];
  }
  CHECK(max_abs_diff(bell.alpha(), alpha) == 0.0);
  const double sigma = std::sqrt(0.25 / draws);
  CHECK(std::abs(ones / static_cast<double>(draws) - 0.5) < 3.0 * sigma);

  // Even-parity start stays even under gates, swaps and measurements.
  for (int trial = 0; trial < 30; ++trial) {
    auto gs = GaussianState::product_state(bits_from_string("110010"));
    adaptff::testing::scramble(gs, nullptr, 30, rng);
    gs.measure(1, rng.uniform(), MeasurementUpdate::householder);
    gs.apply_mode_swap(1, 4);
    adaptff::testing::scramble(gs, nullptr, 10, rng);
    const Bits s = sample_bitstring(gs, rng);
    int total = 0;
    for (auto b : s) {
      total += b;
    }
    CHECK(total % 2 == 1);
  }
}

TEST_CASE("alpha serialization") {
  Rng rng(2);
  auto gs = random_gaussian_state(4, rng);
  const auto pairs = gs.to_row_major_pairs();
  REQUIRE(pairs.size() == 2 * 8 * 4);
  CHECK(pairs[2] == gs.alpha()(0, 1).real());
  CHECK(pairs[3] == gs.alpha()(0, 1).imag());
  auto back = GaussianState::from_row_major_pairs(4, pairs);
  CHECK(max_abs_diff(back.alpha(), gs.alpha()) == 0.0);
  CHECK_THROWS(GaussianState::from_row_major_pairs(5, pairs));
}

TEST_CASE("long random sequences stay pure") {
  Rng rng(99);
  const std::size_t n = 10;
  auto gs = random_gaussian_state(n, rng);
  for (int op = 0; op < 10000; ++op) {
    const auto i = static_cast<std::size_t>(rng.below(n));
    const auto j = (i + 1) % n;
    switch (rng.below(3)) {
      case 0:
        gs.apply_unitary(build_gate_kernel(n, GateKind::hopping, i, j, kQuarterTurn));
        break;
      case 1:
        gs.apply_unitary(build_gate_kernel(n, GateKind::pairing, i, j, kQuarterTurn));
        break;
      default:
        gs.measure(i, rng.uniform(), MeasurementUpdate::householder);
        break;
    }
    if (op % 100 == 99) {
      gs.orthonormalize();
    }
  }
  const ComplexMatrix c = gs.covariance().matrix;
  CHECK(max_abs_diff(c * c, c) < 1e-8);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(gs.occupation(i) >= -1e-12);
    CHECK(gs.occupation(i) <= 1.0 + 1e-12);
  }
}

TEST_CASE("householder update survives a vanishing residue on the other row") {
  // A hopping angle of 1e-170 leaves entries whose squares underflow.
  GaussianState gs = GaussianState::product_state(bits_from_string("100"));
  gs.apply_unitary(build_gate_kernel(3, GateKind::hopping, 0, 1, 1e-170));
  const auto m = gs.measure(0, 0.5, MeasurementUpdate::householder);
  CHECK(m.outcome);
  CHECK(gs.alpha().allFinite());
  CHECK(gs.orthonormality_error() < 1e-12);
  CHECK(gs.occupation(0) == doctest::Approx(1.0));
  CHECK(gs.occupation(1) == doctest::Approx(0.0));
}
