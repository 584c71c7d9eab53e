#pragma once

#include <Eigen/Dense>

#include <cstddef>

#include "adaptff/gaussian_state.hpp"

namespace adaptff {

/// Brute-force state vector over all 2^L occupation bitstrings, used as ground
/// truth for the Gaussian simulator. Bit k of a basis index is n_k, and
/// fermionic signs follow the Jordan-Wigner string over ascending sites:
/// c_k^dag |n> = (-1)^(n_0 + ... + n_{k-1}) |n + e_k>.
class FockVector {
 public:
  static constexpr std::size_t kMaxSites = 12;

  struct Measurement {
    bool outcome = false;
    double probability_one = 0.0;
  };

  static FockVector product_state(const Bits& occupations);
  /// Normalizes the given amplitudes. Size must be a power of two 2^L.
  static FockVector from_amplitudes(Eigen::VectorXcd amplitudes);

  std::size_t num_sites() const { return num_sites_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  double norm() const { return amplitudes_.norm(); }

  /// exp(-i angle H) with H built from fermionic operators and summed by a
  /// Taylor series. Sites are reordered so that i < j (pairing sign).
  void apply_gate(GateKind kind, std::size_t i, std::size_t j, double angle);

  /// Fermionic SWAP: the unitary with U c_i^dag U^dag = c_j^dag (and i <-> j)
  /// fixing the vacuum.
  void apply_mode_swap(std::size_t i, std::size_t j);

  double probability_one(std::size_t site) const;
  Measurement measure(std::size_t site, double u);
  double measure_forced(std::size_t site, bool outcome);

  /// Every entry <c_a c_b^dag> evaluated by explicit operator application.
  CovarianceMatrix covariance() const;

  /// S^(n) from the reduced density matrix of a contiguous region.
  double renyi_entropy(SiteInterval region, int n) const;

  /// <prod_i (1 - 2 n_i)>.
  double parity() const;

  // Mode operators on a raw vector: mode a < L is c_a, a >= L is c_{a-L}^dag.
  Eigen::VectorXcd apply_mode(std::size_t mode, const Eigen::VectorXcd& v) const;
  Eigen::VectorXcd apply_mode_dagger(std::size_t mode, const Eigen::VectorXcd& v) const;

 private:
  FockVector(std::size_t num_sites, Eigen::VectorXcd amplitudes)
      : num_sites_(num_sites), amplitudes_(std::move(amplitudes)) {}

  Eigen::VectorXcd annihilate(std::size_t site, const Eigen::VectorXcd& v) const;
  Eigen::VectorXcd create(std::size_t site, const Eigen::VectorXcd& v) const;
  void check_site(std::size_t site) const;
  void project(std::size_t site, bool outcome);

  std::size_t num_sites_ = 0;
  Eigen::VectorXcd amplitudes_;
};

}  // namespace adaptff
