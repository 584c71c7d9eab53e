#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "adaptff/rng.hpp"

namespace adaptff {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Occupation (or flag) bit vector, one entry per site, values 0 or 1.
using Bits = std::vector<std::uint8_t>;

enum class GateKind { hopping, pairing };

/// How a projective occupation measurement rebuilds the annihilator basis.
///
/// `pivot_gram_schmidt` follows the textbook recipe: pick the column with the
/// largest weight on the measured mode, eliminate that weight from the other
/// columns, pin the pivot to the new annihilator and re-orthonormalize with
/// modified Gram-Schmidt. Cost O(L^3).
///
/// `householder` reaches the same state with two Householder rotations of the
/// columns, which keeps the basis orthonormal without a full Gram-Schmidt pass.
/// Cost O(L^2).
enum class MeasurementUpdate { pivot_gram_schmidt, householder };

/// Raised when the annihilator basis loses rank (a column collapses during
/// orthonormalization). This always indicates an upstream bug.
class RankDeficiencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Contiguous run of sites [first, first + length), wrapping around the ring.
struct SiteInterval {
  std::size_t first = 0;
  std::size_t length = 0;
};

/// Born probabilities closer than this to 0 or 1 are resolved deterministically.
inline constexpr double kDegenerateProbability = 1e-12;

/// Sparse Bogoliubov-de Gennes kernel `H` of a quadratic Hamiltonian
/// c^dagger H c / 2, with c = (c_1..c_L, c_1^dagger..c_L^dagger).
/// Only the rows/columns listed in `modes` are nonzero; `block` is the dense
/// restriction to them.
struct QuadraticKernel {
  std::size_t num_sites = 0;
  std::vector<std::size_t> modes;
  ComplexMatrix block;

  /// Full 2L x 2L matrix.
  ComplexMatrix dense() const;
  /// Hermitian and particle-hole structured ([[A, B], [B^dag, -A^T]]).
  bool is_valid(double tol = 1e-12) const;
};

/// exp(-i H) restricted to the kernel's modes; identity elsewhere.
struct ModeUnitary {
  std::vector<std::size_t> modes;
  ComplexMatrix block;
};

/// Kernel of angle * H(i, j) with H_hop = c_i^dag c_j + h.c. and
/// H_pair = c_i^dag c_j^dag + c_j c_i. Sites are reordered so that i < j.
QuadraticKernel build_gate_kernel(std::size_t num_sites, GateKind kind, std::size_t i,
                                  std::size_t j, double angle);

/// exp(-i kernel) on the kernel's active block. Throws on an invalid kernel.
ModeUnitary exponentiate(const QuadraticKernel& kernel);

/// C = <c c^dag> in the block layout [[<c c^dag>, <c c>], [<c^dag c^dag>, <c^dag c>]].
struct CovarianceMatrix {
  ComplexMatrix matrix;

  std::size_t num_sites() const { return static_cast<std::size_t>(matrix.rows() / 2); }
  double occupation(std::size_t site) const {
    return matrix(static_cast<Eigen::Index>(site + num_sites()),
                  static_cast<Eigen::Index>(site + num_sites()))
        .real();
  }
};

/// Pure fermionic Gaussian state stored as the 2L x L matrix alpha whose
/// column j encodes the annihilator d_j = alpha_j^dag c.
class GaussianState {
 public:
  struct Measurement {
    bool outcome = false;
    double probability_one = 0.0;  // Born probability of n = 1 before collapse
  };

  /// Occupied sites get d = c_i^dag, empty sites d = c_i.
  static GaussianState product_state(const Bits& occupations);
  /// Adopts alpha as given (2L x L); does not orthonormalize.
  static GaussianState from_alpha(ComplexMatrix alpha);
  /// Row-major (re, im) pairs, as written by `to_row_major_pairs`.
  static GaussianState from_row_major_pairs(std::size_t num_sites,
                                            const std::vector<double>& pairs);

  std::size_t num_sites() const { return num_sites_; }
  const ComplexMatrix& alpha() const { return alpha_; }
  std::vector<double> to_row_major_pairs() const;

  CovarianceMatrix covariance() const;
  /// <n_i> without forming the full covariance.
  double occupation(std::size_t site) const;
  std::vector<double> occupations() const;

  void apply_unitary(const QuadraticKernel& kernel);
  void apply_unitary(const ModeUnitary& unitary);
  /// Left-multiplies the rows `modes` of alpha by `block` (a unitary).
  void apply_unitary(std::span<const std::size_t> modes, const ComplexMatrix& block);

  /// Exchanges modes i and j (rows i<->j and i+L<->j+L of alpha). This is the
  /// fermionic SWAP c_i <-> c_j.
  void apply_mode_swap(std::size_t i, std::size_t j);

  /// Projective measurement of n_site: outcome 1 iff u < P(n=1), with the
  /// degeneracy guard applied first.
  Measurement measure(std::size_t site, double u,
                      MeasurementUpdate update = MeasurementUpdate::pivot_gram_schmidt);

  /// Projects onto a prescribed outcome and returns that outcome's Born
  /// probability. Throws std::domain_error if it is below the degeneracy guard.
  double measure_forced(std::size_t site, bool outcome,
                        MeasurementUpdate update = MeasurementUpdate::pivot_gram_schmidt);

  /// Modified Gram-Schmidt with selective re-orthogonalization.
  void orthonormalize();

  /// max |alpha^dag alpha - I|.
  double orthonormality_error() const;

 private:
  GaussianState(std::size_t num_sites, ComplexMatrix alpha)
      : num_sites_(num_sites), alpha_(std::move(alpha)) {}

  void check_site(std::size_t site) const;
  void project(std::size_t site, bool outcome, MeasurementUpdate update);
  void project_pivot(Eigen::Index target, Eigen::Index other);
  void project_householder(Eigen::Index target, Eigen::Index other);
  Eigen::Index concentrate_row(Eigen::Index row, Eigen::Index skip_column);

  std::size_t num_sites_ = 0;
  ComplexMatrix alpha_;
};

/// S^(n) of a contiguous region from its restricted covariance. n >= 2.
double renyi_entropy(const CovarianceMatrix& cov, SiteInterval region, int n);
double renyi_entropy(const GaussianState& state, SiteInterval region, int n);

/// One Born-rule sample of all occupations (sites measured in ascending order
/// on a copy of the state).
Bits sample_bitstring(const GaussianState& state, Rng& rng);

}  // namespace adaptff
