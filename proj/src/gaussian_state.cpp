#include "adaptff/gaussian_state.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace adaptff {

namespace {

constexpr double kCollapsedNorm = 1e-10;
constexpr double kNegligibleRow = 1e-14;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// Index of the partner mode (c_i <-> c_i^dagger).
std::size_t partner(std::size_t mode, std::size_t num_sites) {
  return mode < num_sites ? mode + num_sites : mode - num_sites;
}

}  // namespace

// ---------------------------------------------------------------------------
// Kernels

ComplexMatrix QuadraticKernel::dense() const {
  ComplexMatrix full = ComplexMatrix::Zero(idx(2 * num_sites), idx(2 * num_sites));
  for (std::size_t a = 0; a < modes.size(); ++a) {
    for (std::size_t b = 0; b < modes.size(); ++b) {
      full(idx(modes[a]), idx(modes[b])) = block(idx(a), idx(b));
    }
  }
  return full;
}

bool QuadraticKernel::is_valid(double tol) const {
  if (block.rows() != idx(modes.size()) || block.cols() != idx(modes.size())) {
    return false;
  }
  if (modes.empty()) {
    return true;
  }
  if ((block - block.adjoint()).cwiseAbs().maxCoeff() > tol) {
    return false;
  }
  // Particle-hole structure: H(pa, pb) = -conj(H(a, b)), with the mode set
  // closed under the partner map.
  for (std::size_t a = 0; a < modes.size(); ++a) {
    auto pa = std::find(modes.begin(), modes.end(), partner(modes[a], num_sites));
    if (modes[a] >= 2 * num_sites || pa == modes.end()) {
      return false;
    }
    for (std::size_t b = 0; b < modes.size(); ++b) {
      auto pb = std::find(modes.begin(), modes.end(), partner(modes[b], num_sites));
      const Complex mirrored = block(pa - modes.begin(), pb - modes.begin());
      if (std::abs(mirrored + std::conj(block(idx(a), idx(b)))) > tol) {
        return false;
      }
    }
  }
  return true;
}

QuadraticKernel build_gate_kernel(std::size_t num_sites, GateKind kind, std::size_t i,
                                  std::size_t j, double angle) {
  if (i == j || i >= num_sites || j >= num_sites) {
    throw std::invalid_argument("build_gate_kernel: sites must be distinct and in [0, " +
                                std::to_string(num_sites) + ")");
  }
  if (i > j) {
    std::swap(i, j);
  }
  QuadraticKernel kernel;
  kernel.num_sites = num_sites;
  // Local order: c_i, c_j, c_i^dag, c_j^dag.
  kernel.modes = {i, j, i + num_sites, j + num_sites};
  kernel.block = ComplexMatrix::Zero(4, 4);
  auto& h = kernel.block;
  if (kind == GateKind::hopping) {
    // A_ij = A_ji = 1; lower-right block is -A^T.
    h(0, 1) = h(1, 0) = angle;
    h(2, 3) = h(3, 2) = -angle;
  } else {
    // B_ij = 1, B_ji = -1; lower-left block is B^dag.
    h(0, 3) = angle;
    h(1, 2) = -angle;
    h(2, 1) = -angle;
    h(3, 0) = angle;
  }
  return kernel;
}

ModeUnitary exponentiate(const QuadraticKernel& kernel) {
  if (!kernel.is_valid()) {
    throw std::invalid_argument("exponentiate: kernel is not a Hermitian BdG matrix");
  }
  ModeUnitary unitary{kernel.modes, ComplexMatrix()};
  if (kernel.modes.empty()) {
    return unitary;
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(kernel.block);
  const Eigen::VectorXcd phases =
      (eig.eigenvalues().cast<Complex>() * Complex(0.0, -1.0)).array().exp().matrix();
  unitary.block = eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
  return unitary;
}

// ---------------------------------------------------------------------------
// State construction

GaussianState GaussianState::product_state(const Bits& occupations) {
  const std::size_t n = occupations.size();
  if (n < 2) {
    throw std::invalid_argument("product_state: need at least 2 sites");
  }
  ComplexMatrix alpha = ComplexMatrix::Zero(idx(2 * n), idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    alpha(idx(occupations[i] ? i + n : i), idx(i)) = 1.0;
  }
  return GaussianState(n, std::move(alpha));
}

GaussianState GaussianState::from_alpha(ComplexMatrix alpha) {
  if (alpha.cols() < 2 || alpha.rows() != 2 * alpha.cols()) {
    throw std::invalid_argument("from_alpha: alpha must be 2L x L with L >= 2");
  }
  const auto n = static_cast<std::size_t>(alpha.cols());
  return GaussianState(n, std::move(alpha));
}

GaussianState GaussianState::from_row_major_pairs(std::size_t num_sites,
                                                  const std::vector<double>& pairs) {
  if (pairs.size() != 4 * num_sites * num_sites) {
    throw std::invalid_argument("from_row_major_pairs: expected 2L*L complex entries");
  }
  ComplexMatrix alpha(idx(2 * num_sites), idx(num_sites));
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < alpha.rows(); ++r) {
    for (Eigen::Index c = 0; c < alpha.cols(); ++c, k += 2) {
      alpha(r, c) = Complex(pairs[k], pairs[k + 1]);
    }
  }
  return from_alpha(std::move(alpha));
}

std::vector<double> GaussianState::to_row_major_pairs() const {
  std::vector<double> pairs;
  pairs.reserve(static_cast<std::size_t>(alpha_.size()) * 2);
  for (Eigen::Index r = 0; r < alpha_.rows(); ++r) {
    for (Eigen::Index c = 0; c < alpha_.cols(); ++c) {
      pairs.push_back(alpha_(r, c).real());
      pairs.push_back(alpha_(r, c).imag());
    }
  }
  return pairs;
}

// ---------------------------------------------------------------------------
// Observables

CovarianceMatrix GaussianState::covariance() const {
  return CovarianceMatrix{alpha_ * alpha_.adjoint()};
}

double GaussianState::occupation(std::size_t site) const {
  check_site(site);
  return alpha_.row(idx(site + num_sites_)).squaredNorm();
}

std::vector<double> GaussianState::occupations() const {
  std::vector<double> n(num_sites_);
  for (std::size_t i = 0; i < num_sites_; ++i) {
    n[i] = alpha_.row(idx(i + num_sites_)).squaredNorm();
  }
  return n;
}

double GaussianState::orthonormality_error() const {
  const ComplexMatrix gram = alpha_.adjoint() * alpha_;
  return (gram - ComplexMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Unitaries

void GaussianState::apply_unitary(const QuadraticKernel& kernel) {
  if (kernel.num_sites != num_sites_) {
    throw std::invalid_argument("apply_unitary: kernel built for a different system size");
  }
  apply_unitary(exponentiate(kernel));
}

void GaussianState::apply_unitary(const ModeUnitary& unitary) {
  apply_unitary(unitary.modes, unitary.block);
}

void GaussianState::apply_unitary(std::span<const std::size_t> modes,
                                  const ComplexMatrix& block) {
  const auto m = idx(modes.size());
  if (m == 0) {
    return;
  }
  ComplexMatrix rows(m, alpha_.cols());
  for (Eigen::Index a = 0; a < m; ++a) {
    rows.row(a) = alpha_.row(idx(modes[static_cast<std::size_t>(a)]));
  }
  const ComplexMatrix rotated = block * rows;
  for (Eigen::Index a = 0; a < m; ++a) {
    alpha_.row(idx(modes[static_cast<std::size_t>(a)])) = rotated.row(a);
  }
}

void GaussianState::apply_mode_swap(std::size_t i, std::size_t j) {
  check_site(i);
  check_site(j);
  if (i == j) {
    throw std::invalid_argument("apply_mode_swap: sites must differ");
  }
  alpha_.row(idx(i)).swap(alpha_.row(idx(j)));
  alpha_.row(idx(i + num_sites_)).swap(alpha_.row(idx(j + num_sites_)));
}

// ---------------------------------------------------------------------------
// Measurements

void GaussianState::check_site(std::size_t site) const {
  if (site >= num_sites_) {
    throw std::out_of_range("site " + std::to_string(site) + " outside [0, " +
                            std::to_string(num_sites_) + ")");
  }
}

GaussianState::Measurement GaussianState::measure(std::size_t site, double u,
                                                  MeasurementUpdate update) {
  const double p1 = std::clamp(occupation(site), 0.0, 1.0);
  bool outcome = u < p1;
  if (p1 < kDegenerateProbability) {
    outcome = false;
  } else if (p1 > 1.0 - kDegenerateProbability) {
    outcome = true;
  }
  project(site, outcome, update);
  return {outcome, p1};
}

double GaussianState::measure_forced(std::size_t site, bool outcome, MeasurementUpdate update) {
  const double p1 = std::clamp(occupation(site), 0.0, 1.0);
  const double prob = outcome ? p1 : 1.0 - p1;
  if (prob < kDegenerateProbability) {
    throw std::domain_error("measure_forced: outcome has vanishing Born probability");
  }
  project(site, outcome, update);
  return prob;
}

void GaussianState::project(std::size_t site, bool outcome, MeasurementUpdate update) {
  // Outcome 1 pins c_i^dag as an annihilator; outcome 0 pins c_i.
  const Eigen::Index target = idx(outcome ? site + num_sites_ : site);
  const Eigen::Index other = idx(outcome ? site : site + num_sites_);
  if (update == MeasurementUpdate::pivot_gram_schmidt) {
    project_pivot(target, other);
  } else {
    project_householder(target, other);
  }
}

void GaussianState::project_pivot(Eigen::Index target, Eigen::Index other) {
  Eigen::Index pivot = 0;
  alpha_.row(target).cwiseAbs().maxCoeff(&pivot);
  const Complex pivot_value = alpha_(target, pivot);
  for (Eigen::Index j = 0; j < alpha_.cols(); ++j) {
    if (j == pivot) {
      continue;
    }
    const Complex ratio = alpha_(target, j) / pivot_value;
    alpha_.col(j) -= ratio * alpha_.col(pivot);
    alpha_(target, j) = 0.0;
    alpha_(other, j) = 0.0;
  }
  alpha_.col(pivot).setZero();
  alpha_(target, pivot) = 1.0;
  orthonormalize();
}

// Rotates the columns (all but `skip_column`) with one Householder reflection
// so that `row` is nonzero in a single column, which is returned. Returns -1
// when the row is already zero.
Eigen::Index GaussianState::concentrate_row(Eigen::Index row, Eigen::Index skip_column) {
  Eigen::VectorXcd y = alpha_.row(row).adjoint();
  if (skip_column >= 0) {
    y(skip_column) = 0.0;
  }
  const double norm = y.norm();
  if (norm < kNegligibleRow) {
    // Rounding residue; squaring it below would underflow.
    for (Eigen::Index j = 0; j < alpha_.cols(); ++j) {
      if (j != skip_column) {
        alpha_(row, j) = 0.0;
      }
    }
    return -1;
  }
  Eigen::Index k = 0;
  y.cwiseAbs().maxCoeff(&k);
  const double yk_abs = std::abs(y(k));
  const Complex phase = y(k) / yk_abs;
  Eigen::VectorXcd v = y;
  v(k) += phase * norm;
  const double vv = 2.0 * (norm * norm + norm * yk_abs);
  // alpha v and the rank-one update column by column: v is often sparse and
  // Eigen's generic complex outer product is several times slower.
  Eigen::VectorXcd w = Eigen::VectorXcd::Zero(alpha_.rows());
  for (Eigen::Index j = 0; j < alpha_.cols(); ++j) {
    if (v(j) != 0.0) {
      w += v(j) * alpha_.col(j);
    }
  }
  w *= 2.0 / vv;
  for (Eigen::Index j = 0; j < alpha_.cols(); ++j) {
    if (v(j) != 0.0) {
      alpha_.col(j) -= std::conj(v(j)) * w;
    }
  }
  for (Eigen::Index j = 0; j < alpha_.cols(); ++j) {
    if (j != k && j != skip_column) {
      alpha_(row, j) = 0.0;
    }
  }
  return k;
}

void GaussianState::project_householder(Eigen::Index target, Eigen::Index other) {
  const Eigen::Index pivot = concentrate_row(target, -1);
  if (pivot < 0) {
    throw RankDeficiencyError("measurement update: projected outcome has no weight");
  }
  const Eigen::Index carrier = concentrate_row(other, pivot);
  if (carrier >= 0) {
    alpha_(other, carrier) = 0.0;
    const double norm = alpha_.col(carrier).norm();
    if (norm < kCollapsedNorm) {
      throw RankDeficiencyError("measurement update collapsed a column (norm " +
                                std::to_string(norm) + ")");
    }
    alpha_.col(carrier) /= norm;
  }
  alpha_.col(pivot).setZero();
  alpha_(target, pivot) = 1.0;
}

void GaussianState::orthonormalize() {
  for (Eigen::Index j = 0; j < alpha_.cols(); ++j) {
    Eigen::VectorXcd v = alpha_.col(j);
    double before = v.norm();
    double after = before;
    // Second pass only when the first one cancelled most of the column.
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index q = 0; q < j; ++q) {
        v -= alpha_.col(q).dot(v) * alpha_.col(q);
      }
      after = v.norm();
      if (after > 0.5 * before) {
        break;
      }
      before = after;
    }
    if (after < kCollapsedNorm) {
      throw RankDeficiencyError("orthonormalize: column " + std::to_string(j) +
                                " collapsed (norm " + std::to_string(after) + ")");
    }
    alpha_.col(j) = v / after;
  }
}

// ---------------------------------------------------------------------------
// Entropy and sampling

double renyi_entropy(const CovarianceMatrix& cov, SiteInterval region, int n) {
  const std::size_t num_sites = cov.num_sites();
  if (region.length == 0 || region.length >= num_sites || region.first >= num_sites) {
    throw std::invalid_argument("renyi_entropy: region must be a nonempty proper subset");
  }
  if (n < 2) {
    throw std::invalid_argument("renyi_entropy: Renyi index must be >= 2");
  }
  const auto size = idx(region.length);
  std::vector<Eigen::Index> modes(2 * region.length);
  for (std::size_t k = 0; k < region.length; ++k) {
    const std::size_t site = (region.first + k) % num_sites;
    modes[k] = idx(site);
    modes[k + region.length] = idx(site + num_sites);
  }
  ComplexMatrix restricted(2 * size, 2 * size);
  for (Eigen::Index a = 0; a < 2 * size; ++a) {
    for (Eigen::Index b = 0; b < 2 * size; ++b) {
      restricted(a, b) = cov.matrix(modes[static_cast<std::size_t>(a)],
                                    modes[static_cast<std::size_t>(b)]);
    }
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(restricted, Eigen::EigenvaluesOnly);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
    const double lambda = std::clamp(eig.eigenvalues()(k), 0.0, 1.0);
    sum += std::log(std::pow(lambda, n) + std::pow(1.0 - lambda, n));
  }
  return std::max(0.0, sum / (2.0 * (1.0 - n)));
}

double renyi_entropy(const GaussianState& state, SiteInterval region, int n) {
  return renyi_entropy(state.covariance(), region, n);
}

Bits sample_bitstring(const GaussianState& state, Rng& rng) {
  GaussianState work = state;
  Bits bits(state.num_sites());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    bits[i] = work.measure(i, rng.uniform(), MeasurementUpdate::householder).outcome ? 1 : 0;
  }
  return bits;
}

}  // namespace adaptff
