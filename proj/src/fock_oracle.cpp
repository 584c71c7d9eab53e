#include "adaptff/fock_oracle.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace adaptff {

namespace {

using Index = std::uint32_t;

double jw_sign(Index basis, std::size_t site) {
  const Index below = (Index{1} << site) - 1;
  return (std::popcount(basis & below) % 2 == 0) ? 1.0 : -1.0;
}

}  // namespace

FockVector FockVector::product_state(const Bits& occupations) {
  const std::size_t n = occupations.size();
  if (n == 0 || n > kMaxSites) {
    throw std::invalid_argument("FockVector: site count must be in [1, 12]");
  }
  Index basis = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (occupations[i]) {
      basis |= Index{1} << i;
    }
  }
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(Eigen::Index{1} << n);
  amps(basis) = 1.0;
  return FockVector(n, std::move(amps));
}

FockVector FockVector::from_amplitudes(Eigen::VectorXcd amplitudes) {
  const auto size = static_cast<std::uint64_t>(amplitudes.size());
  if (size < 2 || !std::has_single_bit(size)) {
    throw std::invalid_argument("FockVector: amplitude count must be 2^L");
  }
  const auto n = static_cast<std::size_t>(std::countr_zero(size));
  if (n > kMaxSites) {
    throw std::invalid_argument("FockVector: at most 12 sites");
  }
  const double norm = amplitudes.norm();
  if (norm == 0.0) {
    throw std::invalid_argument("FockVector: zero vector");
  }
  amplitudes /= norm;
  return FockVector(n, std::move(amplitudes));
}

void FockVector::check_site(std::size_t site) const {
  if (site >= num_sites_) {
    throw std::out_of_range("FockVector: site " + std::to_string(site) + " out of range");
  }
}

Eigen::VectorXcd FockVector::annihilate(std::size_t site, const Eigen::VectorXcd& v) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  const Index bit = Index{1} << site;
  for (Index b = 0; b < static_cast<Index>(v.size()); ++b) {
    if (b & bit) {
      out(b ^ bit) += jw_sign(b, site) * v(b);
    }
  }
  return out;
}

Eigen::VectorXcd FockVector::create(std::size_t site, const Eigen::VectorXcd& v) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  const Index bit = Index{1} << site;
  for (Index b = 0; b < static_cast<Index>(v.size()); ++b) {
    if (!(b & bit)) {
      out(b | bit) += jw_sign(b, site) * v(b);
    }
  }
  return out;
}

Eigen::VectorXcd FockVector::apply_mode(std::size_t mode, const Eigen::VectorXcd& v) const {
  return mode < num_sites_ ? annihilate(mode, v) : create(mode - num_sites_, v);
}

Eigen::VectorXcd FockVector::apply_mode_dagger(std::size_t mode,
                                               const Eigen::VectorXcd& v) const {
  return mode < num_sites_ ? create(mode, v) : annihilate(mode - num_sites_, v);
}

void FockVector::apply_gate(GateKind kind, std::size_t i, std::size_t j, double angle) {
  check_site(i);
  check_site(j);
  if (i == j) {
    throw std::invalid_argument("FockVector::apply_gate: sites must differ");
  }
  if (i > j) {
    std::swap(i, j);
  }
  auto hamiltonian = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
    if (kind == GateKind::hopping) {
      return create(i, annihilate(j, v)) + create(j, annihilate(i, v));
    }
    return create(i, create(j, v)) + annihilate(j, annihilate(i, v));
  };
  Eigen::VectorXcd term = amplitudes_;
  Eigen::VectorXcd sum = amplitudes_;
  for (int k = 1; k < 200 && term.norm() > 1e-18; ++k) {
    term = Complex(0.0, -angle / k) * hamiltonian(term);
    sum += term;
  }
  amplitudes_ = std::move(sum);
}

void FockVector::apply_mode_swap(std::size_t i, std::size_t j) {
  check_site(i);
  check_site(j);
  if (i == j) {
    throw std::invalid_argument("FockVector::apply_mode_swap: sites must differ");
  }
  auto image = [&](std::size_t k) { return k == i ? j : (k == j ? i : k); };
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(amplitudes_.size());
  for (Index b = 0; b < static_cast<Index>(amplitudes_.size()); ++b) {
    if (amplitudes_(b) == Complex(0.0)) {
      continue;
    }
    // |b> = c_k1^dag ... c_km^dag |0> with k ascending; rebuild with permuted
    // operators applied right to left.
    Index result = 0;
    double sign = 1.0;
    for (std::size_t k = num_sites_; k-- > 0;) {
      if (b & (Index{1} << k)) {
        const std::size_t target = image(k);
        sign *= jw_sign(result, target);
        result |= Index{1} << target;
      }
    }
    out(result) += sign * amplitudes_(b);
  }
  amplitudes_ = std::move(out);
}

double FockVector::probability_one(std::size_t site) const {
  check_site(site);
  const Index bit = Index{1} << site;
  double p = 0.0;
  for (Index b = 0; b < static_cast<Index>(amplitudes_.size()); ++b) {
    if (b & bit) {
      p += std::norm(amplitudes_(b));
    }
  }
  return p;
}

void FockVector::project(std::size_t site, bool outcome) {
  const Index bit = Index{1} << site;
  for (Index b = 0; b < static_cast<Index>(amplitudes_.size()); ++b) {
    if (static_cast<bool>(b & bit) != outcome) {
      amplitudes_(b) = 0.0;
    }
  }
  amplitudes_ /= amplitudes_.norm();
}

FockVector::Measurement FockVector::measure(std::size_t site, double u) {
  const double p1 = std::clamp(probability_one(site), 0.0, 1.0);
  bool outcome = u < p1;
  if (p1 < kDegenerateProbability) {
    outcome = false;
  } else if (p1 > 1.0 - kDegenerateProbability) {
    outcome = true;
  }
  project(site, outcome);
  return {outcome, p1};
}

double FockVector::measure_forced(std::size_t site, bool outcome) {
  const double p1 = std::clamp(probability_one(site), 0.0, 1.0);
  const double prob = outcome ? p1 : 1.0 - p1;
  if (prob < kDegenerateProbability) {
    throw std::domain_error("FockVector::measure_forced: outcome has vanishing probability");
  }
  project(site, outcome);
  return prob;
}

CovarianceMatrix FockVector::covariance() const {
  const std::size_t modes = 2 * num_sites_;
  ComplexMatrix raised(amplitudes_.size(), static_cast<Eigen::Index>(modes));
  for (std::size_t a = 0; a < modes; ++a) {
    raised.col(static_cast<Eigen::Index>(a)) = apply_mode_dagger(a, amplitudes_);
  }
  // <psi| c_a c_b^dag |psi> = (c_a^dag psi)^dag (c_b^dag psi)
  return CovarianceMatrix{raised.adjoint() * raised};
}

double FockVector::renyi_entropy(SiteInterval region, int n) const {
  if (region.length == 0 || region.length >= num_sites_ || region.first >= num_sites_) {
    throw std::invalid_argument("FockVector::renyi_entropy: region must be a proper subset");
  }
  if (n < 2) {
    throw std::invalid_argument("FockVector::renyi_entropy: Renyi index must be >= 2");
  }
  // A wrapping region is traded for its (contiguous) complement.
  if (region.first + region.length > num_sites_) {
    const std::size_t end = (region.first + region.length) % num_sites_;
    return renyi_entropy({end, num_sites_ - region.length}, n);
  }
  const std::size_t a_bits = region.length;
  const std::size_t b_bits = num_sites_ - a_bits;
  const Index a_mask = ((Index{1} << a_bits) - 1) << region.first;
  ComplexMatrix psi = ComplexMatrix::Zero(Eigen::Index{1} << a_bits, Eigen::Index{1} << b_bits);
  for (Index b = 0; b < static_cast<Index>(amplitudes_.size()); ++b) {
    const Index in_a = (b & a_mask) >> region.first;
    const Index low = b & ((Index{1} << region.first) - 1);
    const Index high = b >> (region.first + a_bits);
    const Index in_b = low | (high << region.first);
    psi(in_a, in_b) = amplitudes_(b);
  }
  const ComplexMatrix rho = psi * psi.adjoint();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(rho, Eigen::EigenvaluesOnly);
  double trace = 0.0;
  for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
    trace += std::pow(std::max(eig.eigenvalues()(k), 0.0), n);
  }
  return std::log(trace) / (1.0 - n);
}

double FockVector::parity() const {
  double value = 0.0;
  for (Index b = 0; b < static_cast<Index>(amplitudes_.size()); ++b) {
    value += (std::popcount(b) % 2 == 0 ? 1.0 : -1.0) * std::norm(amplitudes_(b));
  }
  return value;
}

}  // namespace adaptff
