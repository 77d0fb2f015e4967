#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace polyrto {

/// Correlation of a 1-D load field sampled on a grid along a boundary.
/// `sigma_f` multiplies the kernel directly, so with `sigma_is_variance` it is
/// the pointwise variance; otherwise it is the standard deviation and the
/// kernel is scaled by σ_F².
struct CorrelationModel {
  enum class Kind { constant, exponential };
  Kind kind = Kind::exponential;
  double sigma_f = 0.09;
  double l_corr = 1.0;
  bool sigma_is_variance = true;
  std::vector<double> grid;

  double variance() const noexcept { return sigma_is_variance ? sigma_f : sigma_f * sigma_f; }
  double operator()(double x, double y) const;
  void validate() const;
};

Eigen::MatrixXd correlation_matrix(const CorrelationModel& model);

/// R̂ = (1/M) Û Ûᵀ with Û the realizations minus the mean (one column per realization).
Eigen::MatrixXd correlation_from_samples(const Eigen::MatrixXd& realizations, const Eigen::VectorXd& mean);

struct KlBasis {
  Eigen::VectorXd eigenvalues;   // all of them, descending, clamped at 0
  Eigen::MatrixXd eigenvectors;  // columns, orthonormal
  int nu_kl = 0;

  /// Σ_{n≤ν} λ_n / Σ λ_n
  double energy(int nu) const;
  Eigen::MatrixXd truncated_covariance(int nu) const;
};

/// Full symmetric eigendecomposition with energy truncation at `tau`.
/// `fixed_terms` > 0 overrides the energy rule.
KlBasis kl_decompose(const Eigen::MatrixXd& R, double tau = 0.9, int fixed_terms = 0);

/// μ + Σ_{n<ν} √λ_n φ_n ξ_n
Eigen::VectorXd kl_realize(const KlBasis& basis, const Eigen::VectorXd& mean, std::span<const double> xi);

/// n, eigenvalue, energy(n) for every eigenpair.
void write_kl_csv(const KlBasis& basis, std::ostream& out);

}  // namespace polyrto
