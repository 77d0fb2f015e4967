#include "polyrto/randfield.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "polyrto/error.hpp"

namespace polyrto {

double CorrelationModel::operator()(double x, double y) const {
  if (kind == Kind::constant) return variance();
  return variance() * std::exp(-std::abs(x - y) / l_corr);
}

void CorrelationModel::validate() const {
  if (!(sigma_f > 0.0)) throw Error("field sigma must be positive");
  if (kind == Kind::exponential && !(l_corr > 0.0)) throw Error("correlation length must be positive");
  if (grid.empty()) throw Error("correlation grid is empty");
}

Eigen::MatrixXd correlation_matrix(const CorrelationModel& model) {
  model.validate();
  const auto n = static_cast<Eigen::Index>(model.grid.size());
  Eigen::MatrixXd R(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) R(i, j) = R(j, i) = model(model.grid[i], model.grid[j]);
  return R;
}

Eigen::MatrixXd correlation_from_samples(const Eigen::MatrixXd& realizations, const Eigen::VectorXd& mean) {
  if (realizations.cols() < 2) throw Error("correlation estimate needs at least two realizations");
  if (realizations.rows() != mean.size()) throw Error("mean does not match the realization grid");
  const Eigen::MatrixXd U = realizations.colwise() - mean;
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(U.rows(), U.rows());
  R.selfadjointView<Eigen::Lower>().rankUpdate(U, 1.0 / static_cast<double>(U.cols()));
  return R.selfadjointView<Eigen::Lower>();
}

double KlBasis::energy(int nu) const {
  const double total = eigenvalues.sum();
  if (!(total > 0.0)) return 1.0;
  nu = std::clamp(nu, 0, static_cast<int>(eigenvalues.size()));
  return eigenvalues.head(nu).sum() / total;
}

Eigen::MatrixXd KlBasis::truncated_covariance(int nu) const {
  const auto& phi = eigenvectors.leftCols(nu);
  return phi * eigenvalues.head(nu).asDiagonal() * phi.transpose();
}

KlBasis kl_decompose(const Eigen::MatrixXd& R, double tau, int fixed_terms) {
  if (R.rows() != R.cols() || R.rows() == 0) throw Error("correlation matrix must be square and non-empty");
  const double scale = R.cwiseAbs().maxCoeff();
  if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1e-300))
    throw Error("correlation matrix is not symmetric");
  if (!(tau > 0.0 && tau <= 1.0)) throw Error("energy threshold must lie in (0,1]");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
  if (es.info() != Eigen::Success) throw Error("eigendecomposition failed");
  const Eigen::Index n = R.rows();
  KlBasis kl;
  kl.eigenvalues = es.eigenvalues().reverse();
  kl.eigenvectors = es.eigenvectors().rowwise().reverse();
  const double l1 = std::max(kl.eigenvalues[0], 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (kl.eigenvalues[i] < -1e-10 * l1) throw Error("correlation matrix has a significantly negative eigenvalue");
    kl.eigenvalues[i] = std::max(kl.eigenvalues[i], 0.0);
  }
  // fix the sign of each eigenvector so results do not depend on solver internals
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index imax = 0;
    kl.eigenvectors.col(k).cwiseAbs().maxCoeff(&imax);
    if (kl.eigenvectors(imax, k) < 0.0) kl.eigenvectors.col(k) *= -1.0;
  }
  if (fixed_terms > 0) {
    if (fixed_terms > n) throw Error("more KL terms requested than grid points");
    kl.nu_kl = fixed_terms;
  } else {
    kl.nu_kl = static_cast<int>(n);
    for (int nu = 1; nu <= n; ++nu)
      if (kl.energy(nu) >= tau - 1e-14) {
        kl.nu_kl = nu;
        break;
      }
  }
  return kl;
}

Eigen::VectorXd kl_realize(const KlBasis& basis, const Eigen::VectorXd& mean, std::span<const double> xi) {
  if (xi.size() != static_cast<std::size_t>(basis.nu_kl)) throw Error("KL germ has wrong dimension");
  if (mean.size() != basis.eigenvectors.rows()) throw Error("mean does not match the KL grid");
  Eigen::VectorXd f = mean;
  for (int k = 0; k < basis.nu_kl; ++k) f += std::sqrt(basis.eigenvalues[k]) * xi[k] * basis.eigenvectors.col(k);
  return f;
}

void write_kl_csv(const KlBasis& basis, std::ostream& out) {
  out << "n,eigenvalue,energy,retained\n";
  char buf[128];
  for (Eigen::Index k = 0; k < basis.eigenvalues.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%d\n", static_cast<long long>(k + 1), basis.eigenvalues[k],
                  basis.energy(static_cast<int>(k + 1)), k < basis.nu_kl ? 1 : 0);
    out << buf;
  }
}

}  // namespace polyrto
