#include <doctest.h>

#include <sstream>

#include "polyrto/error.hpp"
#include "polyrto/randfield.hpp"
#include "polyrto/stochastic.hpp"

using namespace polyrto;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

CorrelationModel exponential(int n, double span, double l) {
  CorrelationModel m;
  m.kind = CorrelationModel::Kind::exponential;
  m.l_corr = l;
  for (int i = 0; i < n; ++i) m.grid.push_back(span * i / (n - 1));
  return m;
}

}  // namespace

TEST_SUITE("randfield") {

TEST_CASE("kernels") {
  CorrelationModel m = exponential(3, 2.0, 4.0);
  CHECK(m(0.0, 0.0) == doctest::Approx(0.09));
  CHECK(m(0.0, 2.0) == doctest::Approx(0.09 * std::exp(-0.5)));
  CHECK(m(2.0, 0.0) == m(0.0, 2.0));
  m.sigma_is_variance = false;
  CHECK(m.variance() == doctest::Approx(0.0081));
  m.kind = CorrelationModel::Kind::constant;
  CHECK(m(0.0, 5.0) == doctest::Approx(0.0081));
  m.l_corr = 0.0;
  m.kind = CorrelationModel::Kind::exponential;
  CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("constant kernel is rank one") {
  CorrelationModel m = exponential(50, 10.0, 1.0);
  m.kind = CorrelationModel::Kind::constant;
  const KlBasis kl = kl_decompose(correlation_matrix(m), 0.9);
  CHECK(kl.nu_kl == 1);
  CHECK(kl.energy(1) == doctest::Approx(1.0));
  CHECK(kl.eigenvalues[0] == doctest::Approx(50 * 0.09));
  CHECK(kl.eigenvalues.tail(49).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(kl.eigenvectors.col(0).cwiseAbs().isApprox(VectorXd::Constant(50, 1 / std::sqrt(50.0))));
}

TEST_CASE("exponential kernel: spectrum, energy and reconstruction") {
  const MatrixXd R = correlation_matrix(exponential(200, 120.0, 120.0));
  const KlBasis kl = kl_decompose(R, 0.9);
  const auto n = kl.eigenvalues.size();
  CHECK(n == 200);
  for (Eigen::Index i = 1; i < n; ++i) CHECK(kl.eigenvalues[i] <= kl.eigenvalues[i - 1]);
  CHECK(kl.eigenvalues.minCoeff() >= 0.0);
  for (int nu = 1; nu < 200; ++nu) CHECK(kl.energy(nu + 1) >= kl.energy(nu));
  CHECK(kl.energy(200) == doctest::Approx(1.0));
  CHECK(kl.energy(kl.nu_kl) >= 0.9);
  CHECK(kl.energy(kl.nu_kl - 1) < 0.9);
  CHECK((kl.eigenvectors.transpose() * kl.eigenvectors - MatrixXd::Identity(200, 200)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((kl.truncated_covariance(200) - R).cwiseAbs().maxCoeff() < 1e-12);
  // pointwise variance of the full expansion is σ_F (variance reading): std 0.3
  CHECK(kl.truncated_covariance(200).diagonal().cwiseSqrt().isApprox(VectorXd::Constant(200, 0.3)));

  const KlBasis pinned = kl_decompose(R, 0.9, 7);
  CHECK(pinned.nu_kl == 7);
  // sign convention: largest-magnitude entry positive
  for (int k = 0; k < 7; ++k) {
    Eigen::Index i;
    pinned.eigenvectors.col(k).cwiseAbs().maxCoeff(&i);
    CHECK(pinned.eigenvectors(i, k) > 0);
  }
}

TEST_CASE("sample covariance converges to the truncated covariance") {
  const MatrixXd R = correlation_matrix(exponential(40, 10.0, 5.0));
  const KlBasis kl = kl_decompose(R, 0.9, 5);
  const VectorXd mean = VectorXd::Ones(40);
  const Germ germ(std::vector(5, RandomVariableSpec::normal(0, 1)));
  const int M = 40000;
  const MatrixXd xi = sample_germ(germ, M, 21);
  MatrixXd real(40, M);
  for (int j = 0; j < M; ++j) real.col(j) = kl_realize(kl, mean, std::span<const double>(xi.col(j).data(), 5));
  const MatrixXd Rhat = correlation_from_samples(real, mean);
  const MatrixXd T = kl.truncated_covariance(5);
  CHECK((Rhat - T).cwiseAbs().maxCoeff() < 0.05 * T.cwiseAbs().maxCoeff());
  CHECK(kl_realize(kl, mean, std::vector<double>(5, 0.0)) == mean);
}

TEST_CASE("input validation and csv") {
  MatrixXd R = MatrixXd::Identity(3, 3);
  R(0, 1) = 0.5;
  CHECK_THROWS_AS(kl_decompose(R), Error);
  MatrixXd N = MatrixXd::Identity(2, 2);
  N(0, 0) = -1;
  CHECK_THROWS_AS(kl_decompose(N), Error);

  const KlBasis kl = kl_decompose(correlation_matrix(exponential(4, 1.0, 1.0)), 0.5);
  std::ostringstream csv;
  write_kl_csv(kl, csv);
  std::string first;
  std::istringstream in(csv.str());
  std::getline(in, first);
  CHECK(first == "n,eigenvalue,energy,retained");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 4);
}

}
