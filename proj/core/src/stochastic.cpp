#include "polyrto/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "polyrto/error.hpp"
#include "polyrto/random.hpp"

namespace polyrto {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double normal_quantile(double u) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u); }

// log Φ(x), accurate in both tails
double log_normal_cdf(double x) {
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  return std::log(normal_cdf(x));
}

double gumbel_scale(double std) { return std * std::sqrt(6.0) / std::numbers::pi; }
double gumbel_location(double mean, double std) { return mean - std::numbers::egamma * gumbel_scale(std); }

}  // namespace

// ---------------------------------------------------------------- random variables

RandomVariableSpec RandomVariableSpec::uniform(double lo, double hi, std::string meaning) {
  return {Distribution::uniform, lo, hi, std::move(meaning)};
}
RandomVariableSpec RandomVariableSpec::normal(double mean, double std, std::string meaning) {
  return {Distribution::normal, mean, std, std::move(meaning)};
}
RandomVariableSpec RandomVariableSpec::gumbel(double mean, double std, std::string meaning) {
  return {Distribution::gumbel, mean, std, std::move(meaning)};
}

double RandomVariableSpec::mean() const noexcept { return distribution == Distribution::uniform ? 0.5 * (a + b) : a; }

double RandomVariableSpec::to_physical(double xi) const {
  switch (distribution) {
    case Distribution::uniform:
      return a + (b - a) * (xi + 1.0) / 2.0;
    case Distribution::normal:
      return a + b * xi;
    case Distribution::gumbel:
      return gumbel_location(a, b) - gumbel_scale(b) * std::log(-log_normal_cdf(xi));
  }
  return 0.0;
}

double RandomVariableSpec::nominal_xi() const {
  if (distribution != Distribution::gumbel) return 0.0;
  // F(mean) = exp(−exp(−γ)) for every Gumbel distribution
  return normal_quantile(std::exp(-std::exp(-std::numbers::egamma)));
}

void RandomVariableSpec::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b)) throw Error("random variable parameters must be finite");
  if (distribution == Distribution::uniform) {
    if (!(a <= b)) throw Error("uniform variable needs lo <= hi");
  } else if (!(b >= 0.0)) {
    throw Error("standard deviation must be non-negative");
  }
}

Germ::Germ(std::vector<RandomVariableSpec> variables) : vars_(std::move(variables)) {
  for (const auto& v : vars_) v.validate();
}

Eigen::VectorXd Germ::to_physical(std::span<const double> xi) const {
  if (xi.size() != vars_.size()) throw Error("germ point has wrong dimension");
  Eigen::VectorXd x(static_cast<Eigen::Index>(vars_.size()));
  for (std::size_t i = 0; i < vars_.size(); ++i) x[i] = vars_[i].to_physical(xi[i]);
  return x;
}

Eigen::VectorXd Germ::nominal_xi() const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(vars_.size()));
  for (std::size_t i = 0; i < vars_.size(); ++i) x[i] = vars_[i].nominal_xi();
  return x;
}

Eigen::VectorXd Germ::nominal_physical() const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(vars_.size()));
  for (std::size_t i = 0; i < vars_.size(); ++i) x[i] = vars_[i].mean();
  return x;
}

Eigen::VectorXd to_physical(const Germ& germ, std::span<const double> xi) { return germ.to_physical(xi); }

// ---------------------------------------------------------------- polynomials

void orthonormal_polys(PolyFamily family, int pmax, double x, std::span<double> out) {
  if (pmax < 0 || out.size() < static_cast<std::size_t>(pmax) + 1) throw Error("orthonormal_polys: bad degree");
  // classical three-term recurrences, normalized per degree
  double prev = 1.0, cur = x;
  out[0] = 1.0;
  if (pmax == 0) return;
  if (family == PolyFamily::legendre) {
    out[1] = std::sqrt(3.0) * x;
    for (int n = 1; n < pmax; ++n) {
      const double next = ((2.0 * n + 1.0) * x * cur - n * prev) / (n + 1.0);
      prev = cur;
      cur = next;
      out[n + 1] = std::sqrt(2.0 * (n + 1) + 1.0) * cur;
    }
  } else {
    out[1] = x;
    double fact = 1.0;
    for (int n = 1; n < pmax; ++n) {
      const double next = x * cur - n * prev;
      prev = cur;
      cur = next;
      fact *= (n + 1.0);
      out[n + 1] = cur / std::sqrt(fact);
    }
  }
}

double orthonormal_poly(PolyFamily family, int degree, double x) {
  std::vector<double> v(static_cast<std::size_t>(std::max(degree, 0)) + 1);
  orthonormal_polys(family, degree, x, v);
  return v.back();
}

GaussRule gauss_rule(PolyFamily family, int n) {
  if (n < 1) throw Error("a Gauss rule needs at least one node");
  // Golub–Welsch on the Jacobi matrix of the monic recurrence
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = family == PolyFamily::legendre ? k * k / (4.0 * k * k - 1.0) : static_cast<double>(k);
    J(k, k - 1) = J(k - 1, k) = std::sqrt(beta);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussRule r;
  r.nodes = es.eigenvalues();
  r.weights = es.eigenvectors().row(0).array().square().transpose();
  // enforce exact symmetry of the symmetric rules
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    const double w = 0.5 * (r.weights[i] + r.weights[n - 1 - i]);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2) r.nodes[n / 2] = 0.0;
  r.weights /= r.weights.sum();
  return r;
}

// ---------------------------------------------------------------- basis

std::uint64_t basis_size(int nu_rv, int p_pc) {
  if (nu_rv < 0 || p_pc < 0) throw Error("basis dimensions must be non-negative");
  std::uint64_t r = 1;
  for (int k = 1; k <= p_pc; ++k) r = r * static_cast<std::uint64_t>(nu_rv + k) / static_cast<std::uint64_t>(k);
  return r;
}

PcBasis::PcBasis(int dims, int order) : dims_(dims), order_(order) {
  if (dims < 1) throw Error("basis needs at least one dimension");
  if (order < 0) throw Error("polynomial order must be non-negative");
  std::vector<int> alpha(static_cast<std::size_t>(dims), 0);
  // all indices of total degree `left` in dims [d, dims), leading entry descending
  auto fill = [&](auto&& self, int d, int left) -> void {
    if (d == dims - 1) {
      alpha[d] = left;
      indices_.push_back(alpha);
      return;
    }
    for (int v = left; v >= 0; --v) {
      alpha[d] = v;
      self(self, d + 1, left - v);
    }
  };
  for (int degree = 0; degree <= order; ++degree) fill(fill, 0, degree);
}

PcBasis multi_indices(int nu_rv, int p_pc) { return PcBasis(nu_rv, p_pc); }

Eigen::VectorXd eval_basis(const PcBasis& basis, const Germ& germ, std::span<const double> xi) {
  const auto dims = static_cast<std::size_t>(basis.dims());
  if (germ.size() != dims || xi.size() != dims) throw Error("eval_basis: dimension mismatch");
  const auto p1 = static_cast<std::size_t>(basis.order()) + 1;
  std::vector<double> table(dims * p1);
  for (std::size_t d = 0; d < dims; ++d)
    orthonormal_polys(germ.family(d), basis.order(), xi[d], std::span(table).subspan(d * p1, p1));
  Eigen::VectorXd out(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t n = 0; n < basis.size(); ++n) {
    double v = 1.0;
    for (std::size_t d = 0; d < dims; ++d) v *= table[d * p1 + static_cast<std::size_t>(basis[n][d])];
    out[static_cast<Eigen::Index>(n)] = v;
  }
  return out;
}

// ---------------------------------------------------------------- grid

CollocationGrid::CollocationGrid(const Germ& germ, int nodes_per_dim) : nodes_per_dim_(nodes_per_dim) {
  if (nodes_per_dim < 1) throw Error("nodes per dimension must be >= 1");
  if (germ.size() == 0) throw Error("collocation grid needs a non-empty germ");
  size_ = 1;
  for (std::size_t d = 0; d < germ.size(); ++d) {
    rules_.push_back(gauss_rule(germ.family(d), nodes_per_dim));
    if (size_ > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(nodes_per_dim))
      throw Error("collocation grid size overflows");
    size_ *= static_cast<std::uint64_t>(nodes_per_dim);
  }
}

void CollocationGrid::point(std::uint64_t j, std::span<double> out) const {
  if (j >= size_) throw Error("collocation point index out of range");
  const auto n = static_cast<std::uint64_t>(nodes_per_dim_);
  for (std::size_t d = rules_.size(); d-- > 0;) {
    out[d] = rules_[d].nodes[static_cast<Eigen::Index>(j % n)];
    j /= n;
  }
}

Eigen::VectorXd CollocationGrid::point(std::uint64_t j) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(rules_.size()));
  point(j, std::span(x.data(), rules_.size()));
  return x;
}

double CollocationGrid::weight(std::uint64_t j) const {
  if (j >= size_) throw Error("collocation point index out of range");
  const auto n = static_cast<std::uint64_t>(nodes_per_dim_);
  double w = 1.0;
  for (std::size_t d = rules_.size(); d-- > 0;) {
    w *= rules_[d].weights[static_cast<Eigen::Index>(j % n)];
    j /= n;
  }
  return w;
}

CollocationGrid gauss_grid(const Germ& germ, int nodes_per_dim) { return CollocationGrid(germ, nodes_per_dim); }

// ---------------------------------------------------------------- regression

namespace {
void check_regression_size(const PcBasis& basis, const CollocationGrid& grid) {
  if (grid.size() < basis.size())
    throw Error("collocation grid has fewer points than basis functions; increase nodes per dimension");
}
}  // namespace

PcExpansion::PcExpansion(PcBasis basis, const Germ& germ, const CollocationGrid& grid) : basis_(std::move(basis)) {
  check_regression_size(basis_, grid);
  const auto m = static_cast<Eigen::Index>(grid.size());
  const auto p = static_cast<Eigen::Index>(basis_.size());
  psi_.resize(m, p);
  Eigen::VectorXd xi(static_cast<Eigen::Index>(grid.dims()));
  for (Eigen::Index j = 0; j < m; ++j) {
    grid.point(static_cast<std::uint64_t>(j), std::span(xi.data(), grid.dims()));
    psi_.row(j) = eval_basis(basis_, germ, std::span<const double>(xi.data(), grid.dims())).transpose();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(psi_);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const double rmax = R.diagonal().cwiseAbs().maxCoeff();
  if (R.diagonal().cwiseAbs().minCoeff() <= 1e-12 * rmax)
    throw Error("regression matrix is rank deficient; increase nodes per dimension");
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(m, p);
  pinv_ = R.triangularView<Eigen::Upper>().solve(Q.transpose());
  weights_ = pinv_.row(0).transpose();
}

PcExpansion PcExpansion::weights_only(PcBasis basis, const Germ& germ, const CollocationGrid& grid) {
  check_regression_size(basis, grid);
  const auto p = static_cast<Eigen::Index>(basis.size());
  constexpr std::uint64_t kBlock = 4096;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd block;
  Eigen::VectorXd xi(static_cast<Eigen::Index>(grid.dims()));
  auto fill_block = [&](std::uint64_t first, std::uint64_t count) {
    block.resize(static_cast<Eigen::Index>(count), p);
    for (std::uint64_t r = 0; r < count; ++r) {
      grid.point(first + r, std::span(xi.data(), grid.dims()));
      block.row(static_cast<Eigen::Index>(r)) =
          eval_basis(basis, germ, std::span<const double>(xi.data(), grid.dims())).transpose();
    }
  };
  for (std::uint64_t first = 0; first < grid.size(); first += kBlock) {
    fill_block(first, std::min(kBlock, grid.size() - first));
    gram.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
  }
  gram = gram.selfadjointView<Eigen::Lower>();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw Error("regression matrix is rank deficient; increase nodes per dimension");
  const Eigen::VectorXd a = ldlt.solve(Eigen::VectorXd::Unit(p, 0));

  PcExpansion e;
  e.weights_.resize(static_cast<Eigen::Index>(grid.size()));
  for (std::uint64_t first = 0; first < grid.size(); first += kBlock) {
    const auto count = std::min(kBlock, grid.size() - first);
    fill_block(first, count);
    e.weights_.segment(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)) = block * a;
  }
  e.basis_ = std::move(basis);
  return e;
}

Eigen::VectorXd PcExpansion::fit(const Eigen::VectorXd& responses) const {
  if (!has_matrix()) throw Error("this expansion stores weights only; coefficients are unavailable");
  if (responses.size() != psi_.rows()) throw Error("response vector does not match the grid");
  return pinv_ * responses;
}

double PcExpansion::residual(const Eigen::VectorXd& responses) const {
  const Eigen::VectorXd r = psi_ * fit(responses) - responses;
  const double scale = responses.norm();
  return scale > 0.0 ? r.norm() / scale : r.norm();
}

Eigen::VectorXd fit_pce(const PcExpansion& expansion, const Eigen::VectorXd& responses) {
  return expansion.fit(responses);
}

// ---------------------------------------------------------------- estimators

double gpc_mean(const Eigen::VectorXd& c) { return c.size() ? c[0] : 0.0; }
double gpc_std(const Eigen::VectorXd& c) { return c.size() > 1 ? c.tail(c.size() - 1).norm() : 0.0; }

double gpc_mean_quadrature(const Eigen::VectorXd& W, const Eigen::VectorXd& responses) {
  if (W.size() != responses.size()) throw Error("weights and responses differ in length");
  return W.dot(responses);
}

double gpc_std_quadrature(const Eigen::VectorXd& W, const Eigen::VectorXd& responses, double mean, bool* clamped) {
  if (W.size() != responses.size()) throw Error("weights and responses differ in length");
  // Σ W (C−μ)² equals Σ W C² − μ² because Σ W = 1; the centered form loses less to cancellation
  const double var = W.dot((responses.array() - mean).square().matrix());
  if (clamped) *clamped = var < 0.0;
  return var > 0.0 ? std::sqrt(var) : 0.0;
}

Eigen::VectorXd gpc_sensitivity_mean(const Eigen::VectorXd& W, const Eigen::MatrixXd& dC) {
  if (W.size() != dC.cols()) throw Error("weights and gradient columns differ in length");
  return dC * W;
}

Eigen::VectorXd gpc_sensitivity_std(const Eigen::VectorXd& W, const Eigen::VectorXd& responses,
                                    const Eigen::MatrixXd& dC, double mean, double std,
                                    const Eigen::VectorXd& grad_mean) {
  if (W.size() != dC.cols() || W.size() != responses.size()) throw Error("gradient estimator size mismatch");
  if (!(std > 1e-12 * std::abs(mean))) return Eigen::VectorXd::Zero(dC.rows());
  const Eigen::VectorXd a = W.cwiseProduct((responses.array() - mean).matrix());
  // Σ W C ∂C − μ ∂μ = Σ W (C−μ) ∂C + μ (Σ W ∂C − ∂μ)
  return (dC * a + mean * (dC * W - grad_mean)) / std;
}

McEstimate mc_estimators(const Eigen::VectorXd& samples, const Eigen::MatrixXd* dC) {
  const auto n = samples.size();
  if (n < 1) throw Error("Monte Carlo estimators need samples");
  McEstimate r;
  r.mean = samples.mean();
  if (n >= 2) r.std = std::sqrt((samples.array() - r.mean).square().sum() / static_cast<double>(n - 1));
  if (dC) {
    if (dC->cols() != n) throw Error("gradient samples differ in count");
    r.grad_mean = dC->rowwise().sum() / static_cast<double>(n);
    if (n >= 2 && r.std > 1e-12 * std::abs(r.mean)) {
      const Eigen::VectorXd centered = (samples.array() - r.mean).matrix();
      r.grad_std = (*dC * centered) / (static_cast<double>(n - 1) * r.std);
    } else {
      r.grad_std = Eigen::VectorXd::Zero(dC->rows());
    }
  }
  return r;
}

Eigen::MatrixXd sample_germ(const Germ& germ, std::size_t count, std::uint64_t seed, std::size_t first) {
  const Philox rng(seed);
  Eigen::MatrixXd xi(static_cast<Eigen::Index>(germ.size()), static_cast<Eigen::Index>(count));
  for (std::size_t j = 0; j < count; ++j)
    for (std::size_t d = 0; d < germ.size(); ++d) {
      const double u = rng.uniform(d, first + j);
      xi(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j)) =
          germ.family(d) == PolyFamily::legendre ? 2.0 * u - 1.0 : normal_quantile(u);
    }
  return xi;
}

// ---------------------------------------------------------------- streaming moments

MomentAccumulator::MomentAccumulator(EstimatorKind kind, Eigen::Index gradient_size)
    : kind_(kind), g1_(Eigen::VectorXd::Zero(gradient_size)), h_(Eigen::VectorXd::Zero(gradient_size)) {}

void MomentAccumulator::add(double weight, double response) {
  if (!has_shift_) set_shift(response);
  const double d = response - shift_;
  s0_ += weight;
  s1_ += weight * d;
  s2_ += weight * d * d;
  ++count_;
}

void MomentAccumulator::add(double weight, double response, const Eigen::Ref<const Eigen::VectorXd>& gradient) {
  add(weight, response);
  g1_.noalias() += weight * gradient;
  h_.noalias() += (weight * (response - shift_)) * gradient;
}

void MomentAccumulator::merge(const MomentAccumulator& o) {
  if (o.count_ == 0) return;
  if (!has_shift_) set_shift(o.shift_);
  if (o.shift_ != shift_ || o.kind_ != kind_) throw Error("accumulators with different shifts cannot be merged");
  s0_ += o.s0_;
  s1_ += o.s1_;
  s2_ += o.s2_;
  g1_ += o.g1_;
  h_ += o.h_;
  count_ += o.count_;
}

double MomentAccumulator::mean() const {
  if (kind_ == EstimatorKind::gpc) return shift_ * s0_ + s1_;
  return shift_ + s1_ / static_cast<double>(count_);
}

double MomentAccumulator::variance_raw() const {
  const double dm = mean() - shift_;
  if (kind_ == EstimatorKind::gpc) return s2_ - 2.0 * dm * s1_ + dm * dm * s0_;
  if (count_ < 2) return 0.0;
  const auto n = static_cast<double>(count_);
  return (s2_ - n * dm * dm) / (n - 1.0);
}

double MomentAccumulator::std() const {
  const double v = variance_raw();
  return v > 0.0 ? std::sqrt(v) : 0.0;
}

bool MomentAccumulator::clamped() const { return variance_raw() < 0.0; }

Eigen::VectorXd MomentAccumulator::grad_mean() const {
  if (kind_ == EstimatorKind::gpc) return g1_;
  return g1_ / static_cast<double>(count_);
}

Eigen::VectorXd MomentAccumulator::grad_std() const {
  const double mu = mean(), sigma = std();
  if (!(sigma > 1e-12 * std::abs(mu))) return Eigen::VectorXd::Zero(g1_.size());
  const Eigen::VectorXd core = h_ + (shift_ - mu) * g1_;
  if (kind_ == EstimatorKind::gpc) return core / sigma;
  return core / ((static_cast<double>(count_) - 1.0) * sigma);
}

}  // namespace polyrto
