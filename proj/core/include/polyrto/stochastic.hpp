#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace polyrto {

enum class Distribution { uniform, normal, gumbel };
enum class PolyFamily { legendre, hermite };

/// One independent input. Uniform uses (lo, hi); normal and Gumbel use (mean, std).
struct RandomVariableSpec {
  Distribution distribution = Distribution::uniform;
  double a = 0.0;
  double b = 1.0;
  std::string meaning;

  static RandomVariableSpec uniform(double lo, double hi, std::string meaning = {});
  static RandomVariableSpec normal(double mean, double std, std::string meaning = {});
  static RandomVariableSpec gumbel(double mean, double std, std::string meaning = {});

  PolyFamily family() const noexcept {
    return distribution == Distribution::uniform ? PolyFamily::legendre : PolyFamily::hermite;
  }
  double mean() const noexcept;
  /// Standardized germ coordinate → physical value.
  double to_physical(double xi) const;
  /// Germ coordinate of the distribution mean (physical nominal value).
  double nominal_xi() const;
  void validate() const;
};

/// Ordered list of independent germ variables ξ = (ξ₁, …, ξ_ν).
class Germ {
 public:
  Germ() = default;
  explicit Germ(std::vector<RandomVariableSpec> variables);

  std::size_t size() const noexcept { return vars_.size(); }
  const RandomVariableSpec& operator[](std::size_t i) const { return vars_[i]; }
  const std::vector<RandomVariableSpec>& variables() const noexcept { return vars_; }
  PolyFamily family(std::size_t i) const { return vars_[i].family(); }

  Eigen::VectorXd to_physical(std::span<const double> xi) const;
  Eigen::VectorXd nominal_xi() const;
  Eigen::VectorXd nominal_physical() const;

 private:
  std::vector<RandomVariableSpec> vars_;
};

Eigen::VectorXd to_physical(const Germ& germ, std::span<const double> xi);

/// Orthonormal polynomials ψ₀…ψ_pmax at x: Legendre w.r.t. the uniform
/// probability on [−1,1], Hermite (probabilists') w.r.t. the standard normal.
void orthonormal_polys(PolyFamily family, int pmax, double x, std::span<double> out);
double orthonormal_poly(PolyFamily family, int degree, double x);

/// Gauss rule with probability weights (Σw = 1) for the family's measure.
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussRule gauss_rule(PolyFamily family, int n);

/// Total-degree multi-index set in graded-lexicographic order.
class PcBasis {
 public:
  PcBasis() = default;
  PcBasis(int dims, int order);

  int dims() const noexcept { return dims_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return indices_.size(); }
  const std::vector<std::vector<int>>& indices() const noexcept { return indices_; }
  const std::vector<int>& operator[](std::size_t n) const { return indices_[n]; }

 private:
  int dims_ = 0;
  int order_ = 0;
  std::vector<std::vector<int>> indices_;
};

PcBasis multi_indices(int nu_rv, int p_pc);
/// binom(nu_rv + p_pc, p_pc) without enumerating.
std::uint64_t basis_size(int nu_rv, int p_pc);

/// ψ_n(ξ) for every multi-index n.
Eigen::VectorXd eval_basis(const PcBasis& basis, const Germ& germ, std::span<const double> xi);

/// Tensor-product Gauss grid in standardized germ space. Points are generated
/// on demand (mixed-radix enumeration), so huge grids cost nothing to create.
class CollocationGrid {
 public:
  CollocationGrid() = default;
  CollocationGrid(const Germ& germ, int nodes_per_dim);

  std::uint64_t size() const noexcept { return size_; }
  std::size_t dims() const noexcept { return rules_.size(); }
  int nodes_per_dim() const noexcept { return nodes_per_dim_; }
  /// Germ coordinates of point j (first dimension varies slowest).
  Eigen::VectorXd point(std::uint64_t j) const;
  void point(std::uint64_t j, std::span<double> out) const;
  /// Tensor Gauss weight of point j.
  double weight(std::uint64_t j) const;
  const GaussRule& rule(std::size_t dim) const { return rules_[dim]; }

 private:
  std::vector<GaussRule> rules_;
  int nodes_per_dim_ = 0;
  std::uint64_t size_ = 0;
};

CollocationGrid gauss_grid(const Germ& germ, int nodes_per_dim);

/// Regression gPC on a collocation grid: Ψ, its pseudoinverse, and the
/// quadrature weights W (first row of Ψ†).
class PcExpansion {
 public:
  /// Dense path: stores Ψ and Ψ† (QR based). Throws on rank deficiency.
  PcExpansion(PcBasis basis, const Germ& germ, const CollocationGrid& grid);

  /// Weights only, streamed normal equations; for grids too large for a dense Ψ.
  static PcExpansion weights_only(PcBasis basis, const Germ& germ, const CollocationGrid& grid);

  const PcBasis& basis() const noexcept { return basis_; }
  bool has_matrix() const noexcept { return psi_.size() > 0; }
  const Eigen::MatrixXd& psi() const noexcept { return psi_; }
  const Eigen::MatrixXd& pinv() const noexcept { return pinv_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }

  /// Least-squares coefficients u = Ψ† U.
  Eigen::VectorXd fit(const Eigen::VectorXd& responses) const;
  /// ‖Ψu − U‖ / ‖U‖ of the fit.
  double residual(const Eigen::VectorXd& responses) const;

 private:
  PcExpansion() = default;
  PcBasis basis_;
  Eigen::MatrixXd psi_;
  Eigen::MatrixXd pinv_;
  Eigen::VectorXd weights_;
};

Eigen::VectorXd fit_pce(const PcExpansion& expansion, const Eigen::VectorXd& responses);

double gpc_mean(const Eigen::VectorXd& coefficients);
double gpc_std(const Eigen::VectorXd& coefficients);
double gpc_mean_quadrature(const Eigen::VectorXd& W, const Eigen::VectorXd& responses);
/// (Σ W C² − μ²)^{1/2}; a negative radicand is clamped to 0 and reported through `clamped`.
double gpc_std_quadrature(const Eigen::VectorXd& W, const Eigen::VectorXd& responses, double mean,
                          bool* clamped = nullptr);

/// dC has one column per grid point (rows = design variables).
Eigen::VectorXd gpc_sensitivity_mean(const Eigen::VectorXd& W, const Eigen::MatrixXd& dC);
Eigen::VectorXd gpc_sensitivity_std(const Eigen::VectorXd& W, const Eigen::VectorXd& responses,
                                    const Eigen::MatrixXd& dC, double mean, double std,
                                    const Eigen::VectorXd& grad_mean);

struct McEstimate {
  double mean = 0.0;
  double std = 0.0;
  Eigen::VectorXd grad_mean;
  Eigen::VectorXd grad_std;
};

/// Sample mean, unbiased standard deviation and, if dC is given, their gradients.
McEstimate mc_estimators(const Eigen::VectorXd& samples, const Eigen::MatrixXd* dC = nullptr);

/// Standardized germ realizations (dims × count) from a counter-based stream.
Eigen::MatrixXd sample_germ(const Germ& germ, std::size_t count, std::uint64_t seed, std::size_t first = 0);

enum class EstimatorKind { gpc, mc };

/// Streaming mean/std and gradient estimator. Points arrive in a fixed order
/// (weights a_j = W_j for gPC, 1 for MC); sums are shifted by the first
/// response to keep the variance well conditioned.
class MomentAccumulator {
 public:
  MomentAccumulator(EstimatorKind kind, Eigen::Index gradient_size);

  void add(double weight, double response, const Eigen::Ref<const Eigen::VectorXd>& gradient);
  void add(double weight, double response);
  /// Merges a partial accumulator built with the same shift (see `shift`).
  void merge(const MomentAccumulator& other);
  void set_shift(double s) { shift_ = s; has_shift_ = true; }
  double shift() const noexcept { return shift_; }
  bool has_shift() const noexcept { return has_shift_; }

  std::uint64_t count() const noexcept { return count_; }
  double mean() const;
  double std() const;
  bool clamped() const;
  Eigen::VectorXd grad_mean() const;
  /// 0 when σ < 1e-12 |μ|.
  Eigen::VectorXd grad_std() const;

 private:
  double variance_raw() const;
  EstimatorKind kind_;
  double shift_ = 0.0;
  bool has_shift_ = false;
  std::uint64_t count_ = 0;
  double s0_ = 0.0, s1_ = 0.0, s2_ = 0.0;
  Eigen::VectorXd g1_, h_;
};

}  // namespace polyrto
