#pragma once

#include <memory>
#include <span>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace polyrto {

/// Sparse Cholesky (CHOLMOD, simplicial LLᵀ) for SPD systems whose sparsity pattern
/// is fixed while values change: analyze once, factorize per design, then solve
/// any number of right-hand sides against the immutable factor.
class SparseCholesky {
 public:
  SparseCholesky();
  ~SparseCholesky();
  SparseCholesky(SparseCholesky&&) noexcept;
  SparseCholesky& operator=(SparseCholesky&&) noexcept;
  SparseCholesky(const SparseCholesky&) = delete;
  SparseCholesky& operator=(const SparseCholesky&) = delete;

  /// Upper-triangular CSC pattern (row <= col), rows sorted within each column.
  void analyze(int n, std::span<const int> col_ptr, std::span<const int> row_idx);
  /// Numeric factorization. Throws SingularMatrixError with the offending pivot
  /// (original row index) when the matrix is not numerically positive definite.
  void factorize(std::span<const double> values);
  /// analyze + factorize from a full symmetric matrix (only the upper triangle is read).
  void compute(const Eigen::SparseMatrix<double>& a);

  /// Safe to call concurrently once factorized.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  int rows() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace polyrto
