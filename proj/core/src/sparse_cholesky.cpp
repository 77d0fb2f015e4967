#include "polyrto/sparse_cholesky.hpp"

#include <cholmod.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "polyrto/error.hpp"

namespace polyrto {

namespace {
// rcond below this means a zero pivot lost in roundoff (rigid modes left in the system)
constexpr double kMinRcond = 1e-15;

void start_common(cholmod_common& c) {
  cholmod_start(&c);
  c.print = 0;
  c.nmethods = 1;
  c.method[0].ordering = CHOLMOD_AMD;
  c.postorder = 1;
  c.final_ll = 1;
  c.supernodal = CHOLMOD_SIMPLICIAL;
  c.error_handler = nullptr;
}
}  // namespace

struct SparseCholesky::Impl {
  cholmod_common common{};
  cholmod_sparse* a = nullptr;
  cholmod_factor* l = nullptr;
  bool factorized = false;

  Impl() { start_common(common); }
  ~Impl() { release(); cholmod_finish(&common); }

  void release() {
    if (l) cholmod_free_factor(&l, &common);
    if (a) cholmod_free_sparse(&a, &common);
    factorized = false;
  }

  // Locate the smallest relative pivot of a numerically singular factor.
  std::ptrdiff_t weakest_pivot() {
    cholmod_factor* f = cholmod_copy_factor(l, &common);
    if (!f) return -1;
    cholmod_change_factor(CHOLMOD_REAL, 1, 0, 1, 1, f, &common);
    const auto* p = static_cast<const int*>(f->p);
    const auto* x = static_cast<const double*>(f->x);
    const auto* perm = static_cast<const int*>(f->Perm);
    double dmax = 0.0;
    for (std::size_t j = 0; j < f->n; ++j) dmax = std::max(dmax, std::abs(x[p[j]]));
    std::ptrdiff_t worst = -1;
    double worst_val = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < f->n; ++j) {
      const double d = std::abs(x[p[j]]) / dmax;
      if (d < worst_val) {
        worst_val = d;
        worst = perm ? perm[j] : static_cast<std::ptrdiff_t>(j);
      }
    }
    cholmod_free_factor(&f, &common);
    return worst;
  }
};

SparseCholesky::SparseCholesky() : impl_(std::make_unique<Impl>()) {}
SparseCholesky::~SparseCholesky() = default;
SparseCholesky::SparseCholesky(SparseCholesky&&) noexcept = default;
SparseCholesky& SparseCholesky::operator=(SparseCholesky&&) noexcept = default;

void SparseCholesky::analyze(int n, std::span<const int> col_ptr, std::span<const int> row_idx) {
  auto& c = impl_->common;
  impl_->release();
  const std::size_t nnz = row_idx.size();
  impl_->a = cholmod_allocate_sparse(n, n, nnz, 1, 1, 1, CHOLMOD_REAL, &c);
  if (!impl_->a) throw Error("CHOLMOD could not allocate the matrix");
  std::memcpy(impl_->a->p, col_ptr.data(), sizeof(int) * (static_cast<std::size_t>(n) + 1));
  std::memcpy(impl_->a->i, row_idx.data(), sizeof(int) * nnz);
  std::fill_n(static_cast<double*>(impl_->a->x), nnz, 0.0);
  impl_->l = cholmod_analyze(impl_->a, &c);
  if (!impl_->l) throw Error("CHOLMOD symbolic analysis failed");
}

void SparseCholesky::factorize(std::span<const double> values) {
  auto& c = impl_->common;
  if (!impl_->a) throw Error("factorize called before analyze");
  if (values.size() != impl_->a->nzmax) throw Error("value array does not match the analyzed pattern");
  std::memcpy(impl_->a->x, values.data(), sizeof(double) * values.size());
  impl_->factorized = false;
  cholmod_factorize(impl_->a, impl_->l, &c);
  if (c.status == CHOLMOD_NOT_POSDEF) {
    const auto* perm = static_cast<const int*>(impl_->l->Perm);
    const std::ptrdiff_t minor = static_cast<std::ptrdiff_t>(impl_->l->minor);
    throw SingularMatrixError("stiffness matrix is not positive definite",
                              perm && minor < static_cast<std::ptrdiff_t>(impl_->l->n) ? perm[minor] : minor);
  }
  if (c.status != CHOLMOD_OK) throw Error("CHOLMOD factorization failed");
  const double rcond = cholmod_rcond(impl_->l, &c);
  if (!(rcond > kMinRcond))
    throw SingularMatrixError("stiffness matrix is numerically singular", impl_->weakest_pivot());
  impl_->factorized = true;
}

void SparseCholesky::compute(const Eigen::SparseMatrix<double>& a) {
  if (a.rows() != a.cols()) throw Error("matrix must be square");
  const int n = static_cast<int>(a.rows());
  std::vector<int> col_ptr(n + 1, 0), row_idx;
  std::vector<double> values;
  Eigen::SparseMatrix<double> csc = a;
  csc.makeCompressed();
  for (int j = 0; j < n; ++j) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(csc, j); it; ++it) {
      if (it.row() > j) continue;
      row_idx.push_back(static_cast<int>(it.row()));
      values.push_back(it.value());
    }
    col_ptr[j + 1] = static_cast<int>(row_idx.size());
  }
  analyze(n, col_ptr, row_idx);
  factorize(values);
}

Eigen::MatrixXd SparseCholesky::solve(const Eigen::MatrixXd& b) const {
  if (!impl_->factorized) throw Error("solve called before a successful factorization");
  if (b.rows() != rows()) throw Error("right-hand side has wrong length");
  cholmod_common c;
  start_common(c);
  cholmod_dense rhs{};
  rhs.nrow = static_cast<std::size_t>(b.rows());
  rhs.ncol = static_cast<std::size_t>(b.cols());
  rhs.nzmax = rhs.nrow * rhs.ncol;
  rhs.d = rhs.nrow;
  rhs.x = const_cast<double*>(b.data());
  rhs.xtype = CHOLMOD_REAL;
  rhs.dtype = CHOLMOD_DOUBLE;
  cholmod_dense* x = cholmod_solve(CHOLMOD_A, impl_->l, &rhs, &c);
  if (!x) {
    cholmod_finish(&c);
    throw Error("CHOLMOD solve failed");
  }
  Eigen::MatrixXd out = Eigen::Map<const Eigen::MatrixXd>(static_cast<const double*>(x->x), b.rows(), b.cols());
  cholmod_free_dense(&x, &c);
  cholmod_finish(&c);
  return out;
}

int SparseCholesky::rows() const noexcept { return impl_->a ? static_cast<int>(impl_->a->nrow) : 0; }

}  // namespace polyrto
