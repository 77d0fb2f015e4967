#pragma once

#include <atomic>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "polyrto/mesh.hpp"
#include "polyrto/simp.hpp"
#include "polyrto/sparse_cholesky.hpp"

namespace polyrto {

enum class PlaneAssumption { stress, strain };

struct Material {
  double E0 = 1.0;
  double nu = 0.3;
  double Emin = 1e-9;
  PlaneAssumption plane = PlaneAssumption::stress;

  Eigen::Matrix3d elasticity() const;
  double eps() const { return Emin / E0; }
  void validate() const;
};

/// Generalized barycentric coordinates and their gradients at one point.
struct ShapeFunctions {
  Eigen::VectorXd value;
  Eigen::Matrix<double, Eigen::Dynamic, 2> gradient;
};

ShapeFunctions wachspress(std::span<const Vec2> poly, const Vec2& x);
ShapeFunctions mean_value(std::span<const Vec2> poly, const Vec2& x);

enum class ShapeKind { automatic, wachspress, mean_value };

/// Solid element stiffness (2k × 2k, dof order x0 y0 x1 y1 ...). Centroid-fan
/// triangulation with a 3-point rule per triangle; gradients are corrected so
/// their element integral matches the exact boundary integral, which makes the
/// element pass the patch test.
Eigen::MatrixXd element_stiffness(std::span<const Vec2> poly, const Material& material,
                                  ShapeKind kind = ShapeKind::automatic);

std::vector<Eigen::MatrixXd> element_stiffnesses(const PolyMesh& mesh, const Material& material,
                                                 unsigned threads = 0);

struct FixedSupport {
  std::string region;
  bool x = true;
  bool y = true;
};

/// Force applied at every node of the region (point regions resolve to one node).
struct PointLoad {
  std::string region;
  Vec2 force = Vec2::Zero();
};

struct DistributedLoad {
  std::string region;
  std::function<Vec2(const Vec2&)> load_per_length;
};

struct BoundaryConditions {
  std::vector<FixedSupport> fixed;
  std::vector<PointLoad> point_loads;
  std::vector<DistributedLoad> distributed;
};

/// Sorted, unique constrained dof indices (2·node + component).
std::vector<int> fixed_dofs(const PolyMesh& mesh, const BoundaryConditions& bcs);

/// Nominal load vector of the point and distributed loads.
Eigen::VectorXd load_vector(const PolyMesh& mesh, const BoundaryConditions& bcs);

/// Boundary edges whose two end nodes both belong to `region_nodes`.
std::vector<Edge> region_edges(const PolyMesh& mesh, const std::vector<int>& region_nodes);

/// Trapezoidal lumping of a line load given per node (load per length) along
/// the boundary edges of the region. Returns a full-length force vector.
Eigen::VectorXd lump_line_load(const PolyMesh& mesh, const std::vector<Edge>& edges,
                               const std::function<Vec2(int node)>& load_at_node);

Eigen::SparseMatrix<double> assemble(const PolyMesh& mesh, std::span<const Eigen::MatrixXd> element_k,
                                     std::span<const double> densities, const SimpParams& simp);

/// Reduced system after eliminating constrained dofs.
struct LinearSystem {
  Eigen::SparseMatrix<double> K;
  Eigen::VectorXd F;
  std::vector<int> free_dofs;
  Eigen::Index full_size = 0;
};

LinearSystem apply_bcs(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& F, std::span<const int> fixed);

/// Full-length displacement (zeros at constrained dofs).
Eigen::VectorXd solve(const LinearSystem& system);

double compliance(const Eigen::VectorXd& F, const Eigen::VectorXd& U);

/// ∂C/∂ρ̄ₑ = −(∂E/∂ρ̄ₑ) uₑᵀ k⁰ₑ uₑ
Eigen::VectorXd compliance_sensitivity(const PolyMesh& mesh, std::span<const Eigen::MatrixXd> element_k,
                                       std::span<const double> densities, const Eigen::VectorXd& U,
                                       const SimpParams& simp);

/// Assembly + factorization with a precomputed reduced sparsity pattern; the
/// workhorse of the optimization loops. One factorization serves any number of
/// load cases.
class StiffnessSolver {
 public:
  StiffnessSolver(const PolyMesh& mesh, const Material& material, std::vector<int> fixed, unsigned threads = 0);

  void factorize(std::span<const double> densities, const SimpParams& simp);
  /// Columns of `loads` are full-length force vectors; returns full-length displacements.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& loads) const;
  /// uₑᵀ k⁰ₑ uₑ for every element.
  Eigen::VectorXd element_energies(const Eigen::Ref<const Eigen::VectorXd>& u) const;

  const std::vector<Eigen::MatrixXd>& element_matrices() const noexcept { return element_k_; }
  Eigen::Index full_size() const noexcept { return full_size_; }
  std::size_t factorizations() const noexcept { return factorizations_; }
  std::size_t solves() const noexcept { return solves_.load(); }

 private:
  const PolyMesh* mesh_;
  std::vector<Eigen::MatrixXd> element_k_;
  std::vector<std::vector<int>> element_dofs_;
  std::vector<int> reduced_of_full_;
  std::vector<int> full_of_reduced_;
  std::vector<std::vector<int>> scatter_;
  std::vector<int> col_ptr_, row_idx_;
  std::vector<double> values_;
  SparseCholesky chol_;
  Eigen::Index full_size_ = 0;
  std::size_t factorizations_ = 0;
  mutable std::atomic<std::size_t> solves_{0};
};

}  // namespace polyrto
