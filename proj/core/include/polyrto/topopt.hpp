#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "polyrto/mesh.hpp"

namespace polyrto {

/// Linear-hat density filter ρ̄ = P ρ with row-stochastic P.
class DensityFilter {
 public:
  DensityFilter() = default;
  DensityFilter(const PolyMesh& mesh, double radius);

  Eigen::VectorXd apply(const Eigen::VectorXd& rho) const { return P_ * rho; }
  /// Pᵀ g: pulls a gradient w.r.t. physical densities back to design variables.
  Eigen::VectorXd backward(const Eigen::VectorXd& g) const { return P_.transpose() * g; }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix() const noexcept { return P_; }
  double radius() const noexcept { return radius_; }

 private:
  Eigen::SparseMatrix<double, Eigen::RowMajor> P_;
  double radius_ = 0.0;
};

DensityFilter build_filter(const PolyMesh& mesh, double radius);

/// Σ ρ̄ₑ |Ωᵉ|
double volume(std::span<const double> physical, const PolyMesh& mesh);
/// ∂V/∂ρ = Pᵀ |Ω|
Eigen::VectorXd volume_sensitivity(const PolyMesh& mesh, const DensityFilter& filter);

/// Elements whose centroid lies within `rows` layers of the top of the mesh; a
/// layer is √(mean element area) thick.
std::vector<int> top_row_elements(const PolyMesh& mesh, int rows);

/// Design-to-physical map: density filter plus passive-solid elements (held at
/// ρ = ρ̄ = 1 and excluded from the design update).
class DesignMap {
 public:
  DesignMap(const PolyMesh& mesh, double filter_radius, std::vector<int> passive = {});

  std::size_t size() const noexcept { return areas_.size(); }
  Eigen::VectorXd physical(const Eigen::VectorXd& design) const;
  /// Gradient w.r.t. physical densities → gradient w.r.t. design variables (0 at passive entries).
  Eigen::VectorXd pullback(const Eigen::VectorXd& grad_physical) const;
  double volume(const Eigen::VectorXd& design) const;
  const Eigen::VectorXd& volume_gradient() const noexcept { return volume_gradient_; }
  double total_area() const noexcept { return total_area_; }
  const std::vector<char>& passive() const noexcept { return passive_; }
  const DensityFilter& filter() const noexcept { return filter_; }
  /// Uniform design (passive entries 1) whose volume equals `target`, clamped to [0,1].
  Eigen::VectorXd uniform_design(double target) const;

 private:
  DensityFilter filter_;
  Eigen::VectorXd areas_;
  Eigen::VectorXd volume_gradient_;
  std::vector<char> passive_;
  double total_area_ = 0.0;
};

/// Optimality-criteria update with bisection on the volume multiplier. The
/// returned design satisfies dVᵀρ = volume_target to 1e-6 relative.
Eigen::VectorXd oc_update(const Eigen::VectorXd& rho, const Eigen::VectorXd& dC, const Eigen::VectorXd& dV,
                          double volume_target, double move, const std::vector<char>& fixed = {});

struct MmaParams {
  double asyinit = 0.5;
  double asyincr = 1.2;
  double asydecr = 0.7;
  double albefa = 0.1;
  double raa0 = 1e-5;
};

/// Method of moving asymptotes for one inequality constraint g(x) ≤ 0; the
/// convex separable subproblem is solved through its one-dimensional dual.
class Mma {
 public:
  Mma(std::size_t n, MmaParams params = {});

  Eigen::VectorXd update(const Eigen::VectorXd& x, double f, const Eigen::VectorXd& df, double g,
                         const Eigen::VectorXd& dg, const Eigen::VectorXd& xmin, const Eigen::VectorXd& xmax,
                         double move);
  int iteration() const noexcept { return iteration_; }
  const Eigen::VectorXd& lower_asymptote() const noexcept { return low_; }
  const Eigen::VectorXd& upper_asymptote() const noexcept { return upp_; }

 private:
  MmaParams params_;
  int iteration_ = 0;
  Eigen::VectorXd xold1_, xold2_, low_, upp_;
};

enum class OptimizerKind { oc, mma };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::mma;
  double move = 0.2;
  int max_iterations = 150;
  double tolerance = 0.01;
  MmaParams mma;

  void validate() const;
};

struct Evaluation {
  double objective = 0.0;
  Eigen::VectorXd gradient;  // w.r.t. design variables
  double mean = 0.0;
  double std = 0.0;
};

struct HistoryRecord {
  int iteration = 0;
  double objective = 0.0;
  double mean = 0.0;
  double std = 0.0;
  double volume = 0.0;  // fraction of the domain area
  double change = 0.0;  // ‖ρ_k − ρ_{k−1}‖∞, 0 at the first iterate
};

struct OptimizationResult {
  Eigen::VectorXd design;
  Eigen::VectorXd physical;
  std::vector<HistoryRecord> history;
  Evaluation last;  // evaluation at the returned design
  int iterations = 0;  // number of evaluations, the last one at the returned design
  bool converged = false;
};

using Evaluator = std::function<Evaluation(const Eigen::VectorXd& design, int iteration)>;

/// Generic volume-constrained loop: evaluate, record, update until the design
/// change drops below the tolerance or the iteration budget is spent. The last
/// evaluation is always at the returned design.
OptimizationResult optimize(const DesignMap& map, double volume_fraction, const OptimizerConfig& config,
                            Eigen::VectorXd initial, const Evaluator& evaluate);

void write_history_csv(const std::vector<HistoryRecord>& history, std::ostream& out);

}  // namespace polyrto
