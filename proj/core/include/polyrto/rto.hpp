#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "polyrto/fem.hpp"
#include "polyrto/mesh.hpp"
#include "polyrto/randfield.hpp"
#include "polyrto/simp.hpp"
#include "polyrto/stochastic.hpp"
#include "polyrto/topopt.hpp"

namespace polyrto {

/// How the random germ enters the load vector. Baseline loads from the
/// boundary conditions are always added.
struct LoadModel {
  enum class Kind { deterministic, random_magnitudes, random_angles, random_field };

  /// Force `direction · x_var` at every node of `region`.
  struct Magnitude {
    std::string region;
    Vec2 direction = Vec2(0.0, -1.0);
    int variable = 0;
  };
  /// Force `magnitude · (cos x_var, sin x_var)` with x_var in degrees.
  struct Angle {
    std::string region;
    double magnitude = 1.0;
    int variable = 0;
  };
  /// Gaussian load-per-length field along a straight boundary region.
  struct Field {
    std::string region;
    Vec2 direction = Vec2(0.0, -1.0);
    double mean = 1.0;
    CorrelationModel::Kind correlation = CorrelationModel::Kind::exponential;
    double sigma_f = 0.09;
    bool sigma_is_variance = true;
    double l_corr = 1.0;
    /// One standard normal variable scaling the whole field (bypasses KL).
    bool fully_correlated = false;
    int nu_kl = 0;  // > 0 pins the number of KL terms
    double tau = 0.9;
  };

  Kind kind = Kind::deterministic;
  std::vector<RandomVariableSpec> variables;  // magnitudes and angles
  std::vector<Magnitude> magnitudes;
  std::vector<Angle> angles;
  Field field;
};

/// Load model bound to a mesh: the germ it induces and F(x) for physical parameters x.
class StochasticLoad {
 public:
  StochasticLoad(const PolyMesh& mesh, const BoundaryConditions& bcs, const LoadModel& model);

  const Germ& germ() const noexcept { return germ_; }
  LoadModel::Kind kind() const noexcept { return kind_; }
  Eigen::VectorXd realize(std::span<const double> physical) const;
  Eigen::VectorXd realize_xi(std::span<const double> xi) const;
  Eigen::VectorXd nominal() const;
  /// KL data of a random-field model (empty otherwise).
  const KlBasis& kl() const noexcept { return kl_; }
  /// Abscissae of the loaded nodes along the field region.
  const std::vector<double>& field_grid() const noexcept { return field_grid_; }
  const std::vector<int>& field_nodes() const noexcept { return field_nodes_; }

 private:
  LoadModel::Kind kind_;
  Germ germ_;
  Eigen::VectorXd baseline_;
  std::vector<Eigen::VectorXd> modes_;  // linear models: F = baseline + Σ x_i modes_i
  std::vector<std::pair<std::vector<int>, LoadModel::Angle>> angle_loads_;
  KlBasis kl_;
  std::vector<double> field_grid_;
  std::vector<int> field_nodes_;
};

/// realize_load_vector for one germ point in physical units.
Eigen::VectorXd realize_load_vector(const StochasticLoad& loads, std::span<const double> physical);

enum class RtoMode { deterministic, gpc, mc };

struct RtoProblem {
  PolyMesh mesh;
  Material material;
  BoundaryConditions bcs;
  LoadModel loads;
  SimpParams simp;
  double filter_radius = 1.5;
  double volume_fraction = 0.3;
  double w = 1.0;
  int p_pc = 5;
  int nodes_per_dim = 0;  // 0 → p_pc + 1
  std::size_t n_mc = 10000;
  std::uint64_t seed = 1;
  OptimizerConfig optimizer;
  std::vector<int> passive;
  unsigned threads = 0;
  std::size_t chunk = 32;  // right-hand sides per batched solve

  void validate() const;
};

/// Germ points and estimator weights for one propagation mode.
struct PointSet {
  EstimatorKind kind = EstimatorKind::gpc;
  std::uint64_t size = 0;
  Eigen::VectorXd weights;     // W_j (gPC) or 1 (MC)
  CollocationGrid grid;        // gPC points
  Eigen::MatrixXd samples;     // MC / deterministic points, one column each
  void point(std::uint64_t j, std::span<double> xi) const;
};

PointSet collocation_points(const Germ& germ, int p_pc, int nodes_per_dim);
PointSet monte_carlo_points(const Germ& germ, std::size_t count, std::uint64_t seed);
PointSet nominal_point(const Germ& germ);

struct RobustEstimate {
  double mean = 0.0;
  double std = 0.0;
  bool clamped = false;
  Eigen::VectorXd responses;   // per-point compliance
  Eigen::VectorXd grad_mean;   // w.r.t. physical densities
  Eigen::VectorXd grad_std;
};

/// Factorize K(ρ̄) once, solve every point in batches and reduce the
/// estimators in point order.
RobustEstimate estimate(StiffnessSolver& solver, const Eigen::VectorXd& physical, const SimpParams& simp,
                        const StochasticLoad& loads, const PointSet& points, bool with_gradient,
                        unsigned threads = 0, std::size_t chunk = 32);

/// Everything an optimization run needs, built once.
class RobustEvaluator {
 public:
  RobustEvaluator(const RtoProblem& problem, RtoMode mode);

  /// (C̃, μ̂, σ̂, ∂C̃/∂ρ) at a design, with the SIMP schedule at `iteration`.
  Evaluation evaluate(const Eigen::VectorXd& design, int iteration);
  RobustEstimate statistics(const Eigen::VectorXd& physical, const PointSet& points);

  const DesignMap& design_map() const noexcept { return map_; }
  const StochasticLoad& loads() const noexcept { return loads_; }
  const PointSet& points() const noexcept { return points_; }
  StiffnessSolver& solver() noexcept { return solver_; }
  const RobustEstimate& last() const noexcept { return last_; }
  std::size_t clamped_count() const noexcept { return clamped_; }

 private:
  const RtoProblem& problem_;
  RtoMode mode_;
  StochasticLoad loads_;
  StiffnessSolver solver_;
  DesignMap map_;
  PointSet points_;
  RobustEstimate last_;
  std::size_t clamped_ = 0;
};

/// robust_objective_and_gradient: C̃ = μ̂ + w σ̂ and its gradient w.r.t. design variables.
Evaluation robust_objective_and_gradient(RobustEvaluator& evaluator, const Eigen::VectorXd& design);

struct RtoResult {
  Eigen::VectorXd design;
  Eigen::VectorXd physical;
  double mean = 0.0;
  double std = 0.0;
  double w = 0.0;
  std::vector<HistoryRecord> history;
  Eigen::VectorXd responses;  // per-point compliance at the final design
  int iterations = 0;
  bool converged = false;
  std::size_t fe_solves = 0;
  std::size_t factorizations = 0;
  std::size_t clamped_variance = 0;
  double wall_seconds = 0.0;
};

RtoResult run_rto(const RtoProblem& problem, RtoMode mode);
/// Deterministic optimization at the nominal load (w ignored).
RtoResult deterministic_to(const RtoProblem& problem);
/// Deterministic design, then Monte Carlo propagation of the germ through it.
RtoResult run_nonrobust_then_propagate(const RtoProblem& problem, std::size_t n_mc, std::uint64_t seed);

}  // namespace polyrto
