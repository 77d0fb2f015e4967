#include "polyrto/rto.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "polyrto/error.hpp"
#include "polyrto/parallel.hpp"

namespace polyrto {

namespace {

Eigen::VectorXd nodal_force(const PolyMesh& mesh, const std::vector<int>& nodes, const Vec2& force) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(mesh.num_nodes()));
  for (int n : nodes) {
    f[2 * n] += force.x();
    f[2 * n + 1] += force.y();
  }
  return f;
}

void check_variable(int var, std::size_t count) {
  if (var < 0 || static_cast<std::size_t>(var) >= count) throw Error("load references an undefined random variable");
}

// dense gPC matrices above this many entries fall back to streamed weights
constexpr double kDenseLimit = 5e7;

}  // namespace

// ---------------------------------------------------------------- loads

StochasticLoad::StochasticLoad(const PolyMesh& mesh, const BoundaryConditions& bcs, const LoadModel& model)
    : kind_(model.kind), baseline_(load_vector(mesh, bcs)) {
  switch (model.kind) {
    case LoadModel::Kind::deterministic:
      break;
    case LoadModel::Kind::random_magnitudes: {
      germ_ = Germ(model.variables);
      modes_.assign(model.variables.size(), Eigen::VectorXd::Zero(baseline_.size()));
      for (const auto& m : model.magnitudes) {
        check_variable(m.variable, model.variables.size());
        modes_[m.variable] += nodal_force(mesh, mesh.region(m.region), m.direction);
      }
      break;
    }
    case LoadModel::Kind::random_angles: {
      germ_ = Germ(model.variables);
      for (const auto& a : model.angles) {
        check_variable(a.variable, model.variables.size());
        angle_loads_.emplace_back(mesh.region(a.region), a);
      }
      break;
    }
    case LoadModel::Kind::random_field: {
      const auto& f = model.field;
      const auto& nodes = mesh.region(f.region);
      const auto edges = region_edges(mesh, nodes);
      if (edges.empty()) throw Error("field region '" + f.region + "' has no boundary edges");
      // abscissa along the dominant extent of the (straight) region
      Vec2 lo = mesh.nodes()[nodes[0]], hi = lo;
      for (int n : nodes) {
        lo = lo.cwiseMin(mesh.nodes()[n]);
        hi = hi.cwiseMax(mesh.nodes()[n]);
      }
      const int axis = (hi.x() - lo.x()) >= (hi.y() - lo.y()) ? 0 : 1;
      field_nodes_ = nodes;
      std::sort(field_nodes_.begin(), field_nodes_.end(),
                [&](int a, int b) { return mesh.nodes()[a][axis] < mesh.nodes()[b][axis]; });
      std::vector<int> slot(mesh.num_nodes(), -1);
      for (std::size_t i = 0; i < field_nodes_.size(); ++i) {
        slot[field_nodes_[i]] = static_cast<int>(i);
        field_grid_.push_back(mesh.nodes()[field_nodes_[i]][axis] - lo[axis]);
      }
      auto lump = [&](const Eigen::VectorXd& values) {
        return lump_line_load(mesh, edges, [&](int n) { return Vec2(values[slot[n]] * f.direction); });
      };
      const auto m = static_cast<Eigen::Index>(field_nodes_.size());
      baseline_ += lump(Eigen::VectorXd::Constant(m, f.mean));

      CorrelationModel cm;
      cm.kind = f.correlation;
      cm.sigma_f = f.sigma_f;
      cm.sigma_is_variance = f.sigma_is_variance;
      cm.l_corr = f.l_corr;
      cm.grid = field_grid_;
      if (f.fully_correlated) {
        cm.validate();
        germ_ = Germ({RandomVariableSpec::normal(0.0, 1.0, "field amplitude")});
        modes_.push_back(lump(Eigen::VectorXd::Constant(m, std::sqrt(cm.variance()))));
      } else {
        kl_ = kl_decompose(correlation_matrix(cm), f.tau, f.nu_kl);
        std::vector<RandomVariableSpec> vars;
        for (int k = 0; k < kl_.nu_kl; ++k) {
          vars.push_back(RandomVariableSpec::normal(0.0, 1.0, "kl mode " + std::to_string(k + 1)));
          modes_.push_back(lump(std::sqrt(kl_.eigenvalues[k]) * kl_.eigenvectors.col(k)));
        }
        germ_ = Germ(std::move(vars));
      }
      break;
    }
  }
}

Eigen::VectorXd StochasticLoad::realize(std::span<const double> x) const {
  if (x.size() != germ_.size()) throw Error("load parameters have wrong dimension");
  Eigen::VectorXd f = baseline_;
  for (std::size_t i = 0; i < modes_.size(); ++i) f += x[i] * modes_[i];
  for (const auto& [nodes, a] : angle_loads_) {
    const double rad = x[a.variable] * std::numbers::pi / 180.0;
    const Vec2 force(a.magnitude * std::cos(rad), a.magnitude * std::sin(rad));
    for (int n : nodes) {
      f[2 * n] += force.x();
      f[2 * n + 1] += force.y();
    }
  }
  return f;
}

Eigen::VectorXd StochasticLoad::realize_xi(std::span<const double> xi) const {
  const Eigen::VectorXd x = germ_.to_physical(xi);
  return realize(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

Eigen::VectorXd StochasticLoad::nominal() const {
  const Eigen::VectorXd x = germ_.nominal_physical();
  return realize(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

Eigen::VectorXd realize_load_vector(const StochasticLoad& loads, std::span<const double> physical) {
  return loads.realize(physical);
}

// ---------------------------------------------------------------- problem

void RtoProblem::validate() const {
  material.validate();
  simp.validate();
  optimizer.validate();
  if (!(volume_fraction > 0.0 && volume_fraction <= 1.0)) throw Error("volume fraction must lie in (0,1]");
  if (!(w >= 0.0)) throw Error("weight w must be non-negative");
  if (!(filter_radius >= 0.0)) throw Error("filter radius must be non-negative");
  if (p_pc < 0) throw Error("polynomial order must be non-negative");
  if (nodes_per_dim < 0) throw Error("nodes per dimension must be non-negative");
  if (chunk == 0) throw Error("solve chunk must be positive");
}

// ---------------------------------------------------------------- point sets

void PointSet::point(std::uint64_t j, std::span<double> xi) const {
  if (grid.size() > 0) {
    grid.point(j, xi);
    return;
  }
  for (std::size_t d = 0; d < xi.size(); ++d)
    xi[d] = samples(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j));
}

PointSet collocation_points(const Germ& germ, int p_pc, int nodes_per_dim) {
  PointSet ps;
  ps.kind = EstimatorKind::gpc;
  if (germ.size() == 0) return nominal_point(germ);
  ps.grid = gauss_grid(germ, nodes_per_dim > 0 ? nodes_per_dim : p_pc + 1);
  ps.size = ps.grid.size();
  PcBasis basis = multi_indices(static_cast<int>(germ.size()), p_pc);
  if (static_cast<double>(ps.size) * static_cast<double>(basis.size()) <= kDenseLimit)
    ps.weights = PcExpansion(std::move(basis), germ, ps.grid).weights();
  else
    ps.weights = PcExpansion::weights_only(std::move(basis), germ, ps.grid).weights();
  return ps;
}

PointSet monte_carlo_points(const Germ& germ, std::size_t count, std::uint64_t seed) {
  if (count < 2) throw Error("Monte Carlo needs at least two samples");
  PointSet ps;
  ps.kind = EstimatorKind::mc;
  ps.size = count;
  ps.samples = sample_germ(germ, count, seed);
  ps.weights = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(count));
  return ps;
}

PointSet nominal_point(const Germ& germ) {
  PointSet ps;
  ps.kind = EstimatorKind::gpc;
  ps.size = 1;
  ps.samples = germ.nominal_xi();
  ps.weights = Eigen::VectorXd::Ones(1);
  return ps;
}

// ---------------------------------------------------------------- estimation

RobustEstimate estimate(StiffnessSolver& solver, const Eigen::VectorXd& physical, const SimpParams& simp,
                        const StochasticLoad& loads, const PointSet& points, bool with_gradient, unsigned threads,
                        std::size_t chunk) {
  const auto ne = physical.size();
  solver.factorize(std::span<const double>(physical.data(), static_cast<std::size_t>(ne)), simp);
  Eigen::VectorXd dmod(ne);
  for (Eigen::Index e = 0; e < ne; ++e) dmod[e] = simp.modulus_derivative(physical[e]);

  const std::uint64_t n = points.size;
  const std::size_t dims = loads.germ().size();
  const std::size_t nchunks = static_cast<std::size_t>((n + chunk - 1) / chunk);
  RobustEstimate out;
  out.responses.resize(static_cast<Eigen::Index>(n));
  const Eigen::Index gsize = with_gradient ? ne : 0;

  auto run_chunk = [&](std::size_t c, MomentAccumulator& acc) {
    const std::uint64_t first = c * chunk;
    const auto count = static_cast<Eigen::Index>(std::min<std::uint64_t>(chunk, n - first));
    Eigen::MatrixXd F(solver.full_size(), count);
    std::vector<double> xi(dims);
    for (Eigen::Index k = 0; k < count; ++k) {
      points.point(first + static_cast<std::uint64_t>(k), xi);
      F.col(k) = loads.realize_xi(xi);
    }
    const Eigen::MatrixXd U = solver.solve(F);
    Eigen::VectorXd grad;
    for (Eigen::Index k = 0; k < count; ++k) {
      const std::uint64_t j = first + static_cast<std::uint64_t>(k);
      const double C = F.col(k).dot(U.col(k));
      out.responses[static_cast<Eigen::Index>(j)] = C;
      const double a = points.weights[static_cast<Eigen::Index>(j)];
      if (with_gradient) {
        grad = -dmod.cwiseProduct(solver.element_energies(U.col(k)));
        acc.add(a, C, grad);
      } else {
        acc.add(a, C);
      }
    }
  };

  // chunk 0 fixes the shift; the remaining chunks are reduced in index order
  MomentAccumulator total(points.kind, gsize);
  run_chunk(0, total);
  std::vector<MomentAccumulator> partial(nchunks > 1 ? nchunks - 1 : 0, MomentAccumulator(points.kind, gsize));
  for (auto& p : partial) p.set_shift(total.shift());
  parallel_for(partial.size(), threads, [&](std::size_t i) { run_chunk(i + 1, partial[i]); });
  for (const auto& p : partial) total.merge(p);

  out.mean = total.mean();
  out.std = total.std();
  out.clamped = total.clamped();
  if (with_gradient) {
    out.grad_mean = total.grad_mean();
    out.grad_std = total.grad_std();
  }
  return out;
}

// ---------------------------------------------------------------- evaluator

RobustEvaluator::RobustEvaluator(const RtoProblem& problem, RtoMode mode)
    : problem_(problem),
      mode_(mode),
      loads_(problem.mesh, problem.bcs, problem.loads),
      solver_(problem.mesh, problem.material, fixed_dofs(problem.mesh, problem.bcs), problem.threads),
      map_(problem.mesh, problem.filter_radius, problem.passive) {
  problem.validate();
  switch (mode) {
    case RtoMode::deterministic:
      points_ = nominal_point(loads_.germ());
      break;
    case RtoMode::gpc:
      points_ = collocation_points(loads_.germ(), problem.p_pc, problem.nodes_per_dim);
      break;
    case RtoMode::mc:
      points_ = monte_carlo_points(loads_.germ(), problem.n_mc, problem.seed);
      break;
  }
}

Evaluation RobustEvaluator::evaluate(const Eigen::VectorXd& design, int iteration) {
  const Eigen::VectorXd physical = map_.physical(design);
  last_ = estimate(solver_, physical, problem_.simp.at_iteration(iteration), loads_, points_, true,
                   problem_.threads, problem_.chunk);
  if (last_.clamped) ++clamped_;
  const double w = mode_ == RtoMode::deterministic ? 0.0 : problem_.w;
  Evaluation ev;
  ev.mean = last_.mean;
  ev.std = last_.std;
  ev.objective = last_.mean + w * last_.std;
  ev.gradient = map_.pullback(w != 0.0 ? Eigen::VectorXd(last_.grad_mean + w * last_.grad_std) : last_.grad_mean);
  return ev;
}

RobustEstimate RobustEvaluator::statistics(const Eigen::VectorXd& physical, const PointSet& points) {
  return estimate(solver_, physical, problem_.simp, loads_, points, false, problem_.threads, problem_.chunk);
}

Evaluation robust_objective_and_gradient(RobustEvaluator& evaluator, const Eigen::VectorXd& design) {
  return evaluator.evaluate(design, 0);
}

// ---------------------------------------------------------------- drivers

namespace {

RtoResult optimize_with(RobustEvaluator& ev, const RtoProblem& problem, RtoMode mode) {
  const auto& map = ev.design_map();
  OptimizationResult opt =
      optimize(map, problem.volume_fraction, problem.optimizer,
               map.uniform_design(problem.volume_fraction * map.total_area()),
               [&](const Eigen::VectorXd& design, int k) { return ev.evaluate(design, k); });
  RtoResult r;
  r.design = std::move(opt.design);
  r.physical = std::move(opt.physical);
  r.mean = opt.last.mean;
  r.std = opt.last.std;
  r.w = mode == RtoMode::deterministic ? 0.0 : problem.w;
  r.history = std::move(opt.history);
  r.responses = ev.last().responses;
  r.iterations = opt.iterations;
  r.converged = opt.converged;
  r.clamped_variance = ev.clamped_count();
  return r;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

RtoResult run_rto(const RtoProblem& problem, RtoMode mode) {
  const auto t0 = std::chrono::steady_clock::now();
  RobustEvaluator ev(problem, mode);
  RtoResult r = optimize_with(ev, problem, mode);
  r.fe_solves = ev.solver().solves();
  r.factorizations = ev.solver().factorizations();
  r.wall_seconds = seconds_since(t0);
  return r;
}

RtoResult deterministic_to(const RtoProblem& problem) { return run_rto(problem, RtoMode::deterministic); }

RtoResult run_nonrobust_then_propagate(const RtoProblem& problem, std::size_t n_mc, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  RobustEvaluator ev(problem, RtoMode::deterministic);
  RtoResult r = optimize_with(ev, problem, RtoMode::deterministic);
  const PointSet mc = monte_carlo_points(ev.loads().germ(), n_mc, seed);
  const RobustEstimate s = ev.statistics(r.physical, mc);
  r.mean = s.mean;
  r.std = s.std;
  r.w = 0.0;
  r.responses = s.responses;
  r.fe_solves = ev.solver().solves();
  r.factorizations = ev.solver().factorizations();
  r.wall_seconds = seconds_since(t0);
  return r;
}

}  // namespace polyrto
