#include <benchmark/benchmark.h>

#include "polyrto/config.hpp"
#include "polyrto/fem.hpp"
#include "polyrto/mesh.hpp"
#include "polyrto/rto.hpp"
#include "polyrto/stochastic.hpp"

using namespace polyrto;

namespace {

const PolyMesh& cantilever_mesh() {
  static const PolyMesh mesh = build_mesh(preset("cantilever-u20-small"), 1);
  return mesh;
}

const RtoProblem& cantilever_problem() {
  static const RtoProblem p = build_problem(preset("cantilever-u20-small"), cantilever_mesh());
  return p;
}

void BM_ElementStiffness(benchmark::State& state) {
  const PolyMesh& mesh = cantilever_mesh();
  const Material mat;
  std::size_t e = 0;
  for (auto _ : state) {
    const Polygon poly = mesh.element_polygon(e);
    benchmark::DoNotOptimize(element_stiffness(poly, mat));
    e = (e + 1) % mesh.num_elements();
  }
}
BENCHMARK(BM_ElementStiffness);

void BM_Cvt(benchmark::State& state) {
  const Domain2D d = Domain2D::rectangle(60.0, 30.0);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate_cvt(d, {n, 7, 20, MeshSymmetry::none}, 1));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Cvt)->Arg(450)->Arg(1800)->Unit(benchmark::kMillisecond)->Complexity();

void BM_AssembleFactorize(benchmark::State& state) {
  const RtoProblem& p = cantilever_problem();
  StiffnessSolver solver(p.mesh, p.material, fixed_dofs(p.mesh, p.bcs), 1);
  const std::vector<double> rho(p.mesh.num_elements(), 0.3);
  for (auto _ : state) solver.factorize(rho, p.simp);
}
BENCHMARK(BM_AssembleFactorize)->Unit(benchmark::kMillisecond);

// Right-hand sides per batched solve.
void BM_BatchedSolve(benchmark::State& state) {
  const RtoProblem& p = cantilever_problem();
  StiffnessSolver solver(p.mesh, p.material, fixed_dofs(p.mesh, p.bcs), 1);
  const std::vector<double> rho(p.mesh.num_elements(), 0.3);
  solver.factorize(rho, p.simp);
  const StochasticLoad loads(p.mesh, p.bcs, p.loads);
  const Eigen::MatrixXd F = loads.nominal().replicate(1, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(F));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BatchedSolve)->Arg(1)->Arg(8)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_RobustEvaluation(benchmark::State& state) {
  const RtoProblem& p = cantilever_problem();
  RobustEvaluator ev(p, RtoMode::gpc);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p.mesh.num_elements()), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(ev.evaluate(x, 0));
}
BENCHMARK(BM_RobustEvaluation)->Unit(benchmark::kMillisecond);

void BM_GpcWeights(benchmark::State& state) {
  const Germ germ(std::vector(static_cast<std::size_t>(state.range(0)), RandomVariableSpec::normal(0, 1)));
  const CollocationGrid grid = gauss_grid(germ, 3);
  for (auto _ : state) benchmark::DoNotOptimize(PcExpansion::weights_only(multi_indices(germ.size(), 2), germ, grid));
}
BENCHMARK(BM_GpcWeights)->Arg(3)->Arg(7)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
