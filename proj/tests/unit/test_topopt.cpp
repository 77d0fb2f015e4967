#include <doctest.h>

#include <random>
#include <sstream>

#include "polyrto/error.hpp"
#include "polyrto/topopt.hpp"
#include "support.hpp"

using namespace polyrto;
using Eigen::VectorXd;

namespace {

// minimize Σ cᵢ/ρᵢ subject to Σ aᵢρᵢ = V: ρᵢ = V √(cᵢ/aᵢ) / Σ √(cⱼaⱼ)
VectorXd reciprocal_optimum(const VectorXd& c, const VectorXd& a, double V) {
  return V * (c.array() / a.array()).sqrt() / (c.array() * a.array()).sqrt().sum();
}

}  // namespace

TEST_SUITE("topopt") {

TEST_CASE("filter matches a brute-force hat filter") {
  const PolyMesh mesh = generate_cvt_mesh(Domain2D::rectangle(3.0, 2.0), 150, 5, 10);
  const double r = 0.45;
  const DensityFilter f(mesh, r);
  const Eigen::MatrixXd P(f.matrix());
  const auto& c = mesh.centroids();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    double sum = 0.0;
    for (std::size_t g = 0; g < mesh.num_elements(); ++g) sum += std::max(0.0, r - (c[e] - c[g]).norm());
    for (std::size_t g = 0; g < mesh.num_elements(); ++g)
      CHECK(P(e, g) == doctest::Approx(std::max(0.0, r - (c[e] - c[g]).norm()) / sum).epsilon(1e-12));
  }
  CHECK((P.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);
  CHECK(P.minCoeff() >= 0.0);
}

TEST_CASE("filter backward is the adjoint of apply") {
  const PolyMesh mesh = generate_cvt_mesh(Domain2D::rectangle(2.0, 1.0), 80, 1, 10);
  const DensityFilter f(mesh, 0.3);
  std::mt19937 gen(1);
  std::normal_distribution<double> n;
  VectorXd x(mesh.num_elements()), y(mesh.num_elements());
  for (auto& v : x) v = n(gen);
  for (auto& v : y) v = n(gen);
  CHECK(f.apply(x).dot(y) == doctest::Approx(x.dot(f.backward(y))).epsilon(1e-13));
  // zero radius is the identity
  const DensityFilter id(mesh, 0.0);
  CHECK(id.apply(x) == x);
  CHECK_THROWS_AS(DensityFilter(mesh, -1.0), Error);
}

TEST_CASE("volume gradient") {
  const PolyMesh mesh = generate_cvt_mesh(Domain2D::rectangle(2.0, 1.0), 50, 2, 10);
  const DesignMap map(mesh, 0.4);
  VectorXd rho = VectorXd::Constant(50, 0.3);
  rho[7] = 0.9;
  const VectorXd dV = map.volume_gradient();
  // volume is affine: V(ρ + δ) − V(ρ) = dV·δ exactly
  VectorXd delta = VectorXd::Zero(50);
  delta[7] = 0.05;
  delta[20] = -0.1;
  CHECK(map.volume(rho + delta) - map.volume(rho) == doctest::Approx(dV.dot(delta)).epsilon(1e-12));
  CHECK(map.volume(VectorXd::Ones(50)) == doctest::Approx(2.0));
  CHECK(map.volume(map.uniform_design(0.7)) == doctest::Approx(0.7));
}

TEST_CASE("passive elements stay solid and receive no gradient") {
  const PolyMesh mesh = generate_cvt_mesh(Domain2D::rectangle(4.0, 2.0), 100, 3, 20);
  const auto top = top_row_elements(mesh, 2);
  REQUIRE(!top.empty());
  for (int e : top) CHECK(mesh.centroids()[e].y() > 2.0 - 2.0 * std::sqrt(0.08) - 1e-12);
  const DesignMap map(mesh, 0.5, top);
  const VectorXd phys = map.physical(VectorXd::Zero(100));
  for (int e : top) CHECK(phys[e] == 1.0);
  const VectorXd g = map.pullback(VectorXd::Ones(100));
  for (int e : top) CHECK(g[e] == 0.0);
  const VectorXd u = map.uniform_design(0.8);
  for (int e : top) CHECK(u[e] == 1.0);
  // passive rows alone exceed 0.8, so the free entries drop to 0
  CHECK(u.minCoeff() == 0.0);
  CHECK(map.volume(map.uniform_design(6.4)) == doctest::Approx(6.4));
}

TEST_CASE("OC reaches the analytic optimum of a three-element problem") {
  const VectorXd c = (VectorXd(3) << 1, 4, 2).finished();
  const VectorXd a = (VectorXd(3) << 1, 1, 2).finished();
  const double V = 1.2;
  VectorXd rho = VectorXd::Constant(3, 0.4);
  for (int k = 0; k < 200; ++k) {
    const VectorXd dC = -c.array() / rho.array().square();
    rho = oc_update(rho, dC, a, V, 0.2);
    CHECK(a.dot(rho) == doctest::Approx(V).epsilon(1e-6));
  }
  const VectorXd expected = reciprocal_optimum(c, a, V);
  CHECK(expected.isApprox((VectorXd(3) << 0.24, 0.48, 0.24).finished()));
  CHECK((rho - expected).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("OC respects move limits, bounds and fixed entries") {
  const VectorXd rho = VectorXd::Constant(4, 0.5);
  const VectorXd dC = (VectorXd(4) << -100, -1e-6, -1, -1).finished();
  const VectorXd dV = VectorXd::Ones(4);
  const std::vector<char> fixed = {0, 0, 0, 1};
  const VectorXd next = oc_update(rho, dC, dV, 2.0, 0.1, fixed);
  CHECK(next[3] == 0.5);
  CHECK((next - rho).cwiseAbs().maxCoeff() <= 0.1 + 1e-15);
  CHECK(next.minCoeff() >= 0.0);
  CHECK(dV.dot(next) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("MMA on the three-element problem") {
  const VectorXd c = (VectorXd(3) << 1, 4, 2).finished();
  const VectorXd a = (VectorXd(3) << 1, 1, 2).finished();
  const double V = 1.2;
  Mma mma(3);
  VectorXd x = VectorXd::Constant(3, 0.3);
  const VectorXd lo = VectorXd::Constant(3, 1e-3), hi = VectorXd::Ones(3);
  for (int k = 0; k < 150; ++k) {
    const double f = (c.array() / x.array()).sum();
    const VectorXd df = -c.array() / x.array().square();
    x = mma.update(x, f, df, a.dot(x) / V - 1.0, a / V, lo, hi, 0.2);
    CHECK(mma.lower_asymptote().size() == 3);
    CHECK((mma.lower_asymptote().array() < x.array()).all());
    CHECK((mma.upper_asymptote().array() > x.array()).all());
  }
  CHECK(mma.iteration() == 150);
  CHECK((x - reciprocal_optimum(c, a, V)).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("MMA in one dimension: interior minimum and active constraint") {
  const VectorXd lo = VectorXd::Zero(1), hi = VectorXd::Ones(1);
  VectorXd x = VectorXd::Constant(1, 0.9);
  Mma free(1);
  for (int k = 0; k < 60; ++k) {
    const double f = std::pow(x[0] - 0.3, 2);
    x = free.update(x, f, VectorXd::Constant(1, 2 * (x[0] - 0.3)), -1.0, VectorXd::Zero(1), lo, hi, 0.5);
  }
  // without an inner conservative loop MMA settles within the asymptote floor 0.01 (xmax − xmin)
  CHECK(std::abs(x[0] - 0.3) <= 0.01);

  // min (x − 2)² with x ≤ 0.6
  x[0] = 0.1;
  Mma bound(1);
  for (int k = 0; k < 60; ++k) {
    const double f = std::pow(x[0] - 2.0, 2);
    x = bound.update(x, f, VectorXd::Constant(1, 2 * (x[0] - 2.0)), x[0] / 0.6 - 1.0, VectorXd::Constant(1, 1 / 0.6),
                     lo, hi, 0.2);
  }
  CHECK(x[0] == doctest::Approx(0.6).epsilon(1e-6));
}

TEST_CASE("optimize loop: both optimizers, bookkeeping and iteration cap") {
  // three equal elements of area 1/3, no filter
  const PolyMesh mesh = test::quad_mesh(3, 1, 1.0, 1.0);
  const DesignMap map(mesh, 0.0);
  const VectorXd c = (VectorXd(3) << 1, 4, 9).finished();
  int calls = 0;
  Evaluator eval = [&](const VectorXd& design, int) {
    ++calls;
    const VectorXd phys = map.physical(design);
    Evaluation ev;
    ev.objective = (c.array() / phys.array()).sum();
    ev.mean = ev.objective;
    ev.gradient = map.pullback(-c.array() / phys.array().square());
    return ev;
  };
  const VectorXd expected = (VectorXd(3) << 0.2, 0.4, 0.6).finished();
  for (OptimizerKind kind : {OptimizerKind::oc, OptimizerKind::mma}) {
    CAPTURE(static_cast<int>(kind));
    OptimizerConfig cfg;
    cfg.kind = kind;
    cfg.tolerance = 1e-7;
    cfg.max_iterations = 500;
    calls = 0;
    const auto r = optimize(map, 0.4, cfg, map.uniform_design(0.4), eval);
    CHECK(r.converged);
    CHECK(r.iterations == calls);
    CHECK(r.history.size() == static_cast<std::size_t>(r.iterations));
    CHECK((r.design - expected).cwiseAbs().maxCoeff() < 1e-5);
    CHECK(r.last.objective == eval(r.design, 0).objective);
    CHECK(r.history.back().volume == doctest::Approx(0.4).epsilon(1e-5));
    CHECK(r.history.front().change == 0.0);
  }

  OptimizerConfig capped;
  capped.max_iterations = 3;
  const auto r = optimize(map, 0.4, capped, map.uniform_design(0.4), eval);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);

  std::ostringstream csv;
  write_history_csv(r.history, csv);
  CHECK(csv.str().rfind("iteration,objective,mean,std,volume,max-change\n0,", 0) == 0);

  OptimizerConfig bad;
  bad.move = 0.0;
  CHECK_THROWS_AS(optimize(map, 0.4, bad, map.uniform_design(0.4), eval), Error);
  CHECK_THROWS_AS(optimize(map, 1.5, capped, map.uniform_design(0.4), eval), Error);
}

}
