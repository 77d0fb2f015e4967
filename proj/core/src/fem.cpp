#include "polyrto/fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "polyrto/error.hpp"
#include "polyrto/parallel.hpp"

namespace polyrto {

void SimpParams::validate() const {
  if (!(penal >= 1.0)) throw Error("SIMP penalty must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw Error("SIMP eps must lie in (0,1)");
  for (const auto& [it, p] : continuation)
    if (it < 0 || !(p >= 1.0)) throw Error("invalid SIMP continuation step");
}

Eigen::Matrix3d Material::elasticity() const {
  Eigen::Matrix3d d = Eigen::Matrix3d::Zero();
  if (plane == PlaneAssumption::stress) {
    const double c = E0 / (1.0 - nu * nu);
    d << c, c * nu, 0, c * nu, c, 0, 0, 0, c * (1.0 - nu) / 2.0;
  } else {
    const double c = E0 / ((1.0 + nu) * (1.0 - 2.0 * nu));
    d << c * (1.0 - nu), c * nu, 0, c * nu, c * (1.0 - nu), 0, 0, 0, c * (1.0 - 2.0 * nu) / 2.0;
  }
  return d;
}

void Material::validate() const {
  if (!(E0 > 0.0)) throw Error("material E0 must be positive");
  if (!(nu >= 0.0 && nu < 0.5)) throw Error("Poisson ratio must lie in [0, 0.5)");
  if (!(Emin > 0.0 && Emin < E0)) throw Error("Emin must lie in (0, E0)");
}

// ---------------------------------------------------------------- shape functions

ShapeFunctions wachspress(std::span<const Vec2> poly, const Vec2& x) {
  const std::size_t k = poly.size();
  std::vector<Vec2> p(k);
  for (std::size_t i = 0; i < k; ++i) {
    const Vec2 e = poly[(i + 1) % k] - poly[i];
    const Vec2 n = Vec2(e.y(), -e.x()).normalized();
    const double h = (poly[i] - x).dot(n);
    p[i] = n / h;
  }
  ShapeFunctions s;
  s.value.resize(static_cast<Eigen::Index>(k));
  s.gradient.resize(static_cast<Eigen::Index>(k), 2);
  std::vector<Vec2> r(k);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const Vec2& prev = p[(i + k - 1) % k];
    s.value[i] = cross(prev, p[i]);
    r[i] = prev + p[i];
    total += s.value[i];
  }
  s.value /= total;
  Vec2 mean_r = Vec2::Zero();
  for (std::size_t i = 0; i < k; ++i) mean_r += s.value[i] * r[i];
  for (std::size_t i = 0; i < k; ++i) s.gradient.row(i) = s.value[i] * (r[i] - mean_r).transpose();
  return s;
}

ShapeFunctions mean_value(std::span<const Vec2> poly, const Vec2& x) {
  const std::size_t k = poly.size();
  std::vector<Vec2> d(k), grad_theta(k);
  std::vector<double> len(k);
  for (std::size_t i = 0; i < k; ++i) {
    d[i] = poly[i] - x;
    len[i] = d[i].norm();
    // ∇ₓ of the polar angle of (vᵢ − x)
    grad_theta[i] = Vec2(d[i].y(), -d[i].x()) / (len[i] * len[i]);
  }
  std::vector<double> t(k);
  std::vector<Vec2> grad_t(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = (i + 1) % k;
    const double alpha = std::atan2(cross(d[i], d[j]), d[i].dot(d[j]));
    t[i] = std::tan(0.5 * alpha);
    grad_t[i] = 0.5 * (1.0 + t[i] * t[i]) * (grad_theta[j] - grad_theta[i]);
  }
  Eigen::VectorXd w(static_cast<Eigen::Index>(k));
  Eigen::Matrix<double, Eigen::Dynamic, 2> gw(static_cast<Eigen::Index>(k), 2);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t im = (i + k - 1) % k;
    const double num = t[im] + t[i];
    w[i] = num / len[i];
    const Vec2 e = d[i] / len[i];
    gw.row(i) = ((grad_t[im] + grad_t[i]) / len[i] + num * e / (len[i] * len[i])).transpose();
  }
  const double total = w.sum();
  const Eigen::RowVector2d gtotal = gw.colwise().sum();
  ShapeFunctions s;
  s.value = w / total;
  s.gradient.resize(static_cast<Eigen::Index>(k), 2);
  for (std::size_t i = 0; i < k; ++i) s.gradient.row(i) = (gw.row(i) - s.value[i] * gtotal) / total;
  return s;
}

// ---------------------------------------------------------------- element stiffness

Eigen::MatrixXd element_stiffness(std::span<const Vec2> poly, const Material& material, ShapeKind kind) {
  const std::size_t k = poly.size();
  if (k < 3) throw Error("element needs at least 3 nodes");
  const double area = signed_area(poly);
  double perimeter = 0.0;
  for (std::size_t i = 0; i < k; ++i) perimeter += (poly[(i + 1) % k] - poly[i]).norm();
  if (!(area > 1e-12 * perimeter * perimeter)) throw Error("degenerate polygon (near-zero area)");
  const Vec2 c = centroid(poly);
  if (!is_star_shaped_about(poly, c)) throw Error("element is not star-shaped about its centroid");
  if (kind == ShapeKind::automatic) kind = is_convex(poly, 1e-10) ? ShapeKind::wachspress : ShapeKind::mean_value;

  // centroid fan, 3 interior points per triangle
  struct Point {
    Vec2 x;
    double w;
  };
  std::vector<Point> quad;
  quad.reserve(3 * k);
  constexpr double a = 2.0 / 3.0, b = 1.0 / 6.0;
  for (std::size_t i = 0; i < k; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % k];
    const double at = 0.5 * cross(p - c, q - c);
    quad.push_back({a * c + b * p + b * q, at / 3.0});
    quad.push_back({b * c + a * p + b * q, at / 3.0});
    quad.push_back({b * c + b * p + a * q, at / 3.0});
  }

  std::vector<Eigen::Matrix<double, Eigen::Dynamic, 2>> grads;
  grads.reserve(quad.size());
  Eigen::Matrix<double, Eigen::Dynamic, 2> integral = Eigen::MatrixX2d::Zero(static_cast<Eigen::Index>(k), 2);
  for (const auto& qp : quad) {
    ShapeFunctions s = kind == ShapeKind::wachspress ? wachspress(poly, qp.x) : mean_value(poly, qp.x);
    integral += qp.w * s.gradient;
    grads.push_back(std::move(s.gradient));
  }
  // ∮ φᵢ n ds: φᵢ is linear on its two edges and vanishes elsewhere
  Eigen::Matrix<double, Eigen::Dynamic, 2> exact(static_cast<Eigen::Index>(k), 2);
  for (std::size_t i = 0; i < k; ++i) {
    const Vec2& prev = poly[(i + k - 1) % k];
    const Vec2& next = poly[(i + 1) % k];
    const Vec2& v = poly[i];
    const Vec2 n_prev(v.y() - prev.y(), prev.x() - v.x());
    const Vec2 n_next(next.y() - v.y(), v.x() - next.x());
    exact.row(i) = 0.5 * (n_prev + n_next).transpose();
  }
  const Eigen::Matrix<double, Eigen::Dynamic, 2> correction = (exact - integral) / area;

  const Eigen::Matrix3d d = material.elasticity();
  Eigen::MatrixXd ke = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * k), static_cast<Eigen::Index>(2 * k));
  Eigen::MatrixXd bmat(3, static_cast<Eigen::Index>(2 * k));
  for (std::size_t q = 0; q < quad.size(); ++q) {
    const auto g = (grads[q] + correction).eval();
    bmat.setZero();
    for (std::size_t i = 0; i < k; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      bmat(0, 2 * ii) = g(ii, 0);
      bmat(1, 2 * ii + 1) = g(ii, 1);
      bmat(2, 2 * ii) = g(ii, 1);
      bmat(2, 2 * ii + 1) = g(ii, 0);
    }
    ke.noalias() += quad[q].w * bmat.transpose() * d * bmat;
  }
  return 0.5 * (ke + ke.transpose());
}

std::vector<Eigen::MatrixXd> element_stiffnesses(const PolyMesh& mesh, const Material& material, unsigned threads) {
  std::vector<Eigen::MatrixXd> ke(mesh.num_elements());
  parallel_for(mesh.num_elements(), threads, [&](std::size_t e) {
    ke[e] = element_stiffness(mesh.element_polygon(e), material);
  });
  return ke;
}

// ---------------------------------------------------------------- boundary conditions

std::vector<int> fixed_dofs(const PolyMesh& mesh, const BoundaryConditions& bcs) {
  std::set<int> dofs;
  for (const auto& f : bcs.fixed) {
    for (int n : mesh.region(f.region)) {
      if (f.x) dofs.insert(2 * n);
      if (f.y) dofs.insert(2 * n + 1);
    }
  }
  return {dofs.begin(), dofs.end()};
}

std::vector<Edge> region_edges(const PolyMesh& mesh, const std::vector<int>& region_nodes) {
  const std::set<int> in(region_nodes.begin(), region_nodes.end());
  std::vector<Edge> edges;
  for (const auto& e : mesh.boundary_edges())
    if (in.count(e[0]) && in.count(e[1])) edges.push_back(e);
  return edges;
}

Eigen::VectorXd lump_line_load(const PolyMesh& mesh, const std::vector<Edge>& edges,
                               const std::function<Vec2(int node)>& load_at_node) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(mesh.num_nodes()));
  for (const auto& e : edges) {
    const double half = 0.5 * (mesh.nodes()[e[0]] - mesh.nodes()[e[1]]).norm();
    for (int n : e) {
      const Vec2 q = load_at_node(n);
      f[2 * n] += half * q.x();
      f[2 * n + 1] += half * q.y();
    }
  }
  return f;
}

Eigen::VectorXd load_vector(const PolyMesh& mesh, const BoundaryConditions& bcs) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(mesh.num_nodes()));
  for (const auto& p : bcs.point_loads) {
    for (int n : mesh.region(p.region)) {
      f[2 * n] += p.force.x();
      f[2 * n + 1] += p.force.y();
    }
  }
  for (const auto& d : bcs.distributed) {
    const auto edges = region_edges(mesh, mesh.region(d.region));
    if (edges.empty()) throw Error("distributed load region '" + d.region + "' has no boundary edges");
    f += lump_line_load(mesh, edges, [&](int n) { return d.load_per_length(mesh.nodes()[n]); });
  }
  return f;
}

// ---------------------------------------------------------------- assembly and solve

Eigen::SparseMatrix<double> assemble(const PolyMesh& mesh, std::span<const Eigen::MatrixXd> element_k,
                                     std::span<const double> densities, const SimpParams& simp) {
  if (densities.size() != mesh.num_elements() || element_k.size() != mesh.num_elements())
    throw Error("assemble: densities/element matrices do not match the mesh");
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.element(e);
    const double m = simp.modulus(densities[e]);
    const auto nd = static_cast<Eigen::Index>(2 * el.size());
    for (Eigen::Index a = 0; a < nd; ++a) {
      const int ga = 2 * el[a / 2] + static_cast<int>(a % 2);
      for (Eigen::Index b = 0; b < nd; ++b) {
        const int gb = 2 * el[b / 2] + static_cast<int>(b % 2);
        trip.emplace_back(ga, gb, m * element_k[e](a, b));
      }
    }
  }
  const auto n = 2 * static_cast<Eigen::Index>(mesh.num_nodes());
  Eigen::SparseMatrix<double> k(n, n);
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

LinearSystem apply_bcs(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& F, std::span<const int> fixed) {
  const Eigen::Index n = K.rows();
  if (F.size() != n) throw Error("apply_bcs: load vector size mismatch");
  std::vector<int> map(static_cast<std::size_t>(n), -1);
  std::vector<char> is_fixed(static_cast<std::size_t>(n), 0);
  for (int d : fixed) {
    if (d < 0 || d >= n) throw Error("apply_bcs: fixed dof out of range");
    is_fixed[d] = 1;
  }
  LinearSystem sys;
  sys.full_size = n;
  for (Eigen::Index d = 0; d < n; ++d)
    if (!is_fixed[d]) {
      map[d] = static_cast<int>(sys.free_dofs.size());
      sys.free_dofs.push_back(static_cast<int>(d));
    }
  const auto nf = static_cast<Eigen::Index>(sys.free_dofs.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index j = 0; j < K.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, j); it; ++it) {
      const int r = map[it.row()], c = map[it.col()];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  sys.K.resize(nf, nf);
  sys.K.setFromTriplets(trip.begin(), trip.end());
  sys.F.resize(nf);
  for (Eigen::Index i = 0; i < nf; ++i) sys.F[i] = F[sys.free_dofs[i]];
  return sys;
}

Eigen::VectorXd solve(const LinearSystem& system) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(system.full_size);
  if (system.free_dofs.empty()) return u;
  SparseCholesky chol;
  chol.compute(system.K);
  const Eigen::VectorXd ur = chol.solve(system.F);
  for (std::size_t i = 0; i < system.free_dofs.size(); ++i) u[system.free_dofs[i]] = ur[static_cast<Eigen::Index>(i)];
  return u;
}

double compliance(const Eigen::VectorXd& F, const Eigen::VectorXd& U) { return F.dot(U); }

Eigen::VectorXd compliance_sensitivity(const PolyMesh& mesh, std::span<const Eigen::MatrixXd> element_k,
                                       std::span<const double> densities, const Eigen::VectorXd& U,
                                       const SimpParams& simp) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(mesh.num_elements()));
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.element(e);
    Eigen::VectorXd ue(static_cast<Eigen::Index>(2 * el.size()));
    for (std::size_t i = 0; i < el.size(); ++i) {
      ue[2 * i] = U[2 * el[i]];
      ue[2 * i + 1] = U[2 * el[i] + 1];
    }
    g[static_cast<Eigen::Index>(e)] = -simp.modulus_derivative(densities[e]) * ue.dot(element_k[e] * ue);
  }
  return g;
}

// ---------------------------------------------------------------- StiffnessSolver

StiffnessSolver::StiffnessSolver(const PolyMesh& mesh, const Material& material, std::vector<int> fixed,
                                 unsigned threads)
    : mesh_(&mesh), element_k_(element_stiffnesses(mesh, material, threads)) {
  full_size_ = 2 * static_cast<Eigen::Index>(mesh.num_nodes());
  reduced_of_full_.assign(static_cast<std::size_t>(full_size_), 0);
  for (int d : fixed) {
    if (d < 0 || d >= full_size_) throw Error("fixed dof out of range");
    reduced_of_full_[d] = -1;
  }
  for (Eigen::Index d = 0; d < full_size_; ++d)
    if (reduced_of_full_[d] >= 0) {
      reduced_of_full_[d] = static_cast<int>(full_of_reduced_.size());
      full_of_reduced_.push_back(static_cast<int>(d));
    }
  const int n = static_cast<int>(full_of_reduced_.size());
  if (n == 0) throw Error("every degree of freedom is constrained");

  element_dofs_.resize(mesh.num_elements());
  std::vector<std::vector<int>> rows_of_col(static_cast<std::size_t>(n));
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    auto& dofs = element_dofs_[e];
    for (int node : mesh.element(e)) {
      dofs.push_back(reduced_of_full_[2 * node]);
      dofs.push_back(reduced_of_full_[2 * node + 1]);
    }
    for (int r : dofs)
      for (int c : dofs)
        if (r >= 0 && c >= 0 && r <= c) rows_of_col[c].push_back(r);
  }
  col_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int c = 0; c < n; ++c) {
    auto& rows = rows_of_col[c];
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    row_idx_.insert(row_idx_.end(), rows.begin(), rows.end());
    col_ptr_[c + 1] = static_cast<int>(row_idx_.size());
  }
  scatter_.resize(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& dofs = element_dofs_[e];
    auto& sc = scatter_[e];
    sc.assign(dofs.size() * dofs.size(), -1);
    for (std::size_t a = 0; a < dofs.size(); ++a)
      for (std::size_t b = 0; b < dofs.size(); ++b) {
        const int r = dofs[a], c = dofs[b];
        if (r < 0 || c < 0 || r > c) continue;
        const auto first = row_idx_.begin() + col_ptr_[c];
        const auto last = row_idx_.begin() + col_ptr_[c + 1];
        sc[a * dofs.size() + b] = static_cast<int>(std::lower_bound(first, last, r) - row_idx_.begin());
      }
  }
  values_.assign(row_idx_.size(), 0.0);
  chol_.analyze(n, col_ptr_, row_idx_);
}

void StiffnessSolver::factorize(std::span<const double> densities, const SimpParams& simp) {
  if (densities.size() != mesh_->num_elements()) throw Error("density vector does not match the mesh");
  std::fill(values_.begin(), values_.end(), 0.0);
  for (std::size_t e = 0; e < element_k_.size(); ++e) {
    const double m = simp.modulus(densities[e]);
    const auto& ke = element_k_[e];
    const auto& sc = scatter_[e];
    const std::size_t nd = element_dofs_[e].size();
    for (std::size_t a = 0; a < nd; ++a)
      for (std::size_t b = 0; b < nd; ++b) {
        const int pos = sc[a * nd + b];
        if (pos >= 0) values_[pos] += m * ke(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      }
  }
  chol_.factorize(values_);
  ++factorizations_;
}

Eigen::MatrixXd StiffnessSolver::solve(const Eigen::MatrixXd& loads) const {
  if (loads.rows() != full_size_) throw Error("load block has wrong length");
  const auto n = static_cast<Eigen::Index>(full_of_reduced_.size());
  Eigen::MatrixXd reduced(n, loads.cols());
  for (Eigen::Index i = 0; i < n; ++i) reduced.row(i) = loads.row(full_of_reduced_[i]);
  const Eigen::MatrixXd ur = chol_.solve(reduced);
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(full_size_, loads.cols());
  for (Eigen::Index i = 0; i < n; ++i) u.row(full_of_reduced_[i]) = ur.row(i);
  solves_ += static_cast<std::size_t>(loads.cols());
  return u;
}

Eigen::VectorXd StiffnessSolver::element_energies(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(element_k_.size()));
  Eigen::VectorXd ue;
  for (std::size_t e = 0; e < element_k_.size(); ++e) {
    const auto& el = mesh_->element(e);
    ue.resize(static_cast<Eigen::Index>(2 * el.size()));
    for (std::size_t i = 0; i < el.size(); ++i) {
      ue[2 * i] = u[2 * el[i]];
      ue[2 * i + 1] = u[2 * el[i] + 1];
    }
    out[static_cast<Eigen::Index>(e)] = ue.dot(element_k_[e] * ue);
  }
  return out;
}

}  // namespace polyrto
