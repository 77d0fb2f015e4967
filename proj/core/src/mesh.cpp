#include "polyrto/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include "polyrto/error.hpp"
#include "polyrto/parallel.hpp"
#include "polyrto/random.hpp"

namespace polyrto {

// ---------------------------------------------------------------- Domain2D

Domain2D Domain2D::rectangle(double width, double height) {
  if (!(width > 0.0) || !(height > 0.0)) throw Error("rectangle domain needs positive width and height");
  Domain2D d;
  d.boundary_ = {Vec2(0, 0), Vec2(width, 0), Vec2(width, height), Vec2(0, height)};
  d.area_ = width * height;
  d.rectangle_ = true;
  return d;
}

Domain2D Domain2D::polygon(Polygon vertices) {
  if (vertices.size() < 3) throw Error("polygon domain needs at least 3 vertices");
  if (!is_simple(vertices)) throw Error("polygon domain is self-intersecting");
  const double a = signed_area(vertices);
  if (!(a > 0.0)) throw Error("polygon domain must be counter-clockwise with non-zero area");
  Domain2D d;
  d.boundary_ = std::move(vertices);
  d.area_ = a;
  return d;
}

Vec2 Domain2D::bbox_min() const {
  Vec2 lo = boundary_[0];
  for (const auto& v : boundary_) lo = lo.cwiseMin(v);
  return lo;
}

Vec2 Domain2D::bbox_max() const {
  Vec2 hi = boundary_[0];
  for (const auto& v : boundary_) hi = hi.cwiseMax(v);
  return hi;
}

double Domain2D::diameter() const noexcept {
  double d = 0.0;
  for (const auto& p : boundary_)
    for (const auto& q : boundary_) d = std::max(d, (p - q).norm());
  return d;
}

bool Domain2D::convex() const { return is_convex(boundary_); }

Domain2D& Domain2D::add_region(Region region) {
  if (region.name.empty()) throw Error("region needs a name");
  for (const auto& r : regions_)
    if (r.name == region.name) throw Error("duplicate region '" + region.name + "'");
  if (region.tol <= 0.0) region.tol = default_tolerance();
  regions_.push_back(std::move(region));
  return *this;
}

const Region& Domain2D::region(const std::string& name) const {
  for (const auto& r : regions_)
    if (r.name == name) return r;
  throw Error("unknown region '" + name + "'");
}

// ---------------------------------------------------------------- PolyMesh

PolyMesh::PolyMesh(std::vector<Vec2> nodes, std::vector<std::vector<int>> elements,
                   std::map<std::string, std::vector<int>> regions)
    : nodes_(std::move(nodes)), elements_(std::move(elements)), regions_(std::move(regions)) {
  const int nn = static_cast<int>(nodes_.size());
  areas_.resize(elements_.size());
  centroids_.resize(elements_.size());
  std::map<std::pair<int, int>, std::vector<int>> owners;
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const auto& el = elements_[e];
    if (el.size() < 3) throw Error("element " + std::to_string(e) + " has fewer than 3 nodes");
    for (int i : el)
      if (i < 0 || i >= nn) throw Error("element " + std::to_string(e) + " references node out of range");
    const Polygon poly = element_polygon(e);
    areas_[e] = signed_area(poly);
    if (!(areas_[e] > 0.0)) throw Error("element " + std::to_string(e) + " has non-positive signed area");
    centroids_[e] = centroid(poly);
    for (std::size_t k = 0; k < el.size(); ++k) {
      const int a = el[k], b = el[(k + 1) % el.size()];
      if (a == b) throw Error("element " + std::to_string(e) + " repeats a node");
      owners[{std::min(a, b), std::max(a, b)}].push_back(static_cast<int>(e));
    }
  }
  adjacency_.assign(elements_.size(), {});
  for (const auto& [edge, els] : owners) {
    if (els.size() > 2) throw Error("edge shared by more than two elements");
    if (els.size() == 2) {
      adjacency_[els[0]].push_back(els[1]);
      adjacency_[els[1]].push_back(els[0]);
    }
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const auto& el = elements_[e];
    for (std::size_t k = 0; k < el.size(); ++k) {
      const int a = el[k], b = el[(k + 1) % el.size()];
      if (owners[{std::min(a, b), std::max(a, b)}].size() == 1) boundary_edges_.push_back({a, b});
    }
  }
  for (const auto& [name, ids] : regions_)
    for (int i : ids)
      if (i < 0 || i >= nn) throw Error("region '" + name + "' references node out of range");
}

const std::vector<int>& PolyMesh::region(const std::string& name) const {
  auto it = regions_.find(name);
  if (it == regions_.end()) throw Error("mesh has no region '" + name + "'");
  return it->second;
}

Polygon PolyMesh::element_polygon(std::size_t e) const {
  Polygon p;
  p.reserve(elements_[e].size());
  for (int i : elements_[e]) p.push_back(nodes_[i]);
  return p;
}

double PolyMesh::total_area() const {
  double a = 0.0;
  for (double x : areas_) a += x;
  return a;
}

std::vector<int> PolyMesh::boundary_nodes() const {
  std::vector<int> ids;
  for (const auto& e : boundary_edges_) {
    ids.push_back(e[0]);
    ids.push_back(e[1]);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

double PolyMesh::median_edge_length() const {
  std::vector<double> len;
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const auto& el = elements_[e];
    for (std::size_t k = 0; k < el.size(); ++k) {
      const int a = el[k], b = el[(k + 1) % el.size()];
      if (a < b) len.push_back((nodes_[a] - nodes_[b]).norm());
    }
  }
  // interior edges appear once with a < b; boundary edges only once in either order
  for (const auto& be : boundary_edges_)
    if (be[0] > be[1]) len.push_back((nodes_[be[0]] - nodes_[be[1]]).norm());
  if (len.empty()) return 0.0;
  std::nth_element(len.begin(), len.begin() + len.size() / 2, len.end());
  return len[len.size() / 2];
}

PolyMesh PolyMesh::with_regions(std::map<std::string, std::vector<int>> regions) const {
  PolyMesh m = *this;
  for (const auto& [name, ids] : regions)
    for (int i : ids)
      if (i < 0 || i >= static_cast<int>(nodes_.size()))
        throw Error("region '" + name + "' references node out of range");
  m.regions_ = std::move(regions);
  return m;
}

// ---------------------------------------------------------------- Voronoi

namespace {

struct SiteGrid {
  Vec2 origin;
  double h = 1.0;
  int nx = 1, ny = 1;
  std::vector<std::vector<int>> buckets;

  SiteGrid(const Vec2& lo, const Vec2& hi, const std::vector<Vec2>& sites) : origin(lo) {
    const Vec2 ext = hi - lo;
    h = std::sqrt(ext.x() * ext.y() / static_cast<double>(std::max<std::size_t>(sites.size(), 1)));
    if (!(h > 0.0)) h = std::max(ext.x(), ext.y());
    nx = std::max(1, static_cast<int>(std::ceil(ext.x() / h)));
    ny = std::max(1, static_cast<int>(std::ceil(ext.y() / h)));
    buckets.assign(static_cast<std::size_t>(nx) * ny, {});
    for (std::size_t i = 0; i < sites.size(); ++i) {
      auto [cx, cy] = cell_of(sites[i]);
      buckets[static_cast<std::size_t>(cy) * nx + cx].push_back(static_cast<int>(i));
    }
  }
  std::pair<int, int> cell_of(const Vec2& p) const {
    const int cx = std::clamp(static_cast<int>(std::floor((p.x() - origin.x()) / h)), 0, nx - 1);
    const int cy = std::clamp(static_cast<int>(std::floor((p.y() - origin.y()) / h)), 0, ny - 1);
    return {cx, cy};
  }
};

Polygon remove_near_duplicates(const Polygon& poly, double eps) {
  Polygon out;
  for (const auto& v : poly) {
    if (!out.empty() && (v - out.back()).norm() <= eps) continue;
    out.push_back(v);
  }
  while (out.size() > 1 && (out.front() - out.back()).norm() <= eps) out.pop_back();
  return out;
}

Polygon convex_cell(const Domain2D& domain, const SiteGrid& grid, const std::vector<Vec2>& sites, std::size_t i,
                    const Polygon& start) {
  Polygon cell = start;
  const Vec2& s = sites[i];
  auto [cx, cy] = grid.cell_of(s);
  const int max_ring = std::max(grid.nx, grid.ny);
  for (int r = 0; r <= max_ring; ++r) {
    for (int y = cy - r; y <= cy + r; ++y) {
      if (y < 0 || y >= grid.ny) continue;
      for (int x = cx - r; x <= cx + r; ++x) {
        if (x < 0 || x >= grid.nx) continue;
        if (std::max(std::abs(x - cx), std::abs(y - cy)) != r) continue;
        for (int j : grid.buckets[static_cast<std::size_t>(y) * grid.nx + x]) {
          if (static_cast<std::size_t>(j) == i) continue;
          const Vec2 n = sites[j] - s;
          cell = clip_half_plane(cell, 0.5 * (s + sites[j]), n);
          if (cell.empty()) return cell;
        }
      }
    }
    double reach = 0.0;
    for (const auto& v : cell) reach = std::max(reach, (v - s).norm());
    if (2.0 * reach <= r * grid.h) break;
  }
  (void)domain;
  return cell;
}

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint, false, false>;

BgPolygon to_bg(const Polygon& poly) {
  BgPolygon out;
  for (const auto& v : poly) out.outer().emplace_back(v.x(), v.y());
  return out;
}

// Largest piece of domain ∩ cell; a cell cut in two by a re-entrant corner fails the area check later.
Polygon clip_to_domain(const BgPolygon& domain, const Polygon& cell) {
  bg::model::multi_polygon<BgPolygon> pieces;
  bg::intersection(domain, to_bg(cell), pieces);
  Polygon out;
  double best = 0.0;
  for (const auto& piece : pieces) {
    const double a = bg::area(piece);
    if (a <= best) continue;
    best = a;
    out.clear();
    for (const auto& p : piece.outer()) out.emplace_back(p.x(), p.y());
  }
  return out;
}

}  // namespace

std::vector<Polygon> voronoi_cells(const Domain2D& domain, const std::vector<Vec2>& sites, unsigned threads) {
  const Vec2 lo = domain.bbox_min(), hi = domain.bbox_max();
  const SiteGrid grid(lo, hi, sites);
  const bool convex = domain.convex();
  const Polygon start = convex ? domain.boundary() : Polygon{lo, Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y())};
  const double eps = 1e-12 * domain.diameter();
  const BgPolygon bg_domain = to_bg(domain.boundary());
  std::vector<Polygon> cells(sites.size());
  parallel_for(sites.size(), threads, [&](std::size_t i) {
    Polygon cell = convex_cell(domain, grid, sites, i, start);
    if (!convex && cell.size() >= 3) cell = clip_to_domain(bg_domain, cell);
    cells[i] = remove_near_duplicates(cell, eps);
  });
  return cells;
}

namespace {

double cvt_energy(const std::vector<Polygon>& cells, const std::vector<Vec2>& sites) {
  double e = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i].size() >= 3) e += second_moment(cells[i], sites[i]);
  return e;
}

constexpr int kRetryBudget = 5;
constexpr std::size_t kExtraLloyd = 25;

std::vector<Vec2> seed_sites(const Domain2D& domain, const CvtOptions& opt, int attempt) {
  const Philox rng(opt.seed);
  const Vec2 lo = domain.bbox_min(), hi = domain.bbox_max();
  const std::uint64_t stream = 0x6d657368ULL + static_cast<std::uint64_t>(attempt) * 0x100000000ULL;
  std::uint64_t draw = 0;
  auto sample_inside = [&](double xmax) {
    for (;;) {
      const double u = rng.uniform(stream, draw++);
      const double v = rng.uniform(stream, draw++);
      const Vec2 p(lo.x() + u * (xmax - lo.x()), lo.y() + v * (hi.y() - lo.y()));
      if (domain.is_rectangle() || point_in_polygon(domain.boundary(), p)) return p;
    }
  };
  std::vector<Vec2> sites;
  sites.reserve(opt.n_elements);
  if (opt.symmetry == MeshSymmetry::mirror_x) {
    const double axis = 0.5 * (lo.x() + hi.x());
    const std::size_t half = opt.n_elements / 2;
    for (std::size_t i = 0; i < half; ++i) sites.push_back(sample_inside(axis));
    for (std::size_t i = 0; i < half; ++i) sites.emplace_back(2.0 * axis - sites[i].x(), sites[i].y());
    if (opt.n_elements % 2 == 1) {
      const double v = rng.uniform(stream, draw++);
      sites.emplace_back(axis, lo.y() + v * (hi.y() - lo.y()));
    }
  } else {
    for (std::size_t i = 0; i < opt.n_elements; ++i) sites.push_back(sample_inside(hi.x()));
  }
  return sites;
}

bool has_duplicate_sites(const std::vector<Vec2>& sites, double tol) {
  std::vector<std::size_t> order(sites.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sites[a].x() < sites[b].x() || (sites[a].x() == sites[b].x() && sites[a].y() < sites[b].y());
  });
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (std::size_t m = k + 1; m < order.size(); ++m) {
      if (sites[order[m]].x() - sites[order[k]].x() > tol) break;
      if ((sites[order[m]] - sites[order[k]]).norm() <= tol) return true;
    }
  }
  return false;
}

void lloyd_update(std::vector<Vec2>& sites, const std::vector<Polygon>& cells, const Domain2D& domain,
                  MeshSymmetry symmetry) {
  for (std::size_t i = 0; i < sites.size(); ++i)
    if (cells[i].size() >= 3) sites[i] = centroid(cells[i]);
  if (symmetry == MeshSymmetry::mirror_x) {
    const double axis = 0.5 * (domain.bbox_min().x() + domain.bbox_max().x());
    const std::size_t half = sites.size() / 2;
    for (std::size_t i = 0; i < half; ++i) {
      // average the pair so both halves stay exact mirror images
      const double x = 0.5 * (sites[i].x() + 2.0 * axis - sites[i + half].x());
      const double y = 0.5 * (sites[i].y() + sites[i + half].y());
      sites[i] = Vec2(x, y);
      sites[i + half] = Vec2(2.0 * axis - x, y);
    }
    if (sites.size() % 2 == 1) sites.back().x() = axis;
  }
}

PolyMesh assemble_mesh(const std::vector<Polygon>& cells, double merge_tol) {
  std::vector<Vec2> nodes;
  std::unordered_map<long long, std::vector<int>> buckets;
  const double q = merge_tol;
  auto key = [](long long x, long long y) { return x * 73856093LL ^ y * 19349663LL; };
  auto find_or_add = [&](const Vec2& p) {
    const long long bx = static_cast<long long>(std::floor(p.x() / q));
    const long long by = static_cast<long long>(std::floor(p.y() / q));
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = buckets.find(key(bx + dx, by + dy));
        if (it == buckets.end()) continue;
        for (int id : it->second)
          if ((nodes[id] - p).norm() <= q) return id;
      }
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(p);
    buckets[key(bx, by)].push_back(id);
    return id;
  };
  std::vector<std::vector<int>> elements;
  elements.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<int> el;
    for (const auto& v : cells[c]) {
      const int id = find_or_add(v);
      if (el.empty() || el.back() != id) el.push_back(id);
    }
    while (el.size() > 1 && el.front() == el.back()) el.pop_back();
    if (el.size() < 3) throw Error("Voronoi cell " + std::to_string(c) + " degenerated during node merging");
    elements.push_back(std::move(el));
  }
  return PolyMesh(std::move(nodes), std::move(elements));
}

bool cells_star_shaped(const std::vector<Polygon>& cells) {
  for (const auto& c : cells)
    if (c.size() < 3 || !is_star_shaped_about(c, centroid(c))) return false;
  return true;
}

}  // namespace

CvtResult generate_cvt(const Domain2D& domain, const CvtOptions& options, unsigned threads) {
  if (options.n_elements < 1) throw Error("mesh needs at least one element");
  if (!(domain.area() > 0.0)) throw Error("degenerate domain (zero area)");
  if (options.symmetry == MeshSymmetry::mirror_x && !domain.is_rectangle())
    throw Error("mirror symmetry requires a rectangular domain");
  const double diam = domain.diameter();

  CvtResult result;
  std::vector<Vec2> sites;
  std::vector<Polygon> cells;
  for (int attempt = 0;; ++attempt) {
    if (attempt > kRetryBudget) {
      throw Error(domain.convex() ? "seed points keep collapsing onto each other; giving up"
                                  : "could not obtain star-shaped cells on the non-convex domain");
    }
    sites = seed_sites(domain, options, attempt);
    if (has_duplicate_sites(sites, 1e-10 * diam)) continue;
    result.energy.clear();
    cells = voronoi_cells(domain, sites, threads);
    bool ok = false;
    for (std::size_t iter = 0; iter <= options.lloyd_iterations + kExtraLloyd; ++iter) {
      result.energy.push_back(cvt_energy(cells, sites));
      if (iter >= options.lloyd_iterations && (domain.convex() || cells_star_shaped(cells))) {
        ok = true;
        break;
      }
      lloyd_update(sites, cells, domain, options.symmetry);
      cells = voronoi_cells(domain, sites, threads);
      for (const auto& c : cells)
        if (c.size() < 3) throw Error("empty Voronoi cell (duplicate sites after Lloyd update)");
    }
    // cells wrapping a re-entrant corner: start over from fresh seeds
    if (ok) break;
  }
  result.mesh = assemble_mesh(cells, 1e-9 * diam);
  result.sites = std::move(sites);
  const double rel = std::abs(result.mesh.total_area() - domain.area()) / domain.area();
  if (rel > 1e-6) throw Error("mesh does not partition the domain (area mismatch " + std::to_string(rel) + ")");
  return result;
}

PolyMesh generate_cvt_mesh(const Domain2D& domain, std::size_t n_elements, std::uint64_t seed,
                           std::size_t lloyd_iterations) {
  return generate_cvt(domain, {n_elements, seed, lloyd_iterations, MeshSymmetry::none}).mesh;
}

// ---------------------------------------------------------------- regions

PolyMesh tag_boundary(const PolyMesh& mesh, const Domain2D& domain) {
  const std::vector<int> bnodes = mesh.boundary_nodes();
  std::map<std::string, std::vector<int>> regions;
  for (const auto& r : domain.regions()) {
    const double tol = r.tol > 0.0 ? r.tol : domain.default_tolerance();
    std::vector<int> ids;
    if (r.kind == Region::Kind::segment) {
      for (int n : bnodes)
        if (distance_to_segment(mesh.nodes()[n], r.a, r.b) <= tol) ids.push_back(n);
    } else {
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (int n : bnodes) {
        const double d = (mesh.nodes()[n] - r.a).norm();
        if (d <= tol && d < best_d) {
          best = n;
          best_d = d;
        }
      }
      if (best >= 0) ids.push_back(best);
    }
    if (ids.empty()) throw Error("region '" + r.name + "' matches no mesh node");
    regions[r.name] = std::move(ids);
  }
  return mesh.with_regions(std::move(regions));
}

}  // namespace polyrto
