#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "polyrto/geometry.hpp"

namespace polyrto {

/// Named boundary entity used to attach supports and loads.
struct Region {
  enum class Kind { segment, point };
  std::string name;
  Kind kind = Kind::segment;
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();  // unused for points
  double tol = 0.0;       // <= 0 selects the domain default
};

/// Design domain: a simple counter-clockwise polygon (rectangles anchored at
/// the origin) plus its named boundary regions.
class Domain2D {
 public:
  static Domain2D rectangle(double width, double height);
  static Domain2D polygon(Polygon vertices);

  bool is_rectangle() const noexcept { return rectangle_; }
  const Polygon& boundary() const noexcept { return boundary_; }
  double area() const noexcept { return area_; }
  double diameter() const noexcept;
  bool convex() const;
  Vec2 bbox_min() const;
  Vec2 bbox_max() const;
  double default_tolerance() const noexcept { return 1e-6 * diameter(); }

  Domain2D& add_region(Region region);
  const std::vector<Region>& regions() const noexcept { return regions_; }
  const Region& region(const std::string& name) const;

 private:
  Domain2D() = default;
  Polygon boundary_;
  double area_ = 0.0;
  bool rectangle_ = false;
  std::vector<Region> regions_;
};

using Edge = std::array<int, 2>;

/// Polygonal finite-element mesh. Immutable once constructed: the constructor
/// validates connectivity and derives areas and the shared-edge adjacency.
class PolyMesh {
 public:
  PolyMesh() = default;
  PolyMesh(std::vector<Vec2> nodes, std::vector<std::vector<int>> elements,
           std::map<std::string, std::vector<int>> regions = {});

  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  std::size_t num_elements() const noexcept { return elements_.size(); }
  const std::vector<Vec2>& nodes() const noexcept { return nodes_; }
  const std::vector<std::vector<int>>& elements() const noexcept { return elements_; }
  const std::vector<int>& element(std::size_t e) const { return elements_[e]; }
  const std::vector<double>& areas() const noexcept { return areas_; }
  const std::vector<Vec2>& centroids() const noexcept { return centroids_; }
  const std::vector<std::vector<int>>& adjacency() const noexcept { return adjacency_; }
  const std::map<std::string, std::vector<int>>& regions() const noexcept { return regions_; }
  const std::vector<int>& region(const std::string& name) const;
  bool has_region(const std::string& name) const { return regions_.count(name) != 0; }

  Polygon element_polygon(std::size_t e) const;
  double total_area() const;
  /// Edges owned by exactly one element, oriented as in that element.
  const std::vector<Edge>& boundary_edges() const noexcept { return boundary_edges_; }
  std::vector<int> boundary_nodes() const;
  /// Median edge length over all unique edges.
  double median_edge_length() const;

  PolyMesh with_regions(std::map<std::string, std::vector<int>> regions) const;

  friend bool operator==(const PolyMesh& a, const PolyMesh& b) {
    return a.nodes_ == b.nodes_ && a.elements_ == b.elements_ && a.regions_ == b.regions_;
  }

 private:
  std::vector<Vec2> nodes_;
  std::vector<std::vector<int>> elements_;
  std::map<std::string, std::vector<int>> regions_;
  std::vector<double> areas_;
  std::vector<Vec2> centroids_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<Edge> boundary_edges_;
};

enum class MeshSymmetry { none, mirror_x };

struct CvtOptions {
  std::size_t n_elements = 1;
  std::uint64_t seed = 1;
  std::size_t lloyd_iterations = 0;
  MeshSymmetry symmetry = MeshSymmetry::none;
};

struct CvtResult {
  PolyMesh mesh;
  std::vector<Vec2> sites;    // generators of the final diagram; element e belongs to sites[e]
  std::vector<double> energy;  // CVT energy of the diagram before each update, plus the final one
};

/// Clipped Voronoi cells of `sites` restricted to the domain, one per site.
std::vector<Polygon> voronoi_cells(const Domain2D& domain, const std::vector<Vec2>& sites,
                                   unsigned threads = 0);

CvtResult generate_cvt(const Domain2D& domain, const CvtOptions& options, unsigned threads = 0);

PolyMesh generate_cvt_mesh(const Domain2D& domain, std::size_t n_elements, std::uint64_t seed,
                           std::size_t lloyd_iterations);

/// Resolves every named region of `domain` to mesh nodes.
PolyMesh tag_boundary(const PolyMesh& mesh, const Domain2D& domain);

void write_mesh(const PolyMesh& mesh, std::ostream& out);
PolyMesh read_mesh(std::istream& in);
void save_mesh(const PolyMesh& mesh, const std::filesystem::path& path);
PolyMesh load_mesh(const std::filesystem::path& path);

}  // namespace polyrto
