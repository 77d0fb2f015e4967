#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "polyrto/error.hpp"
#include "polyrto/mesh.hpp"
#include "support.hpp"

using namespace polyrto;

namespace {

double cell_area_sum(const std::vector<Polygon>& cells) {
  double a = 0.0;
  for (const auto& c : cells) a += signed_area(c);
  return a;
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("clipped Voronoi cells tile the domain") {
  const Domain2D d = Domain2D::rectangle(3.0, 2.0);
  std::vector<Vec2> sites = {{0.5, 0.5}, {2.5, 0.4}, {1.4, 1.2}, {0.3, 1.8}, {2.2, 1.7}, {1.5, 0.2}};
  const auto cells = voronoi_cells(d, sites);
  REQUIRE(cells.size() == sites.size());
  CHECK(cell_area_sum(cells) == doctest::Approx(6.0).epsilon(1e-12));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CHECK(is_convex(cells[i]));
    CHECK(point_in_polygon(cells[i], sites[i]));
    // every cell point is closest to its own site: test the vertices
    for (const auto& v : cells[i])
      for (const auto& s : sites) CHECK((v - sites[i]).norm() <= (v - s).norm() + 1e-9);
  }
}

TEST_CASE("Lloyd iterations do not increase the CVT energy") {
  const Domain2D d = Domain2D::rectangle(2.0, 1.0);
  const CvtResult r = generate_cvt(d, {200, 3, 30, MeshSymmetry::none});
  REQUIRE(r.energy.size() == 31);
  for (std::size_t k = 1; k < r.energy.size(); ++k) CHECK(r.energy[k] <= r.energy[k - 1] * (1 + 1e-12));
  CHECK(r.energy.back() < 0.9 * r.energy.front());
}

TEST_CASE("CVT mesh invariants") {
  const Domain2D d = Domain2D::rectangle(60.0, 30.0);
  const PolyMesh m = generate_cvt_mesh(d, 300, 11, 50);
  CHECK(m.num_elements() == 300);
  CHECK(m.total_area() == doctest::Approx(1800.0).epsilon(1e-12));
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const Polygon p = m.element_polygon(e);
    CHECK(signed_area(p) > 0.0);
    CHECK(is_convex(p, 1e-9));
  }
  // conforming: every interior edge is shared by exactly two elements
  std::map<std::pair<int, int>, int> uses;
  for (const auto& el : m.elements())
    for (std::size_t i = 0; i < el.size(); ++i) {
      int a = el[i], b = el[(i + 1) % el.size()];
      uses[{std::min(a, b), std::max(a, b)}]++;
    }
  double boundary_length = 0.0;
  for (const auto& [edge, n] : uses) {
    CHECK(n <= 2);
    if (n == 1) boundary_length += (m.nodes()[edge.first] - m.nodes()[edge.second]).norm();
  }
  CHECK(boundary_length == doctest::Approx(180.0).epsilon(1e-10));
  CHECK(m.boundary_edges().size() == static_cast<std::size_t>(std::count_if(
                                         uses.begin(), uses.end(), [](const auto& u) { return u.second == 1; })));
}

TEST_CASE("one element on a unit square") {
  const PolyMesh m = generate_cvt_mesh(Domain2D::rectangle(1.0, 1.0), 1, 1, 10);
  CHECK(m.num_elements() == 1);
  CHECK(m.num_nodes() == 4);
  CHECK(m.total_area() == doctest::Approx(1.0));
}

TEST_CASE("same seed, same mesh; different seed, different mesh") {
  const Domain2D d = Domain2D::rectangle(4.0, 1.0);
  const PolyMesh a = generate_cvt_mesh(d, 80, 5, 20);
  const PolyMesh b = generate_cvt_mesh(d, 80, 5, 20);
  const PolyMesh c = generate_cvt_mesh(d, 80, 6, 20);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  const PolyMesh t = generate_cvt(d, {80, 5, 20, MeshSymmetry::none}, 3).mesh;
  CHECK(a == t);
}

TEST_CASE("mirror symmetry about the vertical mid-line") {
  const Domain2D d = Domain2D::rectangle(120.0, 50.0);
  const PolyMesh m = generate_cvt(d, {400, 2, 40, MeshSymmetry::mirror_x}).mesh;
  CHECK(m.num_elements() == 400);
  std::set<std::pair<long long, long long>> keys;
  auto key = [](const Vec2& p) { return std::pair{std::llround(p.x() * 1e6), std::llround(p.y() * 1e6)}; };
  for (const auto& p : m.nodes()) keys.insert(key(p));
  for (const auto& p : m.nodes()) CHECK(keys.count(key(Vec2(120.0 - p.x(), p.y()))) == 1);
  // the mid-point of the bottom edge is a node
  CHECK(keys.count(key(Vec2(60.0, 0.0))) == 1);
}

TEST_CASE("non-convex polygon domain") {
  const Domain2D d = Domain2D::polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
  const PolyMesh m = generate_cvt_mesh(d, 60, 4, 20);
  CHECK(m.total_area() == doctest::Approx(3.0).epsilon(1e-6));
  for (const auto& c : m.centroids()) CHECK(point_in_polygon(d.boundary(), c));
  CHECK_THROWS_AS(Domain2D::polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), Error);
  CHECK_THROWS_AS(Domain2D::polygon({{0, 0}, {0, 1}, {1, 0}}), Error);
}

TEST_CASE("boundary regions resolve to nodes") {
  Domain2D d = Domain2D::rectangle(60.0, 30.0);
  d.add_region({"support", Region::Kind::segment, {0, 0}, {0, 30}, 0});
  d.add_region({"tip", Region::Kind::point, {60, 30}, {0, 0}, 0});
  const PolyMesh m = tag_boundary(generate_cvt_mesh(d, 200, 1, 20), d);
  for (int n : m.region("support")) CHECK(m.nodes()[n].x() == doctest::Approx(0.0));
  CHECK(m.region("support").size() >= 3);
  REQUIRE(m.region("tip").size() == 1);
  CHECK(m.nodes()[m.region("tip")[0]].isApprox(Vec2(60, 30)));

  Domain2D bad = Domain2D::rectangle(1.0, 1.0);
  bad.add_region({"nowhere", Region::Kind::point, {0.5, 0.5}, {0, 0}, 1e-3});
  CHECK_THROWS_AS(tag_boundary(generate_cvt_mesh(bad, 4, 1, 5), bad), Error);
}

TEST_CASE("mesh text format round trip and errors") {
  Domain2D d = Domain2D::rectangle(2.0, 1.0);
  d.add_region({"left", Region::Kind::segment, {0, 0}, {0, 1}, 0});
  const PolyMesh m = tag_boundary(generate_cvt_mesh(d, 30, 9, 10), d);
  std::stringstream ss;
  write_mesh(m, ss);
  const PolyMesh back = read_mesh(ss);
  CHECK(back == m);

  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return read_mesh(in);
  };
  CHECK_THROWS_AS(parse("mesh v2\n"), ParseError);
  CHECK_THROWS_AS(parse("polymesh v1\nNODES 3\n0 0\n1 0\n"), ParseError);
  try {
    parse("polymesh v1\nNODES 3\n0 0\n1 0\n0 1\nELEMENTS 1\n3 0 1 7\nREGIONS 0\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 7);
  }
  // clockwise element
  CHECK_THROWS_AS(parse("polymesh v1\nNODES 3\n0 0\n1 0\n0 1\nELEMENTS 1\n3 0 2 1\nREGIONS 0\n"), ParseError);
}

}
