#pragma once

#include <cmath>
#include <vector>

#include "polyrto/mesh.hpp"

namespace polyrto::test {

/// nx × ny grid of axis-aligned quadrilaterals over [0,w]×[0,h].
inline PolyMesh quad_mesh(int nx, int ny, double w = 1.0, double h = 1.0) {
  std::vector<Vec2> nodes;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) nodes.emplace_back(w * i / nx, h * j / ny);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::vector<int>> elements;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  return PolyMesh(std::move(nodes), std::move(elements));
}

inline Polygon regular_polygon(int k, double r = 1.0, Vec2 c = Vec2::Zero()) {
  Polygon p;
  for (int i = 0; i < k; ++i) {
    const double t = 2.0 * 3.14159265358979323846 * i / k;
    p.push_back(c + r * Vec2(std::cos(t), std::sin(t)));
  }
  return p;
}

}  // namespace polyrto::test
