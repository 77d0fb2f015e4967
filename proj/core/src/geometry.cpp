#include "polyrto/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace polyrto {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  double a = 0.0;
  for (std::size_t i = 0; i < n; ++i) a += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * a;
}

Vec2 centroid(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  // shift to the first vertex to limit cancellation on small cells far from the origin
  const Vec2 o = poly[0];
  double a = 0.0;
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i] - o;
    const Vec2 q = poly[(i + 1) % n] - o;
    const double w = cross(p, q);
    a += w;
    c += w * (p + q);
  }
  return o + c / (3.0 * a);
}

double second_moment(std::span<const Vec2> poly, const Vec2& p) {
  const std::size_t n = poly.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i] - p;
    const Vec2 b = poly[(i + 1) % n] - p;
    const double w = cross(a, b);
    s += w * (a.x() * a.x() + a.x() * b.x() + b.x() * b.x() + a.y() * a.y() + a.y() * b.y() +
              b.y() * b.y());
  }
  return s / 12.0;
}

bool is_convex(std::span<const Vec2> poly, double rel_tol) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, (poly[(i + 1) % n] - poly[i]).squaredNorm());
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[(i + n - 1) % n];
    const Vec2& b = poly[i];
    const Vec2& c = poly[(i + 1) % n];
    if (cross(b - a, c - b) <= rel_tol * scale) return false;
  }
  return true;
}

bool is_star_shaped_about(std::span<const Vec2> poly, const Vec2& c) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(poly[i] - c, poly[(i + 1) % n] - c) <= 0.0) return false;
  }
  return n >= 3;
}

namespace {
int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = cross(b - a, c - a);
  return (v > 0) - (v < 0);
}
bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const int o1 = orientation(p1, p2, q1), o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1), o4 = orientation(q1, q2, p2);
  return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}
}  // namespace

bool is_simple(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

bool point_in_polygon(std::span<const Vec2> poly, const Vec2& p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y()) &&
        p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
      inside = !inside;
  }
  return inside;
}

double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

Polygon clip_half_plane(const Polygon& poly, const Vec2& origin, const Vec2& normal) {
  Polygon out;
  const std::size_t n = poly.size();
  if (n == 0) return out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const double da = (a - origin).dot(normal);
    const double db = (b - origin).dot(normal);
    if (da <= 0.0) out.push_back(a);
    if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
      const double t = da / (da - db);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

}  // namespace polyrto
