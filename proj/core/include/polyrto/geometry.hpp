#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace polyrto {

using Vec2 = Eigen::Vector2d;
using Polygon = std::vector<Vec2>;

/// Signed area (positive for counter-clockwise vertex order).
double signed_area(std::span<const Vec2> poly);
Vec2 centroid(std::span<const Vec2> poly);

/// ∫_poly ‖x − p‖² dx
double second_moment(std::span<const Vec2> poly, const Vec2& p);

bool is_convex(std::span<const Vec2> poly, double rel_tol = 1e-12);

/// Every fan triangle (c, v_i, v_{i+1}) has positive area.
bool is_star_shaped_about(std::span<const Vec2> poly, const Vec2& c);

bool is_simple(std::span<const Vec2> poly);

bool point_in_polygon(std::span<const Vec2> poly, const Vec2& p);

double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b);

double cross(const Vec2& a, const Vec2& b);

/// Keeps the part of `poly` with (x − origin)·normal ≤ 0 (Sutherland–Hodgman step).
Polygon clip_half_plane(const Polygon& poly, const Vec2& origin, const Vec2& normal);

}  // namespace polyrto
