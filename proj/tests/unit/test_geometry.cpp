#include <doctest.h>

#include "polyrto/geometry.hpp"
#include "support.hpp"

using namespace polyrto;

TEST_SUITE("geometry") {

TEST_CASE("area and centroid of a unit square and an L shape") {
  const Polygon sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(signed_area(sq) == doctest::Approx(1.0));
  CHECK(centroid(sq).isApprox(Vec2(0.5, 0.5)));
  Polygon cw(sq.rbegin(), sq.rend());
  CHECK(signed_area(cw) == doctest::Approx(-1.0));

  // two unit squares side by side plus one on top of the left one
  const Polygon ell = {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
  CHECK(signed_area(ell) == doctest::Approx(3.0));
  const Vec2 c = centroid(ell);
  CHECK(c.x() == doctest::Approx((0.5 + 1.5 + 0.5) / 3.0));
  CHECK(c.y() == doctest::Approx((0.5 + 0.5 + 1.5) / 3.0));
  CHECK_FALSE(is_convex(ell));
  CHECK(is_convex(sq));
  CHECK(is_simple(ell));
}

TEST_CASE("second moment of a square about its centre") {
  const Polygon sq = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  // ∫∫ x² + y² over [-1,1]² = 8/3
  CHECK(second_moment(sq, Vec2::Zero()) == doctest::Approx(8.0 / 3.0));
  // parallel axis: J_p = J_c + A |p − c|²
  CHECK(second_moment(sq, Vec2(2, 1)) == doctest::Approx(8.0 / 3.0 + 4.0 * 5.0));
}

TEST_CASE("half-plane clipping") {
  const Polygon sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const Polygon left = clip_half_plane(sq, Vec2(0.25, 0), Vec2(1, 0));
  CHECK(signed_area(left) == doctest::Approx(0.25));
  const Polygon diag = clip_half_plane(sq, Vec2(0.5, 0.5), Vec2(1, 1).normalized());
  CHECK(signed_area(diag) == doctest::Approx(0.5));
  CHECK(clip_half_plane(sq, Vec2(-1, 0), Vec2(1, 0)).empty());
}

TEST_CASE("point queries") {
  const Polygon hex = test::regular_polygon(6);
  CHECK(point_in_polygon(hex, Vec2(0.1, 0.2)));
  CHECK_FALSE(point_in_polygon(hex, Vec2(1.1, 0.0)));
  CHECK(distance_to_segment(Vec2(0.5, 2), Vec2(0, 0), Vec2(1, 0)) == doctest::Approx(2.0));
  CHECK(distance_to_segment(Vec2(3, 4), Vec2(0, 0), Vec2(0, 0)) == doctest::Approx(5.0));
  CHECK(is_star_shaped_about(hex, Vec2::Zero()));
}

}
