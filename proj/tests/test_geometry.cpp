#include <doctest.h>

#include <cmath>
#include <random>

#include "billiards/geometry.hpp"

using namespace billiards;

namespace {

Vec v2(double x, double y) { return Eigen::Vector2d(x, y); }
Vec v3(double x, double y, double z) { return Eigen::Vector3d(x, y, z); }

}  // namespace

TEST_CASE("project_tangent on the unit sphere") {
  ConvexBody sphere = make_sphere(3, 1.0);
  SurfacePoint p = make_surface_point(sphere, v3(1, 0, 0));
  CHECK(project_tangent(p, v3(1, 0, 0)).norm() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK((project_tangent(p, v3(0, 1, 0)) - v3(0, 1, 0)).norm() < 1e-14);
  CHECK((project_tangent(p, v3(1, 1, 0)) - v3(0, 1, 0)).norm() < 1e-14);
}

TEST_CASE("project_chord_orthogonal") {
  CHECK(project_chord_orthogonal(v2(1, 0), v2(1, 0)).norm() < 1e-14);
  CHECK((project_chord_orthogonal(v2(1, 0), v2(0, 3)) - v2(0, 3)).norm() < 1e-14);
  Vec u = v2(1, 1) / std::sqrt(2.0);
  CHECK((project_chord_orthogonal(u, v2(1, 0)) - v2(0.5, -0.5)).norm() < 1e-14);
  CHECK_THROWS_AS(project_chord_orthogonal(v2(1, 1), v2(1, 0)), DomainError);
}

TEST_CASE("ray_intersect on circle and ellipse") {
  ConvexBody circle = make_sphere(2, 1.0);
  SurfacePoint p = make_surface_point(circle, v2(1, 0));

  RayHit diameter = ray_intersect(circle, p, v2(-1, 0));
  CHECK((diameter.point.coords - v2(-1, 0)).norm() < 1e-12);
  CHECK(diameter.t == doctest::Approx(2.0).epsilon(1e-12));

  // Second root of |p + t d| = 1 along the 45-degree chord is t = sqrt(2).
  Vec d = v2(-1, 1) / std::sqrt(2.0);
  RayHit oblique = ray_intersect(circle, p, d);
  CHECK((oblique.point.coords - v2(0, 1)).norm() < 1e-10);
  CHECK(oblique.t == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  ConvexBody ellipse = make_ellipsoid(v2(2, 1));
  SurfacePoint q = make_surface_point(ellipse, v2(2, 0));
  RayHit axis = ray_intersect(ellipse, q, v2(-1, 0));
  CHECK((axis.point.coords - v2(-2, 0)).norm() < 1e-10);
  CHECK(axis.t == doctest::Approx(4.0).epsilon(1e-12));

  CHECK_THROWS_AS(ray_intersect(circle, p, v2(0, 1)), GrazingRay);
}

TEST_CASE("ray_intersect invariants on random inward rays") {
  ConvexBody body = make_ellipsoid(v3(1, 1.3, 1.7));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 50; ++trial) {
    Vec u = v3(gauss(rng), gauss(rng), gauss(rng)).normalized();
    SurfacePoint p = surface_point_in_direction(body, u);
    Vec d = v3(gauss(rng), gauss(rng), gauss(rng));
    d -= 1.05 * std::max(0.0, d.dot(p.unit_outward_normal)) * p.unit_outward_normal;
    d.normalize();
    if (d.dot(p.unit_outward_normal) >= -1e-3) continue;
    RayHit hit = ray_intersect(body, p, d);
    CHECK(std::abs(body.level(hit.point.coords)) <= body.tol_surface());
    CHECK(hit.t > kTolGrazing);
  }
}

TEST_CASE("reflect is specular and an involution") {
  SurfacePoint wall{v2(1, 0), v2(1, 0), 0.0};
  CHECK((reflect(wall, v2(1, 0)) - v2(-1, 0)).norm() < 1e-14);

  double s = std::sqrt(2.0) / 2.0;
  CHECK((reflect(wall, v2(s, s)) - v2(-s, s)).norm() < 1e-14);

  ConvexBody sphere = make_sphere(3, 1.0);
  SurfacePoint top = make_surface_point(sphere, v3(0, 0, 1));
  CHECK((reflect(top, v3(0, s, s)) - v3(0, s, -s)).norm() < 1e-14);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 100; ++trial) {
    Vec u = v3(gauss(rng), gauss(rng), gauss(rng)).normalized();
    SurfacePoint p = surface_point_in_direction(sphere, u);
    Vec d = v3(gauss(rng), gauss(rng), gauss(rng)).normalized();
    if (std::abs(d.dot(p.unit_outward_normal)) <= 1e-3) continue;
    if (d.dot(p.unit_outward_normal) < 0.0) d = -d;
    Vec out = reflect(p, d);
    CHECK(std::abs(out.norm() - 1.0) < 1e-12);
    CHECK(out.dot(p.unit_outward_normal) ==
          doctest::Approx(-d.dot(p.unit_outward_normal)).epsilon(1e-12));
    // Reversing the outgoing ray and reflecting again recovers the
    // reversed incoming ray.
    CHECK((reflect(p, -out) - (-d)).norm() < 1e-12);
  }
  CHECK_THROWS_AS(reflect(wall, v2(0, 1)), GrazingRay);
}

TEST_CASE("billiard_flow on circle, ellipse and sphere") {
  ConvexBody circle = make_sphere(2, 1.0);
  SurfacePoint p0 = make_surface_point(circle, v2(1, 0));

  auto diameter = billiard_flow(circle, p0, v2(-1, 0), 2);
  CHECK((diameter[0].coords - v2(-1, 0)).norm() < 1e-10);
  CHECK((diameter[1].coords - v2(1, 0)).norm() < 1e-10);

  // Inscribed equilateral triangle closes after three bounces.
  Vec toward = (v2(std::cos(2.0 * M_PI / 3.0), std::sin(2.0 * M_PI / 3.0)) -
                v2(1, 0)).normalized();
  auto triangle = billiard_flow(circle, p0, toward, 3);
  CHECK((triangle[2].coords - v2(1, 0)).norm() < 1e-9);

  ConvexBody ellipse = make_ellipsoid(v2(2, 1));
  SurfacePoint q0 = make_surface_point(ellipse, v2(2, 0));
  auto axis = billiard_flow(ellipse, q0, v2(-1, 0), 4);
  CHECK((axis[0].coords - v2(-2, 0)).norm() < 1e-9);
  CHECK((axis[1].coords - v2(2, 0)).norm() < 1e-9);
  CHECK((axis[2].coords - v2(-2, 0)).norm() < 1e-9);
  CHECK((axis[3].coords - v2(2, 0)).norm() < 1e-9);

  // On the sphere the flow stays in the plane spanned by p0 and d0.
  ConvexBody sphere = make_sphere(3, 1.0);
  SurfacePoint s0 = make_surface_point(sphere, v3(1, 0, 0));
  Vec d0 = v3(-0.4, 0.7, 0.59).normalized();
  Eigen::Vector3d plane_normal =
      Eigen::Vector3d(1, 0, 0).cross(Eigen::Vector3d(d0[0], d0[1], d0[2]));
  plane_normal.normalize();
  auto flow = billiard_flow(sphere, s0, d0, 50);
  for (const SurfacePoint& b : flow)
    CHECK(std::abs(Eigen::Vector3d(b.coords[0], b.coords[1], b.coords[2]).dot(plane_normal)) < 1e-9);

  CHECK_THROWS_WITH_AS(billiard_flow(circle, p0, v2(0, 1), 2),
                       doctest::Contains("inward"), GrazingRay);
}

TEST_CASE("charts retract along the base normal") {
  ConvexBody circle = make_sphere(2, 1.0);
  SurfacePoint base = make_surface_point(circle, v2(1, 0));
  Chart chart = make_chart(circle, base);

  Vec zero(1);
  zero << 0.0;
  CHECK((chart_to_surface(circle, chart, zero).coords - base.coords).norm() < 1e-14);

  Vec x(1);
  x << 0.1;
  SurfacePoint moved = chart_to_surface(circle, chart, x);
  CHECK(moved.coords[1] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(moved.coords[0] == doctest::Approx(std::sqrt(1.0 - 0.01)).epsilon(1e-12));

  for (const ConvexBody& body :
       {make_sphere(2, 1.0), make_sphere(3, 1.0), make_ellipsoid(v3(1, 1.3, 1.7))}) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
      Vec u(body.ambient_dim());
      for (int i = 0; i < u.size(); ++i) u[i] = gauss(rng);
      Chart c = make_chart(body, surface_point_in_direction(body, u.normalized()));
      Vec off(body.surface_dim());
      for (int i = 0; i < off.size(); ++i) off[i] = 0.1 * gauss(rng);
      if (off.norm() > 0.1) off *= 0.1 / off.norm();
      Vec back = surface_to_chart(c, chart_to_surface(body, c, off));
      CHECK((back - off).norm() < 1e-10);
    }
  }

  Vec far(1);
  far << 5.0;
  CHECK_THROWS_AS(chart_to_surface(circle, chart, far), OutOfChart);
}

TEST_CASE("frames are orthonormal and tangent") {
  ConvexBody body = make_ellipsoid(v3(1, 1.3, 1.7));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 30; ++trial) {
    Vec u = v3(gauss(rng), gauss(rng), gauss(rng)).normalized();
    SurfacePoint p = surface_point_in_direction(body, u);
    Mat E = frame_basis(p.unit_outward_normal);
    CHECK((E.transpose() * E - Mat::Identity(2, 2)).norm() < 1e-10);
    CHECK((E.transpose() * p.unit_outward_normal).norm() < 1e-10);
    CHECK(p.unit_outward_normal.dot(p.coords - body.interior_point()) > 0.0);
    CHECK(std::abs(p.unit_outward_normal.norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("body construction and validation") {
  CHECK_THROWS_AS(make_sphere(2, -1.0), InvalidBody);
  CHECK_THROWS_AS(make_superellipsoid(v2(1, 1), 3), InvalidBody);
  CHECK_NOTHROW(make_superellipsoid(v2(1, 1), 4));
  CHECK_THROWS_AS(make_body("frisbee 1"), DomainError);
  CHECK(make_body("ellipsoid 1 1.3 1.7").ambient_dim() == 3);
  CHECK(make_body("circle 1").ambient_dim() == 2);
  // Off-surface points are rejected.
  ConvexBody circle = make_body("circle 1");
  CHECK_THROWS_AS(make_surface_point(circle, v2(1.1, 0)), DomainError);
}
