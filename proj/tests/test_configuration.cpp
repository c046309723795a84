#include <doctest.h>

#include <cmath>
#include <random>

#include "billiards/configuration.hpp"

using namespace billiards;

namespace {

Vec v2(double x, double y) { return Eigen::Vector2d(x, y); }

Configuration circle_polygon(const ConvexBody& circle, int n, int r,
                             double phase = 0.0) {
  return polygon_seed(circle, n, r, phase);
}

// Dihedral relabeling sigma: start + step * j, step = +-1.
Configuration relabel(const Configuration& config, int start, int step) {
  Configuration out;
  for (int j = 0; j < config.n(); ++j) out.points.push_back(config.at(start + step * j));
  return out;
}

}  // namespace

TEST_CASE("length matches the chord-length formula") {
  ConvexBody circle = make_sphere(2, 1.0);
  Configuration diameter = circle_polygon(circle, 2, 1);
  CHECK(length(diameter) == doctest::Approx(4.0).epsilon(1e-12));

  Configuration triangle = circle_polygon(circle, 3, 1);
  CHECK(length(triangle) == doctest::Approx(3.0 * std::sqrt(3.0)).epsilon(1e-12));

  Configuration star = circle_polygon(circle, 5, 2);
  CHECK(length(star) ==
        doctest::Approx(10.0 * std::sin(2.0 * M_PI / 5.0)).epsilon(1e-12));
}

TEST_CASE("length is invariant under dihedral relabelings, bit for bit") {
  ConvexBody body = make_ellipsoid(v2(2, 1));
  std::mt19937_64 rng(17);
  Configuration config = random_configuration(body, 6, rng);
  double base = length(config);
  for (int start = 0; start < 6; ++start)
    for (int step : {1, -1})
      CHECK(length(relabel(config, start, step)) == base);
}

TEST_CASE("gradient vanishes exactly at symmetric orbits") {
  ConvexBody circle = make_sphere(2, 1.0);
  for (auto [n, r] : {std::pair{3, 1}, {5, 1}, {5, 2}, {7, 3}}) {
    Configuration polygon = circle_polygon(circle, n, r);
    CHECK(residual(length_gradient(polygon)) < 1e-12);
  }
  ConvexBody ellipse = make_ellipsoid(v2(2, 1));
  Configuration axis = make_configuration(
      ellipse, {make_surface_point(ellipse, v2(2, 0)),
                make_surface_point(ellipse, v2(-2, 0))});
  CHECK(residual(length_gradient(axis)) < 1e-12);
}

TEST_CASE("gradient matches central finite differences of length") {
  ConvexBody body = make_ellipsoid(Eigen::Vector3d(1.0, 1.3, 1.7));
  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss;
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    Configuration config = random_configuration(body, 4, rng);
    TangentField grad = length_gradient(config);
    int N = body.surface_dim();
    Vec dir(config.n() * N);
    for (int i = 0; i < dir.size(); ++i) dir[i] = gauss(rng);
    dir.normalize();

    auto moved = [&](double t) {
      std::vector<SurfacePoint> pts;
      for (int j = 0; j < config.n(); ++j) {
        Chart chart = make_chart(body, config.points[j]);
        pts.push_back(chart_to_surface(body, chart, t * dir.segment(j * N, N)));
      }
      return length(Configuration{pts});
    };
    double fd = (moved(h) - moved(-h)) / (2.0 * h);
    double analytic = 0.0;
    for (int j = 0; j < config.n(); ++j)
      analytic += grad.comps[j].dot(dir.segment(j * N, N));
    CHECK(std::abs(fd - analytic) <= 1e-6 * std::max(1.0, std::abs(analytic)));
  }
}

TEST_CASE("canonicalize quotients the dihedral action") {
  ConvexBody circle = make_sphere(2, 1.0);
  Configuration diameter = make_configuration(
      circle, {make_surface_point(circle, v2(-1, 0)),
               make_surface_point(circle, v2(1, 0))});
  Configuration flipped = relabel(diameter, 1, 1);
  CHECK(canonicalize(diameter) == canonicalize(flipped));

  Configuration triangle = circle_polygon(circle, 3, 1);
  CHECK(canonicalize(triangle) == canonicalize(relabel(triangle, 0, -1)));
  CHECK(canonicalize(triangle) == canonicalize(relabel(triangle, 2, 1)));

  Configuration other_diameter = make_configuration(
      circle, {make_surface_point(circle, v2(0, 1)),
               make_surface_point(circle, v2(0, -1))});
  CHECK(canonicalize(diameter) != canonicalize(other_diameter));

  std::mt19937_64 rng(29);
  Configuration random = random_configuration(circle, 5, rng);
  for (int start = 0; start < 5; ++start)
    for (int step : {1, -1})
      CHECK(canonicalize(random) == canonicalize(relabel(random, start, step)));
}

TEST_CASE("distinct handles iterates and tolerance collapse") {
  ConvexBody circle = make_sphere(2, 1.0);
  CriticalOrbit diameter = make_orbit(circle, circle_polygon(circle, 2, 1));
  CriticalOrbit tripled =
      make_orbit(circle, iterate(circle_polygon(circle, 2, 1), 3));
  CHECK_FALSE(distinct(diameter, tripled));
  CHECK_FALSE(distinct(tripled, diameter));

  CriticalOrbit pentagon = make_orbit(circle, circle_polygon(circle, 5, 1));
  CriticalOrbit star = make_orbit(circle, circle_polygon(circle, 5, 2));
  CHECK(distinct(pentagon, star));

  CriticalOrbit nudged = make_orbit(circle, circle_polygon(circle, 2, 1, 1e-12));
  CHECK_FALSE(distinct(diameter, nudged));

  CriticalOrbit crossed = make_orbit(circle, circle_polygon(circle, 2, 1, M_PI / 3));
  CHECK(distinct(diameter, crossed));
}

TEST_CASE("rotation number counts winding around the interior point") {
  ConvexBody circle = make_sphere(2, 1.0);
  CHECK(rotation_number(circle, circle_polygon(circle, 5, 1)) == 1);
  CHECK(rotation_number(circle, circle_polygon(circle, 5, 2)) == 2);
  CHECK(rotation_number(circle, circle_polygon(circle, 2, 1)) == 1);
  // Listing the star with step 3 traverses the same curve backwards.
  CHECK(rotation_number(circle, circle_polygon(circle, 5, 3)) == 2);

  ConvexBody sphere = make_sphere(3, 1.0);
  std::mt19937_64 rng(31);
  CHECK_THROWS_AS(rotation_number(sphere, random_configuration(sphere, 3, rng)),
                  AmbientDimension);
}

TEST_CASE("iterate repeats the cycle and preserves criticality") {
  ConvexBody circle = make_sphere(2, 1.0);
  Configuration diameter = circle_polygon(circle, 2, 1);

  Configuration same = iterate(diameter, 1);
  CHECK(same.n() == 2);
  CHECK(length(same) == length(diameter));

  Configuration six = iterate(diameter, 3);
  CHECK(six.n() == 6);
  CHECK(length(six) == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(residual(length_gradient(six)) < 1e-12);

  Configuration star = circle_polygon(circle, 5, 2);
  CHECK(residual(length_gradient(iterate(star, 4))) < 1e-12);
}

TEST_CASE("adjacent distinctness is enforced") {
  ConvexBody circle = make_sphere(2, 1.0);
  SurfacePoint p = make_surface_point(circle, v2(1, 0));
  CHECK_THROWS_AS(make_configuration(circle, {p, p}), AdjacencyViolation);
}

TEST_CASE("find_critical maximize recovers maxima") {
  ConvexBody circle = make_sphere(2, 1.0);
  std::vector<Configuration> seeds = {circle_polygon(circle, 2, 1, 0.4)};
  // Nudge one endpoint off the antipode so the seed is genuinely noncritical.
  {
    Chart chart = make_chart(circle, seeds[0].points[1]);
    Vec x(1);
    x << 0.21;
    seeds[0].points[1] = chart_to_surface(circle, chart, x);
  }
  FindResult found = find_critical(circle, 2, seeds, SolveMode::maximize);
  REQUIRE(found.orbits.size() == 1);
  CHECK(found.orbits[0].length == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(found.orbits[0].grad_residual <= kTolCritical);

  ConvexBody ellipse = make_ellipsoid(v2(2, 1));
  SeedOptions seed_opt;
  seed_opt.random_count = 6;
  FindResult major = find_critical(ellipse, 2, make_seeds(ellipse, 2, seed_opt),
                                   SolveMode::maximize);
  REQUIRE(!major.orbits.empty());
  CHECK(major.orbits.back().length == doctest::Approx(8.0).epsilon(1e-8));
}

TEST_CASE("find_critical newton reaches saddles") {
  ConvexBody circle = make_sphere(2, 1.0);
  std::vector<Configuration> seeds = {circle_polygon(circle, 5, 2, 0.13)};
  FindResult found = find_critical(circle, 5, seeds, SolveMode::newton);
  REQUIRE(found.orbits.size() == 1);
  CHECK(found.orbits[0].length ==
        doctest::Approx(10.0 * std::sin(2.0 * M_PI / 5.0)).epsilon(1e-8));
  CHECK(*found.orbits[0].rotation_number == 2);

  ConvexBody ellipse = make_ellipsoid(v2(2, 1));
  std::vector<Configuration> axis_seed = {polygon_seed(ellipse, 2, 1, M_PI / 2.0)};
  FindResult minor = find_critical(ellipse, 2, axis_seed, SolveMode::newton);
  REQUIRE(minor.orbits.size() == 1);
  CHECK(minor.orbits[0].length == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("find_critical deduplicates and reports failures") {
  ConvexBody circle = make_sphere(2, 1.0);
  SeedOptions seed_opt;
  seed_opt.random_count = 10;
  seed_opt.rng_seed = 99;
  FindResult found = find_critical(circle, 2, make_seeds(circle, 2, seed_opt),
                                   SolveMode::maximize);
  REQUIRE(!found.orbits.empty());
  for (size_t a = 0; a < found.orbits.size(); ++a)
    for (size_t b = a + 1; b < found.orbits.size(); ++b)
      CHECK(distinct(found.orbits[a], found.orbits[b]));
  for (const CriticalOrbit& orbit : found.orbits)
    CHECK(orbit.length == doctest::Approx(4.0).epsilon(1e-8));
}
