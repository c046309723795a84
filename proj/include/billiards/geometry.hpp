#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "billiards/errors.hpp"

namespace billiards {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

constexpr double kTolGrazing = 1e-8;

/// Smooth strictly convex hypersurface S = {F = 0} in R^{N+1}, F < 0 inside.
///
/// The surface is described implicitly by a callable triple
/// (level, gradient, hessian). Built-in factories cover spheres,
/// axis-aligned ellipsoids and even-exponent superellipsoids; custom
/// bodies plug in the same way. The sign of F is normalized at
/// construction so that F(interior_point) < 0, which orients all
/// normals outward.
class ConvexBody {
 public:
  using LevelFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;
  using HessFn = std::function<Mat(const Vec&)>;

  ConvexBody(int ambient_dim, LevelFn level, GradFn grad, HessFn hess,
             Vec interior_point, double diameter_scale, std::string name);

  int ambient_dim() const { return ambient_dim_; }   // N+1
  int surface_dim() const { return ambient_dim_ - 1; }  // N

  double level(const Vec& x) const { return sign_ * level_(x); }
  Vec level_gradient(const Vec& x) const { return sign_ * grad_(x); }
  Mat level_hessian(const Vec& x) const { return sign_ * hess_(x); }

  const Vec& interior_point() const { return interior_; }
  double diameter_scale() const { return scale_; }
  double tol_surface() const { return 1e-10 * scale_; }
  double tol_adjacent() const { return 1e-6 * scale_; }
  const std::string& name() const { return name_; }

  /// Unit outward normal; throws InvalidBody if the gradient vanishes.
  Vec unit_outward_normal(const Vec& x) const;

 private:
  int ambient_dim_;
  LevelFn level_;
  GradFn grad_;
  HessFn hess_;
  Vec interior_;
  double scale_;
  double sign_ = 1.0;
  std::string name_;
};

ConvexBody make_sphere(int ambient_dim, double radius);
ConvexBody make_ellipsoid(const Vec& semi_axes);
ConvexBody make_superellipsoid(const Vec& semi_axes, int exponent);

/// Parses a body spec like "circle 1", "ellipse 2 1", "ellipsoid 1 1.3 1.7",
/// "sphere 1", "superellipsoid 4 1 1". Throws DomainError on bad specs.
ConvexBody make_body(const std::string& spec);

/// A validated point of S together with its unit outward normal.
struct SurfacePoint {
  Vec coords;
  Vec unit_outward_normal;
  double on_surface_residual = 0.0;
};

/// Validates |F| <= tol_surface, normal orientation and pointwise
/// convexity (tangential shape operator has no negative eigenvalue).
SurfacePoint make_surface_point(const ConvexBody& body, const Vec& coords);

/// Newton retraction of a nearby ambient point onto S along the level
/// gradient direction. Throws NoConvergence.
SurfacePoint project_to_surface(const ConvexBody& body, const Vec& approx);

/// Second intersection of {F = 0} with the ray from the interior point
/// in direction u (|u| = 1). Used for seeding and for polar-style charts.
SurfacePoint surface_point_in_direction(const ConvexBody& body, const Vec& u);

/// Orthonormal tangent basis at a unit normal, as columns of a
/// (N+1) x N matrix. Built by Gram-Schmidt on the N ambient axes most
/// transverse to the normal; ties break toward the lowest axis index,
/// so the frame depends deterministically on the normal alone.
Mat frame_basis(const Vec& unit_normal);

/// v minus its normal component at p.
Vec project_tangent(const SurfacePoint& p, const Vec& v);

/// v minus its component along the unit vector u.
/// Rejects |u| != 1 beyond 1e-10.
Vec project_chord_orthogonal(const Vec& u, const Vec& v);

struct RayHit {
  SurfacePoint point;
  double t = 0.0;  // chord length from the start point
};

/// Unique second intersection q = p + t d, t > 0 of the inward ray with S.
/// Requires <d, n(p)> < -tol_grazing; solved by bracketing (F changes sign
/// along the chord by convexity) plus safeguarded Newton/bisection.
RayHit ray_intersect(const ConvexBody& body, const SurfacePoint& p, const Vec& d);

/// Specular reflection d - 2<d,n>n of a direction arriving from inside
/// (<d, n(p)> > tol_grazing required).
Vec reflect(const SurfacePoint& p, const Vec& d);

/// Alternates ray_intersect and reflect k times, returning the k bounce
/// points. Errors from the geometry kernel are rethrown with the bounce
/// index attached.
std::vector<SurfacePoint> billiard_flow(const ConvexBody& body,
                                        const SurfacePoint& p0, const Vec& d0,
                                        int k);

/// Tangent chart centered at base: x in R^N maps to
/// base + tangent_basis * x retracted back to S along the base normal.
struct Chart {
  SurfacePoint base;
  Mat tangent_basis;          // (N+1) x N, orthonormal columns
  double retraction_tol = 1e-10;
  double validity_radius = 0.0;
};

Chart make_chart(const ConvexBody& body, const SurfacePoint& base);

SurfacePoint chart_to_surface(const ConvexBody& body, const Chart& chart,
                              const Vec& x);
Vec surface_to_chart(const Chart& chart, const SurfacePoint& p);

}  // namespace billiards
