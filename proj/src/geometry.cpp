#include "billiards/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace billiards {

namespace {

double machine_level_tol(const ConvexBody& body) {
  return 1e-14 * std::max(1.0, body.diameter_scale());
}

// Deterministic off-axis probe directions used by the construction-time
// strict-convexity sample. Diagonal directions keep all coordinates
// nonzero, where even superellipsoids are strictly curved.
std::vector<Vec> probe_directions(int dim) {
  std::vector<Vec> dirs;
  int patterns = std::min(1 << (dim - 1), 8);
  for (int s = 0; s < patterns; ++s) {
    Vec u(dim);
    for (int i = 0; i < dim; ++i) u[i] = (s >> i) & 1 ? -1.0 : 1.0;
    dirs.push_back(u.normalized());
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = u[i] * (1.0 + 0.37 * i);
    dirs.push_back(v.normalized());
  }
  return dirs;
}

}  // namespace

ConvexBody::ConvexBody(int ambient_dim, LevelFn level, GradFn grad, HessFn hess,
                       Vec interior_point, double diameter_scale,
                       std::string name)
    : ambient_dim_(ambient_dim),
      level_(std::move(level)),
      grad_(std::move(grad)),
      hess_(std::move(hess)),
      interior_(std::move(interior_point)),
      scale_(diameter_scale),
      name_(std::move(name)) {
  if (ambient_dim_ < 2) throw InvalidBody("ambient dimension must be >= 2");
  if (interior_.size() != ambient_dim_)
    throw InvalidBody("interior point has wrong dimension");
  if (scale_ <= 0.0) throw InvalidBody("diameter scale must be positive");
  double f0 = level_(interior_);
  if (f0 == 0.0) throw InvalidBody("interior point lies on the surface");
  sign_ = f0 < 0.0 ? 1.0 : -1.0;

  // Sampled strict-convexity check along generic directions; the pointwise
  // test in make_surface_point guards every point actually used.
  for (const Vec& u : probe_directions(ambient_dim_)) {
    SurfacePoint p = surface_point_in_direction(*this, u);
    Mat basis = frame_basis(p.unit_outward_normal);
    Vec g = level_gradient(p.coords);
    Mat shape = basis.transpose() * level_hessian(p.coords) * basis / g.norm();
    Eigen::SelfAdjointEigenSolver<Mat> es(shape);
    if (es.eigenvalues().minCoeff() <= 1e-10 * (1.0 + shape.norm()))
      throw InvalidBody("second fundamental form not positive definite at sampled point");
  }
}

Vec ConvexBody::unit_outward_normal(const Vec& x) const {
  Vec g = level_gradient(x);
  double norm = g.norm();
  if (norm < 1e-12 * std::max(1.0, scale_))
    throw InvalidBody("level gradient vanishes at queried point");
  return g / norm;
}

ConvexBody make_sphere(int ambient_dim, double radius) {
  if (radius <= 0.0) throw InvalidBody("sphere radius must be positive");
  double r2 = radius * radius;
  auto level = [r2](const Vec& x) { return x.squaredNorm() / r2 - 1.0; };
  auto grad = [r2](const Vec& x) { return Vec(2.0 * x / r2); };
  auto hess = [r2](const Vec& x) {
    return Mat(2.0 / r2 * Mat::Identity(x.size(), x.size()));
  };
  std::ostringstream name;
  name << (ambient_dim == 2 ? "circle " : "sphere ") << radius;
  return ConvexBody(ambient_dim, level, grad, hess, Vec::Zero(ambient_dim),
                    2.0 * radius, name.str());
}

ConvexBody make_ellipsoid(const Vec& semi_axes) {
  int dim = static_cast<int>(semi_axes.size());
  if ((semi_axes.array() <= 0.0).any())
    throw InvalidBody("ellipsoid semi-axes must be positive");
  Vec inv2 = semi_axes.array().square().inverse();
  auto level = [inv2](const Vec& x) {
    return (x.array().square() * inv2.array()).sum() - 1.0;
  };
  auto grad = [inv2](const Vec& x) { return Vec(2.0 * x.array() * inv2.array()); };
  auto hess = [inv2](const Vec& x) {
    return Mat((2.0 * inv2).asDiagonal());
  };
  std::ostringstream name;
  name << (dim == 2 ? "ellipse" : "ellipsoid");
  for (int i = 0; i < dim; ++i) name << ' ' << semi_axes[i];
  return ConvexBody(dim, level, grad, hess, Vec::Zero(dim),
                    2.0 * semi_axes.maxCoeff(), name.str());
}

ConvexBody make_superellipsoid(const Vec& semi_axes, int exponent) {
  int dim = static_cast<int>(semi_axes.size());
  if ((semi_axes.array() <= 0.0).any())
    throw InvalidBody("superellipsoid semi-axes must be positive");
  if (exponent < 2 || exponent % 2 != 0)
    throw InvalidBody("superellipsoid exponent must be even and >= 2");
  double p = exponent;
  Vec a = semi_axes;
  auto level = [a, p](const Vec& x) {
    double s = 0.0;
    for (int i = 0; i < x.size(); ++i) s += std::pow(x[i] / a[i], p);
    return s - 1.0;
  };
  auto grad = [a, p](const Vec& x) {
    Vec g(x.size());
    for (int i = 0; i < x.size(); ++i)
      g[i] = p * std::pow(x[i] / a[i], p - 1.0) / a[i];
    return g;
  };
  auto hess = [a, p](const Vec& x) {
    Mat h = Mat::Zero(x.size(), x.size());
    for (int i = 0; i < x.size(); ++i)
      h(i, i) = p * (p - 1.0) * std::pow(x[i] / a[i], p - 2.0) / (a[i] * a[i]);
    return h;
  };
  std::ostringstream name;
  name << "superellipsoid " << exponent;
  for (int i = 0; i < dim; ++i) name << ' ' << semi_axes[i];
  return ConvexBody(dim, level, grad, hess, Vec::Zero(dim),
                    2.0 * semi_axes.maxCoeff(), name.str());
}

ConvexBody make_body(const std::string& spec) {
  std::istringstream in(spec);
  std::string kind;
  in >> kind;
  std::vector<double> params;
  double v;
  while (in >> v) params.push_back(v);
  auto need = [&](size_t k) {
    if (params.size() < k)
      throw DomainError("body spec '" + spec + "' needs " + std::to_string(k) +
                        " numeric parameter(s)");
  };
  if (kind == "circle") {
    need(1);
    return make_sphere(2, params[0]);
  }
  if (kind == "sphere") {
    need(1);
    int dim = params.size() >= 2 ? static_cast<int>(params[1]) : 3;
    return make_sphere(dim, params[0]);
  }
  if (kind == "ellipse" || kind == "ellipsoid") {
    need(2);
    Vec axes = Eigen::Map<Vec>(params.data(), params.size());
    return make_ellipsoid(axes);
  }
  if (kind == "superellipsoid") {
    need(3);
    Vec axes = Eigen::Map<Vec>(params.data() + 1, params.size() - 1);
    return make_superellipsoid(axes, static_cast<int>(params[0]));
  }
  throw DomainError("unknown body kind '" + kind + "'");
}

SurfacePoint make_surface_point(const ConvexBody& body, const Vec& coords) {
  if (coords.size() != body.ambient_dim())
    throw DomainError("point has wrong ambient dimension");
  double residual = std::abs(body.level(coords));
  if (residual > body.tol_surface())
    throw DomainError("point is off the surface: |F| = " + std::to_string(residual));
  Vec n = body.unit_outward_normal(coords);
  if (n.dot(coords - body.interior_point()) <= 0.0)
    throw InvalidBody("normal not outward at queried point");
  Mat basis = frame_basis(n);
  Vec g = body.level_gradient(coords);
  Mat shape = basis.transpose() * body.level_hessian(coords) * basis / g.norm();
  Eigen::SelfAdjointEigenSolver<Mat> es(shape);
  if (es.eigenvalues().minCoeff() < -1e-9 * (1.0 + shape.norm()))
    throw InvalidBody("surface not convex at queried point");
  return SurfacePoint{coords, n, residual};
}

SurfacePoint project_to_surface(const ConvexBody& body, const Vec& approx) {
  Vec y = approx;
  for (int it = 0; it < 100; ++it) {
    double f = body.level(y);
    if (std::abs(f) <= machine_level_tol(body)) break;
    Vec g = body.level_gradient(y);
    double g2 = g.squaredNorm();
    if (g2 < 1e-24) throw NoConvergence("surface projection: vanishing gradient");
    y -= f / g2 * g;
  }
  if (std::abs(body.level(y)) > body.tol_surface())
    throw NoConvergence("surface projection did not reach tolerance");
  return make_surface_point(body, y);
}

SurfacePoint surface_point_in_direction(const ConvexBody& body, const Vec& u) {
  const Vec& c = body.interior_point();
  Vec d = u.normalized();
  double t = 0.25 * body.diameter_scale();
  int guard = 0;
  while (body.level(c + t * d) <= 0.0) {
    t *= 2.0;
    if (++guard > 60) throw NoConvergence("ray from interior never exits body");
  }
  double lo = 0.0, hi = t;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double f = body.level(c + mid * d);
    if (std::abs(f) <= machine_level_tol(body)) {
      lo = hi = mid;
      break;
    }
    (f < 0.0 ? lo : hi) = mid;
    double gp = body.level_gradient(c + mid * d).dot(d);
    if (gp > 0.0) {
      double nt = mid - f / gp;
      if (nt > lo && nt < hi) {
        double nf = body.level(c + nt * d);
        (nf < 0.0 ? lo : hi) = nt;
      }
    }
    if (hi - lo < 1e-16 * body.diameter_scale()) break;
  }
  return project_to_surface(body, c + 0.5 * (lo + hi) * d);
}

Mat frame_basis(const Vec& unit_normal) {
  int d = static_cast<int>(unit_normal.size());
  std::vector<int> axes(d);
  std::iota(axes.begin(), axes.end(), 0);
  std::stable_sort(axes.begin(), axes.end(), [&](int a, int b) {
    return std::abs(unit_normal[a]) < std::abs(unit_normal[b]);
  });
  Mat basis(d, d - 1);
  int col = 0;
  for (int k = 0; k < d && col < d - 1; ++k) {
    Vec e = Vec::Unit(d, axes[k]);
    e -= e.dot(unit_normal) * unit_normal;
    for (int j = 0; j < col; ++j) e -= e.dot(basis.col(j)) * basis.col(j);
    double norm = e.norm();
    if (norm < 1e-8) continue;
    basis.col(col++) = e / norm;
  }
  if (col != d - 1) throw InvalidBody("tangent frame construction failed");
  return basis;
}

Vec project_tangent(const SurfacePoint& p, const Vec& v) {
  const Vec& n = p.unit_outward_normal;
  return v - v.dot(n) * n;
}

Vec project_chord_orthogonal(const Vec& u, const Vec& v) {
  if (std::abs(u.norm() - 1.0) > 1e-10)
    throw DomainError("chord direction must be a unit vector");
  return v - v.dot(u) * u;
}

RayHit ray_intersect(const ConvexBody& body, const SurfacePoint& p, const Vec& d) {
  if (std::abs(d.norm() - 1.0) > 1e-10)
    throw DomainError("ray direction must be a unit vector");
  double cosine = d.dot(p.unit_outward_normal);
  if (cosine >= -kTolGrazing)
    throw GrazingRay("ray is tangential or outward: <d,n> = " + std::to_string(cosine));

  auto g = [&](double t) { return body.level(p.coords + t * d); };

  // Initial step from the quadratic model of F along the chord, then
  // geometric expansion/shrinking until F changes sign.
  double slope = body.level_gradient(p.coords).dot(d);
  double quad = d.dot(body.level_hessian(p.coords) * d);
  double t = 2.0 * std::abs(slope) / std::max(quad, 1e-8);
  t = std::clamp(t, 1e-6 * body.diameter_scale(), 4.0 * body.diameter_scale());

  double lo = 0.0, hi = 0.0;
  if (g(t) > 0.0) {
    hi = t;
    double s = t;
    int guard = 0;
    while (g(s *= 0.5) > 0.0) {
      hi = s;
      if (++guard > 80 || s < 1e-14 * body.diameter_scale())
        throw GrazingRay("no interior segment found along ray");
    }
    lo = s;
  } else {
    lo = t;
    int guard = 0;
    while (g(t *= 2.0) <= 0.0) {
      lo = t;
      if (++guard > 60) throw NoConvergence("ray never exits the body");
    }
    hi = t;
  }

  // Safeguarded Newton on the bracket [lo, hi], g(lo) <= 0 < g(hi).
  double x = 0.5 * (lo + hi);
  double fx = g(x);
  for (int it = 0; it < 200; ++it) {
    if (std::abs(fx) <= machine_level_tol(body) || hi - lo <= 1e-16 * body.diameter_scale())
      break;
    (fx <= 0.0 ? lo : hi) = x;
    double gp = body.level_gradient(p.coords + x * d).dot(d);
    double nx = gp != 0.0 ? x - fx / gp : x;
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    x = nx;
    fx = g(x);
  }
  if (std::abs(fx) > body.tol_surface())
    throw NoConvergence("ray intersection residual " + std::to_string(std::abs(fx)));
  if (x <= kTolGrazing)
    throw GrazingRay("ray intersection collapses onto the start point");
  return RayHit{make_surface_point(body, p.coords + x * d), x};
}

Vec reflect(const SurfacePoint& p, const Vec& d) {
  if (std::abs(d.norm() - 1.0) > 1e-10)
    throw DomainError("incoming direction must be a unit vector");
  double cosine = d.dot(p.unit_outward_normal);
  if (std::abs(cosine) <= kTolGrazing)
    throw GrazingRay("grazing incidence: <d,n> = " + std::to_string(cosine));
  if (cosine < 0.0)
    throw DomainError("incoming direction must arrive from inside");
  return d - 2.0 * cosine * p.unit_outward_normal;
}

std::vector<SurfacePoint> billiard_flow(const ConvexBody& body,
                                        const SurfacePoint& p0, const Vec& d0,
                                        int k) {
  if (k < 1) throw DomainError("bounce count must be >= 1");
  if (d0.dot(p0.unit_outward_normal) >= -kTolGrazing)
    throw GrazingRay("initial direction is not strictly inward");
  std::vector<SurfacePoint> bounces;
  bounces.reserve(k);
  SurfacePoint cur = p0;
  Vec dir = d0.normalized();
  for (int i = 0; i < k; ++i) {
    auto with_index = [&](const char* what) {
      return "bounce " + std::to_string(i) + ": " + what;
    };
    try {
      RayHit hit = ray_intersect(body, cur, dir);
      bounces.push_back(hit.point);
      cur = hit.point;
      if (i + 1 < k) dir = reflect(cur, dir);
    } catch (const GrazingRay& e) {
      throw GrazingRay(with_index(e.what()));
    } catch (const NoConvergence& e) {
      throw NoConvergence(with_index(e.what()));
    }
  }
  return bounces;
}

Chart make_chart(const ConvexBody& body, const SurfacePoint& base) {
  Chart chart;
  chart.base = base;
  chart.tangent_basis = frame_basis(base.unit_outward_normal);
  chart.retraction_tol = 1e-10;
  chart.validity_radius = 0.45 * body.diameter_scale();
  return chart;
}

SurfacePoint chart_to_surface(const ConvexBody& body, const Chart& chart,
                              const Vec& x) {
  if (x.size() != chart.tangent_basis.cols())
    throw DomainError("chart coordinate has wrong dimension");
  if (x.norm() > chart.validity_radius)
    throw OutOfChart("chart coordinate outside validity radius");
  Vec y = chart.base.coords + chart.tangent_basis * x;
  const Vec& n = chart.base.unit_outward_normal;
  double t = 0.0;
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    double f = body.level(y + t * n);
    if (std::abs(f) <= machine_level_tol(body)) {
      converged = true;
      break;
    }
    double gp = body.level_gradient(y + t * n).dot(n);
    if (std::abs(gp) < 1e-14)
      throw OutOfChart("normal line tangent to the surface");
    t -= f / gp;
    if (std::abs(t) > chart.validity_radius + 0.6 * body.diameter_scale())
      throw OutOfChart("retraction left the chart neighborhood");
  }
  if (!converged && std::abs(body.level(y + t * n)) > body.tol_surface())
    throw OutOfChart("normal retraction did not converge");
  return make_surface_point(body, y + t * n);
}

Vec surface_to_chart(const Chart& chart, const SurfacePoint& p) {
  Vec x = chart.tangent_basis.transpose() * (p.coords - chart.base.coords);
  if (x.norm() > chart.validity_radius)
    throw OutOfChart("point outside chart validity radius");
  return x;
}

}  // namespace billiards
