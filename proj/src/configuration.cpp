#include "billiards/configuration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace billiards {

Configuration make_configuration(const ConvexBody& body,
                                 std::vector<SurfacePoint> points) {
  if (points.size() < 2)
    throw DomainError("configuration needs at least 2 points");
  Configuration config{std::move(points)};
  auto [gap, j] = min_adjacent_gap(config);
  if (gap <= body.tol_adjacent())
    throw AdjacencyViolation("adjacent bounce points " + std::to_string(j) +
                             " and " + std::to_string(j + 1) +
                             " coincide: gap " + std::to_string(gap));
  return config;
}

std::pair<double, int> min_adjacent_gap(const Configuration& config) {
  double best = std::numeric_limits<double>::infinity();
  int best_j = 0;
  int n = config.n();
  for (int j = 0; j < n; ++j) {
    double gap = (config.at(j + 1).coords - config.at(j).coords).norm();
    if (gap < best) {
      best = gap;
      best_j = j;
    }
  }
  return {best, best_j};
}

double length(const Configuration& config) {
  int n = config.n();
  std::vector<double> chords(n);
  for (int j = 0; j < n; ++j)
    chords[j] = (config.at(j + 1).coords - config.at(j).coords).norm();
  std::sort(chords.begin(), chords.end());
  return std::accumulate(chords.begin(), chords.end(), 0.0);
}

TangentField length_gradient(const Configuration& config) {
  int n = config.n();
  TangentField field;
  field.comps.resize(n);
  for (int j = 0; j < n; ++j) {
    const Vec& prev = config.at(j - 1).coords;
    const Vec& cur = config.at(j).coords;
    const Vec& next = config.at(j + 1).coords;
    Vec defect = (cur - prev).normalized() - (next - cur).normalized();
    Mat frame = frame_basis(config.at(j).unit_outward_normal);
    field.comps[j] = frame.transpose() * defect;
  }
  return field;
}

double residual(const TangentField& grad) {
  double r = 0.0;
  for (const Vec& g : grad.comps) r = std::max(r, g.lpNorm<Eigen::Infinity>());
  return r;
}

std::vector<Vec> ambient_field(const Configuration& config,
                               const TangentField& field) {
  std::vector<Vec> out(config.n());
  for (int j = 0; j < config.n(); ++j)
    out[j] = frame_basis(config.at(j).unit_outward_normal) * field.comps[j];
  return out;
}

Configuration iterate(const Configuration& config, int m) {
  if (m < 1) throw DomainError("iteration order must be >= 1");
  Configuration out;
  out.points.reserve(config.n() * m);
  for (int k = 0; k < m; ++k)
    out.points.insert(out.points.end(), config.points.begin(),
                      config.points.end());
  return out;
}

namespace {

std::vector<std::int64_t> rounded_sequence(const Configuration& config,
                                           int start, int step,
                                           double tol_geo) {
  int n = config.n();
  int d = static_cast<int>(config.points[0].coords.size());
  std::vector<std::int64_t> seq;
  seq.reserve(n * d);
  int idx = start;
  for (int k = 0; k < n; ++k) {
    const Vec& c = config.at(idx).coords;
    for (int i = 0; i < d; ++i)
      seq.push_back(static_cast<std::int64_t>(std::llround(c[i] / tol_geo)));
    idx += step;
  }
  return seq;
}

}  // namespace

std::string canonicalize(const Configuration& config, double tol_geo) {
  int n = config.n();
  std::vector<std::int64_t> best;
  for (int start = 0; start < n; ++start) {
    for (int step : {1, -1}) {
      auto seq = rounded_sequence(config, start, step, tol_geo);
      if (best.empty() || seq < best) best = std::move(seq);
    }
  }
  std::ostringstream key;
  for (size_t i = 0; i < best.size(); ++i) {
    if (i) key << ',';
    key << best[i];
  }
  return key.str();
}

double hausdorff_distance(const Configuration& a, const Configuration& b) {
  auto directed = [](const Configuration& from, const Configuration& to) {
    double worst = 0.0;
    for (const SurfacePoint& p : from.points) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const SurfacePoint& q : to.points)
        nearest = std::min(nearest, (p.coords - q.coords).norm());
      worst = std::max(worst, nearest);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

int rotation_number(const ConvexBody& body, const Configuration& config) {
  if (body.ambient_dim() != 2)
    throw AmbientDimension("rotation number is defined for plane billiards only");
  const Vec& c = body.interior_point();
  double total = 0.0;
  for (int j = 0; j < config.n(); ++j) {
    Vec u = config.at(j).coords - c;
    Vec v = config.at(j + 1).coords - c;
    double cross = u[0] * v[1] - u[1] * v[0];
    double dot = u.dot(v);
    // atan2(0, -x) = +pi, so antipodal chords turn consistently and the
    // winding of a diameter comes out as +-1.
    total += std::atan2(cross, dot);
  }
  int winding = static_cast<int>(std::llround(total / (2.0 * M_PI)));
  if (winding == 0)
    throw DomainError("polygon does not wind around the interior point");
  return std::abs(winding);
}

CriticalOrbit make_orbit(const ConvexBody& body, const Configuration& config) {
  CriticalOrbit orbit;
  orbit.config = config;
  orbit.length = length(config);
  orbit.grad_residual = residual(length_gradient(config));
  orbit.canonical_key = canonicalize(config);
  if (body.ambient_dim() == 2) {
    try {
      orbit.rotation_number = rotation_number(body, config);
    } catch (const DomainError&) {
      orbit.rotation_number.reset();
    }
  }
  return orbit;
}

bool distinct(const CriticalOrbit& a, const CriticalOrbit& b, double tol_len,
              double tol_geo) {
  auto same_curve = [&](const CriticalOrbit& x, const CriticalOrbit& y) {
    if (x.canonical_key == y.canonical_key) return true;
    return std::abs(x.length - y.length) <= tol_len &&
           hausdorff_distance(x.config, y.config) <= tol_geo;
  };
  if (a.config.n() == b.config.n()) return !same_curve(a, b);
  auto iterate_of = [&](const CriticalOrbit& longer, const CriticalOrbit& shorter) {
    if (longer.config.n() % shorter.config.n() != 0) return false;
    int m = longer.config.n() / shorter.config.n();
    CriticalOrbit lifted;
    lifted.config = iterate(shorter.config, m);
    lifted.length = m * shorter.length;
    lifted.canonical_key = canonicalize(lifted.config, tol_geo);
    return same_curve(longer, lifted);
  };
  if (a.config.n() > b.config.n()) return !iterate_of(a, b);
  return !iterate_of(b, a);
}

Configuration polygon_seed(const ConvexBody& body, int n, int r, double phase,
                           int axis_a, int axis_b) {
  int d = body.ambient_dim();
  if (axis_a == axis_b || axis_a >= d || axis_b >= d)
    throw DomainError("polygon seed needs two distinct coordinate axes");
  std::vector<SurfacePoint> pts;
  pts.reserve(n);
  for (int j = 0; j < n; ++j) {
    double angle = phase + 2.0 * M_PI * r * j / n;
    Vec u = Vec::Zero(d);
    u[axis_a] = std::cos(angle);
    u[axis_b] = std::sin(angle);
    pts.push_back(surface_point_in_direction(body, u));
  }
  return make_configuration(body, std::move(pts));
}

Configuration random_configuration(const ConvexBody& body, int n,
                                   std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  int d = body.ambient_dim();
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::vector<SurfacePoint> pts;
    pts.reserve(n);
    for (int j = 0; j < n; ++j) {
      Vec u(d);
      for (int i = 0; i < d; ++i) u[i] = gauss(rng);
      if (u.norm() < 1e-8) u = Vec::Unit(d, 0);
      pts.push_back(surface_point_in_direction(body, u));
    }
    try {
      return make_configuration(body, std::move(pts));
    } catch (const AdjacencyViolation&) {
      continue;
    }
  }
  throw NoConvergence("could not sample a valid random configuration");
}

namespace {

Configuration perturb(const ConvexBody& body, const Configuration& config,
                      double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, sigma);
  for (int attempt = 0; attempt < 50; ++attempt) {
    std::vector<SurfacePoint> pts;
    pts.reserve(config.n());
    bool ok = true;
    for (const SurfacePoint& p : config.points) {
      Chart chart = make_chart(body, p);
      Vec x(body.surface_dim());
      for (int i = 0; i < x.size(); ++i) x[i] = gauss(rng);
      try {
        pts.push_back(chart_to_surface(body, chart, x));
      } catch (const OutOfChart&) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    try {
      return make_configuration(body, std::move(pts));
    } catch (const AdjacencyViolation&) {
      continue;
    }
  }
  return config;
}

}  // namespace

std::vector<Configuration> make_seeds(const ConvexBody& body, int n,
                                      const SeedOptions& options) {
  std::vector<Configuration> seeds;
  std::mt19937_64 rng(options.rng_seed);
  if (options.structured) {
    int d = body.ambient_dim();
    std::vector<std::pair<int, int>> planes;
    for (int a = 0; a < d && planes.size() < 3; ++a)
      for (int b = a + 1; b < d && planes.size() < 3; ++b)
        planes.emplace_back(a, b);
    for (int r = 1; 2 * r <= n; ++r) {
      if (std::gcd(n, r) != 1) continue;
      for (auto [a, b] : planes) {
        for (double phase : {0.0, M_PI / (2.0 * n)}) {
          try {
            Configuration seed = polygon_seed(body, n, r, phase, a, b);
            seeds.push_back(seed);
            seeds.push_back(perturb(body, seed,
                                    options.perturbation * body.diameter_scale(),
                                    rng));
          } catch (const AdjacencyViolation&) {
          } catch (const NoConvergence&) {
          }
        }
      }
    }
  }
  for (int k = 0; k < options.random_count; ++k)
    seeds.push_back(random_configuration(body, n, rng));
  return seeds;
}

}  // namespace billiards
