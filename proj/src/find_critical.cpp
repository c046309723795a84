#include <algorithm>
#include <cmath>

#include "billiards/configuration.hpp"
#include "billiards/spectral.hpp"

namespace billiards {

namespace {

Vec stacked_gradient(const Configuration& config) {
  TangentField g = length_gradient(config);
  int n = config.n();
  int N = static_cast<int>(g.comps[0].size());
  Vec out(n * N);
  for (int j = 0; j < n; ++j) out.segment(j * N, N) = g.comps[j];
  return out;
}

// Moves every point by its chart offset; throws SeedCollapsed when the
// adjacency invariant breaks during iteration.
Configuration move_in_charts(const ConvexBody& body, const Configuration& config,
                             const Vec& offsets) {
  int n = config.n();
  int N = body.surface_dim();
  std::vector<SurfacePoint> pts(n);
  for (int j = 0; j < n; ++j) {
    Chart chart = make_chart(body, config.points[j]);
    pts[j] = chart_to_surface(body, chart, offsets.segment(j * N, N));
  }
  Configuration moved{std::move(pts)};
  auto [gap, idx] = min_adjacent_gap(moved);
  if (gap <= body.tol_adjacent())
    throw SeedCollapsed("adjacent points " + std::to_string(idx) + "," +
                        std::to_string(idx + 1) + " collapsed during iteration");
  return moved;
}

Configuration ascend(const ConvexBody& body, Configuration config,
                     const SolveOptions& opt) {
  double step_cap = 0.2 * body.diameter_scale();
  int stalled = 0;
  for (int it = 0; it < opt.max_ascent_iters; ++it) {
    Vec g = stacked_gradient(config);
    double gnorm = g.norm();
    if (g.lpNorm<Eigen::Infinity>() <= opt.tol_critical) return config;
    double L0 = length(config);
    double alpha = std::min(1.0, step_cap / std::max(gnorm, 1e-300));
    bool accepted = false;
    for (int bt = 0; bt < 45; ++bt) {
      try {
        Configuration trial = move_in_charts(body, config, alpha * g);
        if (length(trial) >= L0 + opt.armijo * alpha * gnorm * gnorm) {
          config = std::move(trial);
          accepted = true;
          break;
        }
      } catch (const OutOfChart&) {
        // shrink and retry
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (++stalled > 3)
        throw NoConvergence("ascent stalled at residual " +
                            std::to_string(g.lpNorm<Eigen::Infinity>()));
    } else {
      stalled = 0;
    }
  }
  Vec g = stacked_gradient(config);
  if (g.lpNorm<Eigen::Infinity>() <= opt.tol_critical) return config;
  throw NoConvergence("ascent did not reach the critical tolerance");
}

Configuration newton_polish(const ConvexBody& body, Configuration config,
                            const SolveOptions& opt) {
  double lambda = 1e-6;
  double step_cap = 0.25 * body.diameter_scale();
  int dim = config.n() * body.surface_dim();
  for (int it = 0; it < opt.max_newton_iters; ++it) {
    Vec g = stacked_gradient(config);
    double res = g.lpNorm<Eigen::Infinity>();
    if (res <= opt.tol_critical) return config;
    Mat H = hessian_matrix(body, config);
    bool accepted = false;
    for (int inner = 0; inner < 30; ++inner) {
      Mat A = H * H + lambda * Mat::Identity(dim, dim);
      Vec delta = A.ldlt().solve(-H * g);
      double dmax = delta.lpNorm<Eigen::Infinity>();
      if (dmax > step_cap) delta *= step_cap / dmax;
      try {
        Configuration trial = move_in_charts(body, config, delta);
        if (stacked_gradient(trial).lpNorm<Eigen::Infinity>() < res) {
          config = std::move(trial);
          lambda = std::max(lambda / 3.0, 1e-12);
          accepted = true;
          break;
        }
      } catch (const OutOfChart&) {
      }
      lambda = std::min(lambda * 4.0, 1e10);
    }
    if (!accepted)
      throw NoConvergence("damped Newton stalled at residual " +
                          std::to_string(res));
  }
  Vec g = stacked_gradient(config);
  if (g.lpNorm<Eigen::Infinity>() <= opt.tol_critical) return config;
  throw NoConvergence("Newton did not reach the critical tolerance");
}

}  // namespace

FindResult find_critical(const ConvexBody& body, int n,
                         const std::vector<Configuration>& seeds,
                         SolveMode mode, const SolveOptions& options) {
  if (n < 2) throw DomainError("orbit period must be >= 2");
  FindResult result;
  std::vector<CriticalOrbit> found;
  for (size_t s = 0; s < seeds.size(); ++s) {
    const Configuration& seed = seeds[s];
    if (seed.n() != n) {
      result.failures.push_back({static_cast<int>(s), "seed has wrong period"});
      continue;
    }
    try {
      Configuration solved = mode == SolveMode::maximize
                                 ? ascend(body, seed, options)
                                 : newton_polish(body, seed, options);
      if (mode == SolveMode::maximize && options.polish) {
        SolveOptions tight = options;
        tight.tol_critical = std::min(options.tol_critical, 1e-11);
        try {
          solved = newton_polish(body, solved, tight);
        } catch (const NoConvergence&) {
          // keep the ascent result; it already satisfies the tolerance
        }
      }
      found.push_back(make_orbit(body, solved));
    } catch (const SeedCollapsed& e) {
      result.failures.push_back({static_cast<int>(s), e.what()});
    } catch (const NoConvergence& e) {
      result.failures.push_back({static_cast<int>(s), e.what()});
    } catch (const OutOfChart& e) {
      result.failures.push_back({static_cast<int>(s), e.what()});
    }
  }

  std::sort(found.begin(), found.end(),
            [](const CriticalOrbit& a, const CriticalOrbit& b) {
              if (a.length != b.length) return a.length < b.length;
              return a.canonical_key < b.canonical_key;
            });
  for (const CriticalOrbit& candidate : found) {
    bool fresh = true;
    for (const CriticalOrbit& kept : result.orbits)
      if (!distinct(kept, candidate)) {
        fresh = false;
        break;
      }
    if (fresh) result.orbits.push_back(candidate);
  }
  return result;
}

}  // namespace billiards
