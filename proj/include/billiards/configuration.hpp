#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "billiards/geometry.hpp"

namespace billiards {

constexpr double kTolCritical = 1e-9;
constexpr double kTolGeo = 1e-8;
constexpr double kTolLen = 1e-8;

/// A point of the cyclic configuration space: n bounce points with
/// consecutive entries distinct (indices mod n).
struct Configuration {
  std::vector<SurfacePoint> points;
  int n() const { return static_cast<int>(points.size()); }
  const SurfacePoint& at(int j) const {
    int n_ = n();
    return points[((j % n_) + n_) % n_];
  }
};

/// Validates n >= 2 and adjacent distinctness against the body scale.
Configuration make_configuration(const ConvexBody& body,
                                 std::vector<SurfacePoint> points);

/// Smallest |q_{j+1} - q_j| over the cycle, with the attaining index.
std::pair<double, int> min_adjacent_gap(const Configuration& config);

/// Perimeter of the inscribed closed polygon. Chord lengths are summed in
/// sorted order, so the value is invariant under dihedral relabelings.
double length(const Configuration& config);

/// Tangent vectors at the bounce points, stored as coefficients in the
/// deterministic per-point frames (frame_basis of each normal).
struct TangentField {
  std::vector<Vec> comps;  // comps[j] has N entries
};

/// Frame coefficients of the tangential projection of the bisector defect
/// at each bounce point; the field vanishes exactly at billiard orbits.
TangentField length_gradient(const Configuration& config);

/// Sup-norm over all frame coefficients.
double residual(const TangentField& grad);

/// Ambient representation of a frame-coefficient field.
std::vector<Vec> ambient_field(const Configuration& config,
                               const TangentField& field);

/// m-fold concatenation (q, q, ..., q).
Configuration iterate(const Configuration& config, int m);

/// Lexicographically minimal rounded coordinate sequence over the 2n
/// dihedral relabelings; equal geometric polygons get equal keys.
std::string canonicalize(const Configuration& config, double tol_geo = kTolGeo);

/// Symmetric Hausdorff distance between the bounce point sets.
double hausdorff_distance(const Configuration& a, const Configuration& b);

/// Winding number of the closed polygon around the interior point
/// (plane bodies only); returned as a positive integer.
int rotation_number(const ConvexBody& body, const Configuration& config);

struct CriticalOrbit {
  Configuration config;
  double length = 0.0;
  double grad_residual = 0.0;
  std::string canonical_key;
  std::optional<int> rotation_number;
};

CriticalOrbit make_orbit(const ConvexBody& body, const Configuration& config);

/// True iff a and b describe geometrically distinct closed curves:
/// different canonical keys, different length or bounce sets, and neither
/// is an iterate of the other.
bool distinct(const CriticalOrbit& a, const CriticalOrbit& b,
              double tol_len = kTolLen, double tol_geo = kTolGeo);

enum class SolveMode { maximize, newton };

struct SolveOptions {
  double tol_critical = kTolCritical;
  int max_ascent_iters = 5000;
  int max_newton_iters = 200;
  double armijo = 1e-4;
  bool polish = true;  // finish maximize runs with a few Newton steps
};

struct SolveFailure {
  int seed_index = 0;
  std::string reason;
};

struct FindResult {
  std::vector<CriticalOrbit> orbits;  // deduplicated, sorted by length
  std::vector<SolveFailure> failures;
};

/// Critical points of the length functional from the given seeds.
/// maximize: projected gradient ascent with Armijo backtracking in
/// per-point charts, re-centered every step. newton: Levenberg-Marquardt
/// on the tangential gradient with the analytic Hessian as Jacobian.
FindResult find_critical(const ConvexBody& body, int n,
                         const std::vector<Configuration>& seeds,
                         SolveMode mode, const SolveOptions& options = {});

struct SeedOptions {
  int random_count = 16;
  std::uint64_t rng_seed = 1;
  bool structured = true;
  double perturbation = 0.02;  // relative to the body scale
};

/// Structured polygon seeds (coprime rotation numbers in coordinate
/// planes, several phases, plus perturbed copies) and uniformly random
/// configurations. Deterministic for a fixed rng seed.
std::vector<Configuration> make_seeds(const ConvexBody& body, int n,
                                      const SeedOptions& options);

/// Single (n, r) polygon seed in the coordinate plane (axis_a, axis_b).
Configuration polygon_seed(const ConvexBody& body, int n, int r, double phase,
                           int axis_a = 0, int axis_b = 1);

Configuration random_configuration(const ConvexBody& body, int n,
                                   std::mt19937_64& rng);

}  // namespace billiards
