#pragma once

#include <complex>
#include <vector>

#include "billiards/configuration.hpp"

namespace billiards {

using Cplx = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;

constexpr double kTolCircle = 1e-7;

/// Cyclic block structure of the second variation of the length functional
/// at a configuration, in the deterministic per-point tangent frames.
/// Row j couples v_{j-1}, v_j, v_{j+1} (indices mod n):
///   super_j v_{j+1} + diag_j v_j + sub_j v_{j-1}
/// The diagonal block carries the chord terms plus the boundary-curvature
/// term <q_j', n_j> * (tangential shape operator); without the curvature
/// term the operator would be the ambient second derivative, which is
/// positive semidefinite and blind to the table shape.
struct CyclicBlocks {
  int n = 0;
  int N = 0;  // tangent dimension per point
  std::vector<Mat> frames;
  std::vector<double> chord;  // chord[j] = |q_{j+1} - q_j|
  std::vector<Mat> super;     // block (j, j+1)
  std::vector<Mat> diag;      // block (j, j)
  std::vector<Mat> sub;       // block (j, j-1)
};

CyclicBlocks cyclic_blocks(const ConvexBody& body, const Configuration& config);

/// Hessian of the length functional restricted to the surface, expressed
/// in per-point frames, together with the finite-difference oracle (the
/// central-difference Hessian of length-through-charts, step 1e-4).
struct HessianOperator {
  Configuration config;
  CyclicBlocks blocks;
  Mat real_matrix;  // nN x nN symmetric
  Mat fd_matrix;    // empty unless requested
  double grad_residual = 0.0;
};

/// Requires grad_residual <= tol_critical (throws NotCritical otherwise).
HessianOperator assemble_hessian(const ConvexBody& body,
                                 const Configuration& config,
                                 bool with_fd = false,
                                 double tol_critical = kTolCritical);

/// Chart Hessian of the length functional at any configuration; equals
/// real_matrix at critical ones and serves as the Newton Jacobian.
Mat hessian_matrix(const ConvexBody& body, const Configuration& config);

/// Finite-difference Hessian of length composed with the per-point charts.
Mat fd_hessian(const ConvexBody& body, const Configuration& config,
               double step = 1e-4);

/// Hermitian matrix of the operator on twisted sequences nu_{j+n} = z nu_j:
/// the (n-1, 0) wrap block picks up the phase z and (0, n-1) its conjugate.
struct TwistedHessian {
  Cplx z;
  MatC matrix;
};

TwistedHessian twisted_hessian(const HessianOperator& H, Cplx z);

struct IndexTriple {
  int ind = 0;
  int coind = 0;
  int nul = 0;
  Cplx z;
  double zero_threshold = 0.0;
  bool gap_warning = false;  // an eigenvalue fell in [threshold, 10*threshold)

  bool same_counts(const IndexTriple& o) const {
    return ind == o.ind && coind == o.coind && nul == o.nul;
  }
};

/// Eigenvalue counts below / above / inside the zero band
/// [-theta, theta], theta = 1e-7 * ||H_z||.
IndexTriple index_triple(const TwistedHessian& Hz);

struct PoincarePoint {
  Cplx z;        // unit-circle eigenvalue of the monodromy
  int nullity;   // geometric multiplicity dim ker(Phi - z I)
};

/// Linear map advancing a kernel sequence of the Hessian by one full
/// period, acting on (v_0, v_1). Unit-circle eigenvalues are the points
/// where the twisted nullity jumps.
struct Monodromy {
  Mat phi;  // 2N x 2N
  VecC eigenvalues;
  std::vector<PoincarePoint> poincare_points;
  double max_forward_cond = 0.0;
  double max_backward_cond = 0.0;  // backward transfer, validation only
};

Monodromy monodromy(const HessianOperator& H);

/// Geometric multiplicity of z as an eigenvalue of phi.
int monodromy_nullity(const Monodromy& mono, Cplx z);

/// Index triple of the m-fold iterate at twist z, split as the sum of the
/// base triples over the m distinct m-th roots of z.
IndexTriple bott_split(const HessianOperator& H, int m, Cplx z);

struct MeanIndex {
  double avind = 0.0;
  double avcoind = 0.0;
  bool quadrature_fallback = false;
};

/// Arc-length weighted average of the twisted index over the unit circle.
/// The circle is partitioned by the Poincare points, the index is constant
/// on each open arc, and each arc is sampled at its midpoint. Falls back
/// to a 1024-point quadrature when the Poincare points are numerically
/// ambiguous.
MeanIndex mean_index(const HessianOperator& H, const Monodromy& mono);
MeanIndex mean_index(const HessianOperator& H);

struct IterationRow {
  int m = 0;
  IndexTriple direct;  // assembled on the nm-point configuration
  IndexTriple bott;    // split over m-th roots of unity
  bool bott_match = false;
  bool nul_bound_ok = false;       // nul <= 2N
  bool ind_chain_ok = false;       // m*avind - 2N <= ind <= m*avind + 2N - nul
  bool coind_chain_ok = false;
  bool limit_law_ok = false;       // |ind/m - avind| <= 2N/m
  bool hypothesis_preserved = false;  // (coind, nul) equal to the m = 1 values
};

struct IterationReport {
  CriticalOrbit base;
  MeanIndex mean;
  std::vector<IterationRow> rows;
  bool all_ok = false;
};

IterationReport iteration_report(const ConvexBody& body,
                                 const CriticalOrbit& orbit,
                                 const std::vector<int>& m_list);

struct JumpRecord {
  Cplx z;
  int nullity = 0;
  bool arc_constant = true;
  bool jump_bounded = true;
  bool inconclusive = false;
};

struct SemicontinuityReport {
  std::vector<JumpRecord> jumps;
  bool arc_constancy = true;   // all arc samples share one triple
  bool jump_bounds = true;     // limits within [value, value + nullity]
  int inconclusive_count = 0;
  bool trivially_constant = false;  // no Poincare points at all
};

/// Samples the twisted indices on both sides of every Poincare point and
/// checks local constancy and the semicontinuity jump bounds.
SemicontinuityReport semicontinuity_scan(const HessianOperator& H,
                                         int samples_per_arc = 3);

}  // namespace billiards
