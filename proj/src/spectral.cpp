#include "billiards/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace billiards {

namespace {

constexpr double kZeroBandFactor = 1e-7;

}  // namespace

CyclicBlocks cyclic_blocks(const ConvexBody& body, const Configuration& config) {
  int n = config.n();
  int N = body.surface_dim();
  int d = body.ambient_dim();
  CyclicBlocks blocks;
  blocks.n = n;
  blocks.N = N;
  blocks.frames.resize(n);
  blocks.chord.resize(n);
  blocks.super.resize(n);
  blocks.diag.resize(n);
  blocks.sub.resize(n);

  std::vector<Vec> u(n);  // unit chord directions q_j -> q_{j+1}
  for (int j = 0; j < n; ++j) {
    blocks.frames[j] = frame_basis(config.at(j).unit_outward_normal);
    Vec chord = config.at(j + 1).coords - config.at(j).coords;
    blocks.chord[j] = chord.norm();
    u[j] = chord / blocks.chord[j];
  }

  auto chord_projector = [&](int j) {
    return Mat(Mat::Identity(d, d) - u[j] * u[j].transpose());
  };

  for (int j = 0; j < n; ++j) {
    int jm = (j + n - 1) % n;
    int jp = (j + 1) % n;
    const Mat& E = blocks.frames[j];
    Mat P_fwd = chord_projector(j);   // off the chord q_j -> q_{j+1}
    Mat P_bwd = chord_projector(jm);  // off the chord q_{j-1} -> q_j
    double lf = blocks.chord[j];
    double lb = blocks.chord[jm];

    blocks.super[j] = -(1.0 / lf) * E.transpose() * P_fwd * blocks.frames[jp];
    blocks.sub[j] = -(1.0 / lb) * E.transpose() * P_bwd * blocks.frames[jm];

    const Vec& normal = config.at(j).unit_outward_normal;
    double defect_normal = (u[jm] - u[j]).dot(normal);
    Vec g = body.level_gradient(config.at(j).coords);
    Mat shape = E.transpose() * body.level_hessian(config.at(j).coords) * E /
                g.norm();
    blocks.diag[j] = (1.0 / lf) * E.transpose() * P_fwd * E +
                     (1.0 / lb) * E.transpose() * P_bwd * E -
                     defect_normal * shape;
  }
  return blocks;
}

namespace {

Mat real_matrix_from_blocks(const CyclicBlocks& b) {
  int n = b.n, N = b.N;
  Mat H = Mat::Zero(n * N, n * N);
  for (int j = 0; j < n; ++j) {
    int jm = (j + n - 1) % n;
    int jp = (j + 1) % n;
    H.block(j * N, j * N, N, N) += b.diag[j];
    H.block(j * N, jp * N, N, N) += b.super[j];
    H.block(j * N, jm * N, N, N) += b.sub[j];
  }
  return H;
}

}  // namespace

Mat fd_hessian(const ConvexBody& body, const Configuration& config,
               double step) {
  int n = config.n();
  int N = body.surface_dim();
  std::vector<Chart> charts(n);
  for (int j = 0; j < n; ++j) charts[j] = make_chart(body, config.points[j]);

  auto eval = [&](const Vec& x) {
    std::vector<SurfacePoint> pts(n);
    for (int j = 0; j < n; ++j)
      pts[j] = chart_to_surface(body, charts[j], x.segment(j * N, N));
    double L = 0.0;
    for (int j = 0; j < n; ++j)
      L += (pts[(j + 1) % n].coords - pts[j].coords).norm();
    return L;
  };

  int dim = n * N;
  Mat H(dim, dim);
  Vec x0 = Vec::Zero(dim);
  double f0 = eval(x0);
  for (int a = 0; a < dim; ++a) {
    Vec xp = x0, xm = x0;
    xp[a] += step;
    xm[a] -= step;
    H(a, a) = (eval(xp) - 2.0 * f0 + eval(xm)) / (step * step);
    for (int bcol = a + 1; bcol < dim; ++bcol) {
      Vec xpp = x0, xpm = x0, xmp = x0, xmm = x0;
      xpp[a] += step; xpp[bcol] += step;
      xpm[a] += step; xpm[bcol] -= step;
      xmp[a] -= step; xmp[bcol] += step;
      xmm[a] -= step; xmm[bcol] -= step;
      double v = (eval(xpp) - eval(xpm) - eval(xmp) + eval(xmm)) /
                 (4.0 * step * step);
      H(a, bcol) = v;
      H(bcol, a) = v;
    }
  }
  return H;
}

Mat hessian_matrix(const ConvexBody& body, const Configuration& config) {
  return real_matrix_from_blocks(cyclic_blocks(body, config));
}

HessianOperator assemble_hessian(const ConvexBody& body,
                                 const Configuration& config, bool with_fd,
                                 double tol_critical) {
  HessianOperator H;
  H.config = config;
  H.grad_residual = residual(length_gradient(config));
  if (H.grad_residual > tol_critical)
    throw NotCritical("gradient residual " + std::to_string(H.grad_residual) +
                      " exceeds " + std::to_string(tol_critical));
  H.blocks = cyclic_blocks(body, config);
  H.real_matrix = real_matrix_from_blocks(H.blocks);
  if (with_fd) H.fd_matrix = fd_hessian(body, config);
  return H;
}

TwistedHessian twisted_hessian(const HessianOperator& H, Cplx z) {
  if (std::abs(std::abs(z) - 1.0) > 1e-12)
    throw NonUnitTwist("twist must lie on the unit circle, |z| = " +
                       std::to_string(std::abs(z)));
  const CyclicBlocks& b = H.blocks;
  int n = b.n, N = b.N;
  MatC M = MatC::Zero(n * N, n * N);
  for (int j = 0; j < n; ++j) {
    int jm = (j + n - 1) % n;
    int jp = (j + 1) % n;
    M.block(j * N, j * N, N, N) += b.diag[j].cast<Cplx>();
    Cplx super_phase = (jp == 0) ? z : Cplx(1.0);
    Cplx sub_phase = (j == 0) ? std::conj(z) : Cplx(1.0);
    M.block(j * N, jp * N, N, N) += super_phase * b.super[j].cast<Cplx>();
    M.block(j * N, jm * N, N, N) += sub_phase * b.sub[j].cast<Cplx>();
  }
  return TwistedHessian{z, std::move(M)};
}

IndexTriple index_triple(const TwistedHessian& Hz) {
  Eigen::SelfAdjointEigenSolver<MatC> es(Hz.matrix,
                                         Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw EigenFailure("Hermitian eigensolver failed");
  const Vec& ev = es.eigenvalues();
  double norm = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  double theta = kZeroBandFactor * norm;
  IndexTriple t;
  t.z = Hz.z;
  t.zero_threshold = theta;
  for (int i = 0; i < ev.size(); ++i) {
    double lam = ev[i];
    if (lam < -theta)
      ++t.ind;
    else if (lam > theta)
      ++t.coind;
    else
      ++t.nul;
    double mag = std::abs(lam);
    if (mag >= theta && mag < 10.0 * theta) t.gap_warning = true;
  }
  return t;
}

namespace {

double condition_number(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  return smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

Monodromy monodromy(const HessianOperator& H) {
  const CyclicBlocks& b = H.blocks;
  int n = b.n, N = b.N;
  Monodromy mono;
  mono.phi = Mat::Identity(2 * N, 2 * N);

  // Row j solved for v_{j+1}: super_j v_{j+1} = -(diag_j v_j + sub_j v_{j-1}).
  // Steps j = 1, ..., n-1, 0 advance (v_0, v_1) to (v_n, v_{n+1}).
  for (int step = 1; step <= n; ++step) {
    int j = step % n;
    double fwd_cond = condition_number(b.super[j]);
    double bwd_cond = condition_number(b.sub[j]);
    mono.max_forward_cond = std::max(mono.max_forward_cond, fwd_cond);
    mono.max_backward_cond = std::max(mono.max_backward_cond, bwd_cond);
    if (fwd_cond > 1e12)
      throw TransferSingular("transfer step " + std::to_string(j) +
                             " has condition number " + std::to_string(fwd_cond));
    Eigen::PartialPivLU<Mat> lu(b.super[j]);
    Mat A = -lu.solve(b.diag[j]);  // coefficient of v_j
    Mat B = -lu.solve(b.sub[j]);   // coefficient of v_{j-1}
    Mat T = Mat::Zero(2 * N, 2 * N);
    T.block(0, N, N, N) = Mat::Identity(N, N);
    T.block(N, 0, N, N) = B;
    T.block(N, N, N, N) = A;
    mono.phi = T * mono.phi;
  }

  Eigen::EigenSolver<Mat> es(mono.phi, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw EigenFailure("monodromy eigensolver failed");
  mono.eigenvalues = es.eigenvalues();

  // Cluster unit-circle eigenvalues and attach geometric multiplicities.
  std::vector<Cplx> unit;
  for (int i = 0; i < mono.eigenvalues.size(); ++i) {
    Cplx lam = mono.eigenvalues[i];
    if (std::abs(std::abs(lam) - 1.0) <= kTolCircle)
      unit.push_back(lam / std::abs(lam));
  }
  std::sort(unit.begin(), unit.end(), [](Cplx a, Cplx b) {
    return std::arg(a) < std::arg(b);
  });
  for (const Cplx& z : unit) {
    bool merged = false;
    for (PoincarePoint& p : mono.poincare_points)
      if (std::abs(p.z - z) <= 1e-6) {
        merged = true;
        break;
      }
    if (!merged) mono.poincare_points.push_back({z, 0});
  }
  for (PoincarePoint& p : mono.poincare_points)
    p.nullity = monodromy_nullity(mono, p.z);
  return mono;
}

int monodromy_nullity(const Monodromy& mono, Cplx z) {
  MatC M = mono.phi.cast<Cplx>() - z * MatC::Identity(mono.phi.rows(),
                                                      mono.phi.cols());
  Eigen::JacobiSVD<MatC> svd(M);
  const Vec& sv = svd.singularValues();
  double smax = std::max(sv.maxCoeff(), 1e-300);
  int nullity = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] <= kZeroBandFactor * smax) ++nullity;
  return nullity;
}

IndexTriple bott_split(const HessianOperator& H, int m, Cplx z) {
  if (m < 1) throw DomainError("iteration order must be >= 1");
  double phase = std::arg(z);
  IndexTriple total;
  total.z = z;
  for (int k = 0; k < m; ++k) {
    Cplx root = std::polar(1.0, (phase + 2.0 * M_PI * k) / m);
    IndexTriple part = index_triple(twisted_hessian(H, root));
    total.ind += part.ind;
    total.coind += part.coind;
    total.nul += part.nul;
    total.zero_threshold = std::max(total.zero_threshold, part.zero_threshold);
    total.gap_warning = total.gap_warning || part.gap_warning;
  }
  return total;
}

namespace {

bool poincare_points_ambiguous(const Monodromy& mono) {
  for (int i = 0; i < mono.eigenvalues.size(); ++i) {
    double off = std::abs(std::abs(mono.eigenvalues[i]) - 1.0);
    if (off > kTolCircle && off < 1e-4) return true;
  }
  // Distinct detected points closer than the sampling headroom also make
  // the arc partition unreliable.
  const auto& pts = mono.poincare_points;
  for (size_t a = 0; a < pts.size(); ++a)
    for (size_t b = a + 1; b < pts.size(); ++b)
      if (std::abs(pts[a].z - pts[b].z) < 1e-5) return true;
  return false;
}

std::vector<double> sorted_angles(const Monodromy& mono) {
  std::vector<double> angles;
  for (const PoincarePoint& p : mono.poincare_points) {
    double a = std::arg(p.z);
    if (a < 0.0) a += 2.0 * M_PI;
    angles.push_back(a);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

}  // namespace

MeanIndex mean_index(const HessianOperator& H, const Monodromy& mono) {
  MeanIndex mean;
  if (poincare_points_ambiguous(mono)) {
    mean.quadrature_fallback = true;
    const int K = 1024;
    double si = 0.0, sc = 0.0;
    for (int k = 0; k < K; ++k) {
      IndexTriple t = index_triple(
          twisted_hessian(H, std::polar(1.0, 2.0 * M_PI * (k + 0.5) / K)));
      si += t.ind;
      sc += t.coind;
    }
    mean.avind = si / K;
    mean.avcoind = sc / K;
    return mean;
  }

  std::vector<double> angles = sorted_angles(mono);
  if (angles.empty()) {
    IndexTriple t = index_triple(twisted_hessian(H, Cplx(1.0, 0.0)));
    mean.avind = t.ind;
    mean.avcoind = t.coind;
    return mean;
  }
  double total_i = 0.0, total_c = 0.0;
  int r = static_cast<int>(angles.size());
  for (int a = 0; a < r; ++a) {
    double lo = angles[a];
    double hi = (a + 1 < r) ? angles[a + 1] : angles[0] + 2.0 * M_PI;
    double span = hi - lo;
    if (span <= 0.0) continue;
    IndexTriple t =
        index_triple(twisted_hessian(H, std::polar(1.0, 0.5 * (lo + hi))));
    total_i += span * t.ind;
    total_c += span * t.coind;
  }
  mean.avind = total_i / (2.0 * M_PI);
  mean.avcoind = total_c / (2.0 * M_PI);
  return mean;
}

MeanIndex mean_index(const HessianOperator& H) {
  return mean_index(H, monodromy(H));
}

IterationReport iteration_report(const ConvexBody& body,
                                 const CriticalOrbit& orbit,
                                 const std::vector<int>& m_list) {
  IterationReport report;
  report.base = orbit;
  HessianOperator base = assemble_hessian(body, orbit.config);
  Monodromy mono = monodromy(base);
  report.mean = mean_index(base, mono);
  int twoN = 2 * body.surface_dim();

  IndexTriple base_triple = index_triple(twisted_hessian(base, Cplx(1.0, 0.0)));
  const double slack = 1e-7;

  report.all_ok = true;
  for (int m : m_list) {
    IterationRow row;
    row.m = m;
    HessianOperator iter =
        assemble_hessian(body, iterate(orbit.config, m), false,
                         std::max(kTolCritical, 2.0 * orbit.grad_residual));
    row.direct = index_triple(twisted_hessian(iter, Cplx(1.0, 0.0)));
    row.bott = bott_split(base, m, Cplx(1.0, 0.0));
    row.bott_match = row.direct.same_counts(row.bott);
    row.nul_bound_ok = row.direct.nul <= twoN;
    double lo_i = m * report.mean.avind - twoN;
    double hi_i = m * report.mean.avind + twoN - row.direct.nul;
    row.ind_chain_ok =
        lo_i <= row.direct.ind + slack && row.direct.ind <= hi_i + slack;
    double lo_c = m * report.mean.avcoind - twoN;
    double hi_c = m * report.mean.avcoind + twoN - row.direct.nul;
    row.coind_chain_ok =
        lo_c <= row.direct.coind + slack && row.direct.coind <= hi_c + slack;
    row.limit_law_ok =
        std::abs(static_cast<double>(row.direct.ind) / m - report.mean.avind) <=
        static_cast<double>(twoN) / m + slack;
    row.hypothesis_preserved = row.direct.coind == base_triple.coind &&
                               row.direct.nul == base_triple.nul;
    report.all_ok = report.all_ok && row.bott_match && row.nul_bound_ok &&
                    row.ind_chain_ok && row.coind_chain_ok && row.limit_law_ok;
    report.rows.push_back(row);
  }
  return report;
}

SemicontinuityReport semicontinuity_scan(const HessianOperator& H,
                                         int samples_per_arc) {
  if (samples_per_arc < 3)
    throw DomainError("semicontinuity scan needs >= 3 samples per arc");
  SemicontinuityReport report;
  Monodromy mono = monodromy(H);
  std::vector<double> angles = sorted_angles(mono);

  auto triple_at = [&](double angle) {
    return index_triple(twisted_hessian(H, std::polar(1.0, angle)));
  };

  if (angles.empty()) {
    report.trivially_constant = true;
    IndexTriple first = triple_at(0.0);
    for (int k = 1; k < samples_per_arc; ++k) {
      if (!triple_at(2.0 * M_PI * k / samples_per_arc).same_counts(first))
        report.arc_constancy = false;
    }
    return report;
  }

  int r = static_cast<int>(angles.size());
  for (int a = 0; a < r; ++a) {
    double here = angles[a];
    double next = (a + 1 < r) ? angles[a + 1] : angles[0] + 2.0 * M_PI;
    double prev = (a > 0) ? angles[a - 1] : angles[r - 1] - 2.0 * M_PI;
    JumpRecord rec;
    rec.z = std::polar(1.0, here);
    IndexTriple at = triple_at(here);
    rec.nullity = at.nul;

    // Samples walk away from the Poincare point into the adjacent arc; the
    // one-sided limit is read from the sample nearest the point.
    auto scan_side = [&](double far_end) {
      double span = far_end - here;
      if (std::abs(span) < 16.0 * kTolCircle) {
        rec.inconclusive = true;
        return;
      }
      std::vector<IndexTriple> samples;
      for (int k = 1; k <= samples_per_arc; ++k)
        samples.push_back(triple_at(here + span * k / (samples_per_arc + 1.0)));
      for (const IndexTriple& s : samples)
        if (!s.same_counts(samples.front())) rec.arc_constant = false;
      const IndexTriple& lim = samples.front();
      bool ind_ok = at.ind <= lim.ind && lim.ind <= at.ind + at.nul;
      bool coind_ok = at.coind <= lim.coind && lim.coind <= at.coind + at.nul;
      if (!ind_ok || !coind_ok) rec.jump_bounded = false;
    };
    scan_side(next);
    scan_side(prev);

    if (rec.inconclusive) ++report.inconclusive_count;
    report.arc_constancy = report.arc_constancy && rec.arc_constant;
    report.jump_bounds = report.jump_bounds && rec.jump_bounded;
    report.jumps.push_back(rec);
  }
  return report;
}

}  // namespace billiards
