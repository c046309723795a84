#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "billiards/configuration.hpp"

namespace billiards {

/// Degree-indexed Betti numbers (Z_2 coefficients), exact integers.
struct PoincarePolynomial {
  std::vector<std::int64_t> coeffs;  // coeffs[k] multiplies t^k

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  std::int64_t coeff(int k) const {
    return k >= 0 && k < static_cast<int>(coeffs.size()) ? coeffs[k] : 0;
  }
  std::int64_t eval_at_one() const;
  std::string to_string() const;  // "1 + t + 2 t^3"

  bool operator==(const PoincarePolynomial& o) const {
    return coeffs == o.coeffs;
  }
};

PoincarePolynomial poly_mul(const PoincarePolynomial& a,
                            const PoincarePolynomial& b);

/// Exact integer polynomial division; empty when the division leaves a
/// remainder.
std::optional<PoincarePolynomial> poly_divide_exact(
    const PoincarePolynomial& numerator, const PoincarePolynomial& denominator);

/// Betti polynomial of the cyclic configuration space of n points on an
/// N-sphere-like surface, factored form (t^N + 1) * sum_{j<=n-2} t^{(N-1)j}.
PoincarePolynomial betti_polynomial(int N, int n);

/// Same polynomial through the rational expression
/// (t^N + 1)(t^{(n-1)(N-1)} - 1) / (t^{N-1} - 1), by exact division.
PoincarePolynomial betti_polynomial_rational(int N, int n);

/// Equivariant Poincare polynomial, factored form; valid for N >= 3, n odd.
PoincarePolynomial equivariant_polynomial(int N, int n);
PoincarePolynomial equivariant_polynomial_rational(int N, int n);

/// Sum of the coefficients in degrees 0..N.
std::int64_t equivariant_rank_sum(int N, int n);

/// Product of chord lengths >= epsilon^n, evaluated in log space.
bool epsilon_membership(const Configuration& config, double epsilon);

/// Path of iterated configurations interpolating between the m-fold
/// iterates of the endpoints: on the k-th of m equal subintervals the
/// lifted tuple is (q_1 x k, path(y), q_0 x (m-k-1)).
struct BangertPath {
  std::vector<double> xs;
  std::vector<Configuration> samples;  // path(x_i) in Conf_n
  int m = 1;
  std::vector<Configuration> lifted;   // in Conf_{nm}
};

BangertPath bangert_lift(const std::function<Configuration(double)>& path,
                         double x0, double x1, int num_samples, int m);

struct BangertCheckRow {
  double x = 0.0;
  double lifted_length = 0.0;
  double bound = 0.0;
};

struct BangertCheck {
  std::vector<BangertCheckRow> rows;
  double bound = 0.0;   // (m-3) * min of the endpoint lengths
  bool pass = false;    // every sample meets the bound
};

BangertCheck verify_bangert_estimate(const BangertPath& lift);

}  // namespace billiards
