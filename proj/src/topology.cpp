#include "billiards/topology.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace billiards {

namespace {

PoincarePolynomial trimmed(std::vector<std::int64_t> coeffs) {
  while (coeffs.size() > 1 && coeffs.back() == 0) coeffs.pop_back();
  return PoincarePolynomial{std::move(coeffs)};
}

PoincarePolynomial monomial_minus_one(int degree) {
  std::vector<std::int64_t> c(degree + 1, 0);
  c[0] = -1;
  c[degree] = 1;
  return PoincarePolynomial{std::move(c)};
}

PoincarePolynomial monomial_plus_one(int degree) {
  std::vector<std::int64_t> c(degree + 1, 0);
  c[0] = 1;
  c[degree] = 1;
  return PoincarePolynomial{std::move(c)};
}

// 1 + t^step + t^{2 step} + ... (terms summands)
PoincarePolynomial geometric_sum(int step, int terms) {
  std::vector<std::int64_t> c((terms - 1) * step + 1, 0);
  for (int j = 0; j < terms; ++j) c[j * step] = 1;
  return PoincarePolynomial{std::move(c)};
}

}  // namespace

std::int64_t PoincarePolynomial::eval_at_one() const {
  std::int64_t s = 0;
  for (std::int64_t c : coeffs) s += c;
  return s;
}

std::string PoincarePolynomial::to_string() const {
  std::ostringstream out;
  bool first = true;
  for (int k = 0; k < static_cast<int>(coeffs.size()); ++k) {
    if (coeffs[k] == 0) continue;
    if (!first) out << " + ";
    if (coeffs[k] != 1 || k == 0) out << coeffs[k];
    if (k >= 1) {
      if (coeffs[k] != 1) out << ' ';
      out << 't';
      if (k >= 2) out << '^' << k;
    }
    first = false;
  }
  if (first) out << '0';
  return out.str();
}

PoincarePolynomial poly_mul(const PoincarePolynomial& a,
                            const PoincarePolynomial& b) {
  std::vector<std::int64_t> c(a.coeffs.size() + b.coeffs.size() - 1, 0);
  for (size_t i = 0; i < a.coeffs.size(); ++i)
    for (size_t j = 0; j < b.coeffs.size(); ++j)
      c[i + j] += a.coeffs[i] * b.coeffs[j];
  return trimmed(std::move(c));
}

std::optional<PoincarePolynomial> poly_divide_exact(
    const PoincarePolynomial& numerator,
    const PoincarePolynomial& denominator) {
  std::vector<std::int64_t> rem = numerator.coeffs;
  const std::vector<std::int64_t>& den = denominator.coeffs;
  if (den.empty() || den.back() == 0) return std::nullopt;
  if (rem.size() < den.size()) return std::nullopt;
  std::vector<std::int64_t> quot(rem.size() - den.size() + 1, 0);
  for (int k = static_cast<int>(quot.size()) - 1; k >= 0; --k) {
    std::int64_t lead = rem[k + den.size() - 1];
    if (lead % den.back() != 0) return std::nullopt;
    std::int64_t q = lead / den.back();
    quot[k] = q;
    for (size_t i = 0; i < den.size(); ++i) rem[k + i] -= q * den[i];
  }
  for (std::int64_t r : rem)
    if (r != 0) return std::nullopt;
  return trimmed(std::move(quot));
}

PoincarePolynomial betti_polynomial(int N, int n) {
  if (N < 2) throw DomainError("betti polynomial needs surface dimension >= 2");
  if (n < 2) throw DomainError("betti polynomial needs n >= 2");
  return poly_mul(monomial_plus_one(N), geometric_sum(N - 1, n - 1));
}

PoincarePolynomial betti_polynomial_rational(int N, int n) {
  if (N < 2) throw DomainError("betti polynomial needs surface dimension >= 2");
  if (n < 2) throw DomainError("betti polynomial needs n >= 2");
  PoincarePolynomial num =
      poly_mul(monomial_plus_one(N), monomial_minus_one((n - 1) * (N - 1)));
  auto quot = poly_divide_exact(num, monomial_minus_one(N - 1));
  if (!quot) throw DomainError("rational betti form does not divide exactly");
  return *quot;
}

PoincarePolynomial equivariant_polynomial(int N, int n) {
  if (N < 3)
    throw DomainError("equivariant polynomial needs surface dimension >= 3");
  if (n < 3 || n % 2 == 0)
    throw DomainError("equivariant polynomial needs odd n >= 3");
  PoincarePolynomial p = geometric_sum(2 * (N - 1), (n - 3) / 2 + 1);
  p = poly_mul(p, geometric_sum(1, N));
  return poly_mul(p, monomial_plus_one(N));
}

PoincarePolynomial equivariant_polynomial_rational(int N, int n) {
  if (N < 3)
    throw DomainError("equivariant polynomial needs surface dimension >= 3");
  if (n < 3 || n % 2 == 0)
    throw DomainError("equivariant polynomial needs odd n >= 3");
  PoincarePolynomial num =
      poly_mul(poly_mul(monomial_minus_one((n - 1) * (N - 1)),
                        monomial_minus_one(N)),
               monomial_plus_one(N));
  auto step1 = poly_divide_exact(num, monomial_minus_one(2 * (N - 1)));
  if (!step1) throw DomainError("equivariant rational form: first division failed");
  auto step2 = poly_divide_exact(*step1, monomial_minus_one(1));
  if (!step2) throw DomainError("equivariant rational form: second division failed");
  return *step2;
}

std::int64_t equivariant_rank_sum(int N, int n) {
  PoincarePolynomial p = equivariant_polynomial(N, n);
  std::int64_t s = 0;
  for (int k = 0; k <= N; ++k) s += p.coeff(k);
  return s;
}

bool epsilon_membership(const Configuration& config, double epsilon) {
  if (epsilon <= 0.0) throw DomainError("epsilon must be positive");
  double log_product = 0.0;
  for (int j = 0; j < config.n(); ++j)
    log_product += std::log((config.at(j).coords - config.at(j - 1).coords).norm());
  return log_product >= config.n() * std::log(epsilon) - 1e-12 * config.n();
}

BangertPath bangert_lift(const std::function<Configuration(double)>& path,
                         double x0, double x1, int num_samples, int m) {
  if (m < 1) throw DomainError("lift order must be >= 1");
  if (num_samples < 2) throw DomainError("need at least 2 path samples");
  if (!(x1 > x0)) throw DomainError("need x1 > x0");

  Configuration q0 = path(x0);
  Configuration q1 = path(x1);

  BangertPath out;
  out.m = m;
  out.xs.resize(num_samples);
  out.samples.reserve(num_samples);
  out.lifted.reserve(num_samples);

  for (int i = 0; i < num_samples; ++i) {
    double x = x0 + (x1 - x0) * i / (num_samples - 1.0);
    out.xs[i] = x;
    out.samples.push_back(path(x));

    // Subinterval index and local parameter: x = x0 + (x1-x0) k/m + (y-x0)/m.
    double scaled = m * (x - x0) / (x1 - x0);
    int k = std::min(static_cast<int>(std::floor(scaled)), m - 1);
    double y = x0 + (scaled - k) * (x1 - x0);
    Configuration inner = path(y);

    Configuration lifted;
    lifted.points.reserve(inner.n() * m);
    for (int c = 0; c < k; ++c)
      lifted.points.insert(lifted.points.end(), q1.points.begin(),
                           q1.points.end());
    lifted.points.insert(lifted.points.end(), inner.points.begin(),
                         inner.points.end());
    for (int c = 0; c < m - k - 1; ++c)
      lifted.points.insert(lifted.points.end(), q0.points.begin(),
                           q0.points.end());

    auto [gap, idx] = min_adjacent_gap(lifted);
    if (gap <= 1e-12)
      throw AdjacencyViolation(
          "lifted tuple at sample " + std::to_string(i) +
          " has coincident junction between points " + std::to_string(idx) +
          " and " + std::to_string(idx + 1));
    out.lifted.push_back(std::move(lifted));
  }
  return out;
}

BangertCheck verify_bangert_estimate(const BangertPath& lift) {
  BangertCheck check;
  double l0 = length(lift.samples.front());
  double l1 = length(lift.samples.back());
  check.bound = (lift.m - 3.0) * std::min(l0, l1);
  check.pass = true;
  for (size_t i = 0; i < lift.lifted.size(); ++i) {
    BangertCheckRow row;
    row.x = lift.xs[i];
    row.lifted_length = length(lift.lifted[i]);
    row.bound = check.bound;
    if (row.lifted_length < check.bound - 1e-9) check.pass = false;
    check.rows.push_back(row);
  }
  return check;
}

}  // namespace billiards
