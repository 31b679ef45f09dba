#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsm/errors.hpp"

namespace hsm {

using cplx = std::complex<double>;

inline constexpr double kSqrtPi = 1.7724538509055160273;

/// Basis identification: width factor beta, center x0, highest retained
/// index n (so n+1 modes).
struct BasisParams {
  double beta;
  double x0;
  int n;

  BasisParams(double beta_, double x0_, int n_) : beta(beta_), x0(x0_), n(n_) {
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw std::invalid_argument("BasisParams: beta must be positive and finite");
    if (!std::isfinite(x0))
      throw std::invalid_argument("BasisParams: x0 must be finite");
    if (n < 0) throw std::invalid_argument("BasisParams: n must be nonnegative");
  }

  int size() const { return n + 1; }
  bool operator==(const BasisParams&) const = default;
};

/// Squared L2 norm of every basis function: sqrt(pi)/beta.
inline double mode_norm_sq(const BasisParams& b) { return kSqrtPi / b.beta; }

struct QuadratureRule {
  std::vector<double> nodes;             // ascending roots of H_m
  std::vector<double> weights;           // for weight exp(-x^2)
  std::vector<double> function_weights;  // weights[k] * exp(nodes[k]^2), stable form
  int order() const { return static_cast<int>(nodes.size()); }
};

namespace detail {

/**
 * Eigenvalues of a symmetric tridiagonal matrix by QL with implicit shifts,
 * tracking one row of the accumulated rotation (the first components of the
 * eigenvectors, which is all Golub-Welsch needs).
 *
 * d: diagonal (overwritten with eigenvalues), e: subdiagonal e[1..m-1],
 * z: in/out row, seeded with (1,0,...,0).
 */
inline void tridiag_ql(std::vector<double>& d, std::vector<double>& e,
                       std::vector<double>& z) {
  const int m = static_cast<int>(d.size());
  if (m == 1) return;
  for (int i = 1; i < m; ++i) e[i - 1] = e[i];
  e[m - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < m; ++l) {
    int iter = 0;
    int mm;
    do {
      for (mm = l; mm < m - 1; ++mm) {
        const double dd = std::abs(d[mm]) + std::abs(d[mm + 1]);
        if (std::abs(e[mm]) <= eps * dd) break;
      }
      if (mm != l) {
        if (++iter == 60)
          throw NumericalError("tridiag_ql: eigenvalue iteration did not converge (m=" +
                               std::to_string(m) + ")");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[mm] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i = mm - 1;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[mm] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = z[i + 1];
          z[i + 1] = s * z[i] + c * f;
          z[i] = c * z[i] - s * f;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[mm] = 0.0;
      }
    } while (mm != l);
  }
}

/// Values of the normalized functions H^_0..H^_n at y, seeded with exp(-y^2/2).
/// The recurrence never forms 2^i i!, so high orders stay representable.
inline void hermite_function_row(int n, double y, std::span<double> out) {
  out[0] = std::exp(-0.5 * y * y);
  if (n == 0) return;
  out[1] = std::sqrt(2.0) * y * out[0];
  for (int k = 1; k < n; ++k)
    out[k + 1] = y * std::sqrt(2.0 / (k + 1)) * out[k] -
                 std::sqrt(static_cast<double>(k) / (k + 1)) * out[k - 1];
}

}  // namespace detail

/// Physicists' Hermite polynomial H_n(x) by the three-term recurrence.
inline double hermite_polynomial(int n, double x) {
  if (n < 0) throw std::invalid_argument("hermite_polynomial: n must be nonnegative");
  double p0 = 1.0;
  if (n == 0) return p0;
  double p1 = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double p2 = 2.0 * x * p1 - 2.0 * k * p0;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

/// i-th normalized Hermite function of the basis, evaluated at x.
inline double hermite_function(int i, const BasisParams& basis, double x) {
  if (i < 0 || i > basis.n)
    throw std::invalid_argument("hermite_function: index out of range");
  const double y = basis.beta * (x - basis.x0);
  std::vector<double> row(static_cast<size_t>(i) + 1);
  detail::hermite_function_row(i, y, row);
  return row[i];
}

/**
 * Gauss-Hermite rule with m nodes for the weight exp(-x^2), by Golub-Welsch
 * on the Jacobi matrix with off-diagonal entries sqrt(k/2).  Weights come
 * from the first eigenvector components; function_weights are evaluated
 * through the Christoffel sum of orthonormal Hermite functions, which stays
 * finite where weights[k]*exp(x^2) would overflow.  Nodes and weights are
 * symmetrized about 0 afterwards.
 */
inline QuadratureRule gauss_hermite_rule(int m) {
  if (m < 1) throw std::invalid_argument("gauss_hermite_rule: m must be >= 1");
  std::vector<double> d(m, 0.0), e(m, 0.0), z(m, 0.0);
  for (int k = 1; k < m; ++k) e[k] = std::sqrt(k / 2.0);
  z[0] = 1.0;
  detail::tridiag_ql(d, e, z);

  std::vector<int> idx(m);
  for (int k = 0; k < m; ++k) idx[k] = k;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });

  QuadratureRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  rule.function_weights.resize(m);
  for (int k = 0; k < m; ++k) {
    rule.nodes[k] = d[idx[k]];
    rule.weights[k] = kSqrtPi * z[idx[k]] * z[idx[k]];
  }
  for (int k = 0; k < m / 2; ++k) {
    const int j = m - 1 - k;
    const double half = 0.5 * (rule.nodes[j] - rule.nodes[k]);
    rule.nodes[k] = -half;
    rule.nodes[j] = half;
    const double w = 0.5 * (rule.weights[k] + rule.weights[j]);
    rule.weights[k] = rule.weights[j] = w;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;

  // Christoffel: 1 / sum_j psi_j(x)^2 with psi_j the orthonormal functions.
  const double inv_quartic_pi = 1.0 / std::sqrt(kSqrtPi);
  std::vector<double> row(m);
  for (int k = 0; k < m; ++k) {
    detail::hermite_function_row(m - 1, rule.nodes[k], row);
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
      const double psi = row[j] * inv_quartic_pi;
      s += psi * psi;
    }
    rule.function_weights[k] = 1.0 / s;
  }
  for (int k = 0; k < m / 2; ++k) {
    const int j = m - 1 - k;
    const double fw = 0.5 * (rule.function_weights[k] + rule.function_weights[j]);
    rule.function_weights[k] = rule.function_weights[j] = fw;
  }
  return rule;
}

namespace detail {

/// Memoized rules, keyed by node count.  Rules are immutable once built, so
/// sharing them across threads is safe.
inline std::shared_ptr<const QuadratureRule> shared_rule(int m) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const QuadratureRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  auto rule = std::make_shared<const QuadratureRule>(gauss_hermite_rule(m));
  cache.emplace(m, rule);
  return rule;
}

}  // namespace detail

/// Collocation points x0 + xi_k/beta for the (n+1)-node rule, ascending.
inline std::vector<double> collocation_points(const BasisParams& basis) {
  const QuadratureRule& rule = *detail::shared_rule(basis.n + 1);
  std::vector<double> xs(rule.nodes.size());
  for (size_t k = 0; k < xs.size(); ++k) xs[k] = basis.x0 + rule.nodes[k] / basis.beta;
  return xs;
}

/// Numerical solution: coefficients attached to a basis.
struct SpectralField {
  BasisParams basis;
  std::vector<cplx> coeffs;

  SpectralField(BasisParams b, std::vector<cplx> c) : basis(b), coeffs(std::move(c)) {
    if (static_cast<int>(coeffs.size()) != basis.n + 1)
      throw std::invalid_argument("SpectralField: coeffs length must equal n+1");
  }

  static SpectralField zero(BasisParams b) {
    return SpectralField(b, std::vector<cplx>(static_cast<size_t>(b.n) + 1, cplx{}));
  }
};

inline double field_norm_sq(const SpectralField& f) {
  double s = 0.0;
  for (const cplx& c : f.coeffs) s += std::norm(c);
  return s * mode_norm_sq(f.basis);
}

inline double field_norm(const SpectralField& f) { return std::sqrt(field_norm_sq(f)); }

/// Pointwise evaluation of the expansion, one recurrence sweep per point.
inline std::vector<cplx> synthesize(const SpectralField& f, std::span<const double> xs) {
  const int n = f.basis.n;
  std::vector<cplx> out(xs.size());
  for (size_t p = 0; p < xs.size(); ++p) {
    const double y = f.basis.beta * (xs[p] - f.basis.x0);
    double h0 = std::exp(-0.5 * y * y);
    cplx acc = f.coeffs[0] * h0;
    if (n > 0) {
      double h1 = std::sqrt(2.0) * y * h0;
      acc += f.coeffs[1] * h1;
      for (int k = 1; k < n; ++k) {
        const double h2 = y * std::sqrt(2.0 / (k + 1)) * h1 -
                          std::sqrt(static_cast<double>(k) / (k + 1)) * h0;
        acc += f.coeffs[k + 1] * h2;
        h0 = h1;
        h1 = h2;
      }
    }
    out[p] = acc;
  }
  return out;
}

/**
 * Discrete transform: the unique field in the basis space that matches the
 * given values at all n+1 collocation points.  Inverse of synthesize on
 * that space.
 */
inline SpectralField analyze(std::span<const cplx> values_at_collocation,
                             const BasisParams& basis) {
  const int n = basis.n;
  if (static_cast<int>(values_at_collocation.size()) != n + 1)
    throw std::invalid_argument("analyze: expected n+1 collocation values");
  const QuadratureRule& rule = *detail::shared_rule(n + 1);
  std::vector<cplx> coeffs(static_cast<size_t>(n) + 1, cplx{});
  std::vector<double> row(static_cast<size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    detail::hermite_function_row(n, rule.nodes[k], row);
    const cplx scaled = values_at_collocation[k] * (rule.function_weights[k] / kSqrtPi);
    for (int i = 0; i <= n; ++i) coeffs[i] += scaled * row[i];
  }
  return SpectralField(basis, std::move(coeffs));
}

}  // namespace hsm
