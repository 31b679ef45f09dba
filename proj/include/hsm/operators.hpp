#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "hsm/basis.hpp"

namespace hsm {

/// What a basis change did: where it went and how much L2 mass it dropped.
struct OperatorReport {
  BasisParams source_basis;
  BasisParams target_basis;
  double discarded_norm = 0.0;
};

struct ProjectionResult {
  SpectralField field;
  OperatorReport report;
};

/// Derivative as an exact coefficient map; order grows by one.
inline SpectralField differentiate(const SpectralField& f) {
  const int n = f.basis.n;
  const double beta = f.basis.beta;
  auto u = [&](int k) -> cplx {
    return (k >= 0 && k <= n) ? f.coeffs[k] : cplx{};
  };
  std::vector<cplx> g(static_cast<size_t>(n) + 2);
  for (int k = 0; k <= n + 1; ++k)
    g[k] = beta * (std::sqrt((k + 1) / 2.0) * u(k + 1) - std::sqrt(k / 2.0) * u(k - 1));
  return SpectralField(BasisParams(beta, f.basis.x0, n + 1), std::move(g));
}

/// Multiplication by the coordinate as an exact coefficient map.
inline SpectralField multiply_by_x(const SpectralField& f) {
  const int n = f.basis.n;
  const double beta = f.basis.beta;
  const double x0 = f.basis.x0;
  auto u = [&](int k) -> cplx {
    return (k >= 0 && k <= n) ? f.coeffs[k] : cplx{};
  };
  std::vector<cplx> h(static_cast<size_t>(n) + 2);
  for (int k = 0; k <= n + 1; ++k)
    h[k] = x0 * u(k) +
           (std::sqrt(k / 2.0) * u(k - 1) + std::sqrt((k + 1) / 2.0) * u(k + 1)) / beta;
  return SpectralField(BasisParams(beta, x0, n + 1), std::move(h));
}

/// ||x d/dx U||_{L2}: both factors applied as exact coefficient maps.
inline double x_weighted_deriv_norm(const SpectralField& f) {
  return field_norm(multiply_by_x(differentiate(f)));
}

/// L2 norm of the modes above `keep`.
inline double tail_norm(const SpectralField& f, int keep) {
  if (keep < 0 || keep > f.basis.n)
    throw std::invalid_argument("tail_norm: keep out of range");
  double s = 0.0;
  for (int i = keep + 1; i <= f.basis.n; ++i) s += std::norm(f.coeffs[i]);
  return std::sqrt(s * mode_norm_sq(f.basis));
}

namespace detail {

/// Nodes of a Gauss-Hermite rule for the single Gaussian obtained by
/// completing the square in the product of the two basis Gaussians.  A rule
/// of m nodes integrates cross-basis mode products exactly when the combined
/// polynomial degree is at most 2m-1.
struct CombinedRule {
  std::vector<double> xs;       // physical nodes
  std::vector<double> scaled_w; // function_weights / gamma
};

inline CombinedRule combined_gaussian_rule(const BasisParams& a, const BasisParams& b,
                                           int m) {
  const double wa = a.beta * a.beta;
  const double wb = b.beta * b.beta;
  const double gamma = std::sqrt(0.5 * (wa + wb));
  const double center = (wa * a.x0 + wb * b.x0) / (wa + wb);
  const QuadratureRule& rule = *shared_rule(m);
  CombinedRule out;
  out.xs.resize(rule.nodes.size());
  out.scaled_w.resize(rule.nodes.size());
  for (size_t k = 0; k < rule.nodes.size(); ++k) {
    out.xs[k] = center + rule.nodes[k] / gamma;
    out.scaled_w[k] = rule.function_weights[k] / gamma;
  }
  return out;
}

}  // namespace detail

/// L2 inner product (a, conj b); exact cross-basis quadrature when the bases
/// differ, Parseval when they agree.
inline cplx cross_inner(const SpectralField& a, const SpectralField& b) {
  if (a.basis.beta == b.basis.beta && a.basis.x0 == b.basis.x0) {
    cplx s{};
    const int shared = std::min(a.basis.n, b.basis.n);
    for (int i = 0; i <= shared; ++i) s += a.coeffs[i] * std::conj(b.coeffs[i]);
    return s * mode_norm_sq(a.basis);
  }
  const detail::CombinedRule rule =
      detail::combined_gaussian_rule(a.basis, b.basis, a.basis.n + b.basis.n + 2);
  const std::vector<cplx> av = synthesize(a, rule.xs);
  const std::vector<cplx> bv = synthesize(b, rule.xs);
  cplx s{};
  for (size_t k = 0; k < rule.xs.size(); ++k) s += rule.scaled_w[k] * av[k] * std::conj(bv[k]);
  return s;
}

/**
 * L2-orthogonal projection onto the target space.  Pure order changes reuse
 * the coefficients unchanged (refinement pads zeros, coarsening truncates);
 * general changes go through exact cross-basis quadrature.  The discarded
 * norm is computed as sqrt(||U||^2 - ||pi U||^2), clamped at zero.
 */
inline ProjectionResult project(const SpectralField& f, const BasisParams& target) {
  const BasisParams& src = f.basis;
  if (src.beta == target.beta && src.x0 == target.x0) {
    std::vector<cplx> coeffs(static_cast<size_t>(target.n) + 1, cplx{});
    const int shared = std::min(src.n, target.n);
    for (int i = 0; i <= shared; ++i) coeffs[i] = f.coeffs[i];
    const double discarded = (target.n >= src.n) ? 0.0 : tail_norm(f, target.n);
    return ProjectionResult{SpectralField(target, std::move(coeffs)),
                            OperatorReport{src, target, discarded}};
  }
  const int m = src.n + target.n + 2;
  const detail::CombinedRule rule = detail::combined_gaussian_rule(src, target, m);
  const std::vector<cplx> fv = synthesize(f, rule.xs);
  std::vector<cplx> coeffs(static_cast<size_t>(target.n) + 1, cplx{});
  std::vector<double> row(static_cast<size_t>(target.n) + 1);
  for (size_t k = 0; k < rule.xs.size(); ++k) {
    const double y = target.beta * (rule.xs[k] - target.x0);
    detail::hermite_function_row(target.n, y, row);
    const cplx scaled = fv[k] * rule.scaled_w[k];
    for (int j = 0; j <= target.n; ++j) coeffs[j] += scaled * row[j];
  }
  const double inv_mode_norm = target.beta / kSqrtPi;
  for (cplx& c : coeffs) c *= inv_mode_norm;
  SpectralField projected(target, std::move(coeffs));
  const double lost_sq = field_norm_sq(f) - field_norm_sq(projected);
  const double discarded = std::sqrt(std::max(lost_sq, 0.0));
  return ProjectionResult{std::move(projected), OperatorReport{src, target, discarded}};
}

/// Collocation interpolation onto the target space.  Kept as the comparison
/// operator for projection; the adaptive controller never calls it.
inline SpectralField interpolate(const SpectralField& f, const BasisParams& target) {
  const std::vector<double> xs = collocation_points(target);
  const std::vector<cplx> values = synthesize(f, xs);
  return analyze(values, target);
}

/// ||a - b|| across bases, via norms and the cross inner product.
inline double cross_distance(const SpectralField& a, const SpectralField& b) {
  const double d2 =
      field_norm_sq(a) + field_norm_sq(b) - 2.0 * std::real(cross_inner(a, b));
  return std::sqrt(std::max(d2, 0.0));
}

}  // namespace hsm
