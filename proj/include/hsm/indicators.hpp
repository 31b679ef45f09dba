#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "hsm/operators.hpp"

namespace hsm {

struct ExteriorIndicators {
  double right;
  double left;
};

struct IndicatorSnapshot {
  double frequency;
  double right_exterior;
  double left_exterior;
  double x_left;
  double x_right;
  int m_cut;  // floor(n/3), the tail width used by the frequency indicator
};

/**
 * Ratio of the norm carried by the top floor(n/3) modes to the total norm.
 * Exact by orthogonality, so it reduces to coefficient sums.  Undefined
 * (nullopt) for the zero field and for n < 3, where the tail is empty; the
 * controller treats that as "no adaptation".
 */
inline std::optional<double> frequency_indicator(const SpectralField& f) {
  const int n = f.basis.n;
  if (n < 3) return std::nullopt;
  const int m_cut = n / 3;
  double total = 0.0, tail = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double a = std::norm(f.coeffs[i]);
    total += a;
    if (i >= n - m_cut + 1) tail += a;
  }
  if (total <= 0.0) return std::nullopt;
  return std::sqrt(tail / total);
}

/// Cut positions bounding the two exterior regions.
struct ExteriorCuts {
  double right;
  double left;
};

/// Default cut placement: the floor((2n+2)/3)-th and floor(n/3)-th collocation
/// points (0-based, ascending) of the field's own basis.
inline ExteriorCuts basis_exterior_cuts(const BasisParams& basis) {
  const QuadratureRule& node_rule = *detail::shared_rule(basis.n + 1);
  const int idx_right = (2 * basis.n + 2) / 3;
  const int idx_left = basis.n / 3;
  return ExteriorCuts{basis.x0 + node_rule.nodes[idx_right] / basis.beta,
                      basis.x0 + node_rule.nodes[idx_left] / basis.beta};
}

namespace detail {

/**
 * Restricted-norm machinery behind the exterior-error indicators.  Each
 * exterior integral of |dU|^2 runs over the finite interval where the
 * expansion carries mass (the span of the order-2(n+2) collocation grid) by
 * composite Gauss-Legendre, so its value is smooth in the cut position and
 * in the candidate shifts of the moving search.  The denominator is the
 * exact Parseval norm of the derivative, so ratios stay within [0, 1] up to
 * quadrature rounding.
 *
 * ratio(shift) evaluates the indicator of the basis-shifted solution:
 * integral of |dU|^2 from cut + shift outward (mirrored for the left side).
 */
struct ExteriorEvaluator {
  SpectralField deriv{BasisParams(1.0, 0.0, 0), {cplx{}}};
  double denom = 0.0;  // exact ||dU||
  double span_lo = 0.0;
  double span_hi = 0.0;
  int panels = 0;
  ExteriorCuts cuts{0.0, 0.0};
  bool degenerate = true;

  double right_ratio(double shift) const {
    return std::sqrt(integral(cuts.right + shift, span_hi)) / denom;
  }

  double left_ratio(double shift) const {
    return std::sqrt(integral(span_lo, cuts.left - shift)) / denom;
  }

 private:
  double integral(double a, double b) const {
    a = std::max(a, span_lo);
    b = std::min(b, span_hi);
    if (!(b > a)) return 0.0;
    // 5-point Gauss-Legendre panels
    static const double gl_x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                   0.5384693101056831, 0.9061798459386640};
    static const double gl_w[5] = {0.2369268850561891, 0.4786286704993665,
                                   0.5688888888888889, 0.4786286704993665,
                                   0.2369268850561891};
    const double h = (b - a) / panels;
    std::vector<double> pts(static_cast<size_t>(panels) * 5);
    for (int p = 0; p < panels; ++p) {
      const double mid = a + (p + 0.5) * h;
      for (int j = 0; j < 5; ++j) pts[p * 5 + j] = mid + 0.5 * h * gl_x[j];
    }
    const std::vector<cplx> gv = synthesize(deriv, pts);
    double s = 0.0;
    for (int p = 0; p < panels; ++p)
      for (int j = 0; j < 5; ++j) s += gl_w[j] * std::norm(gv[p * 5 + j]);
    return s * 0.5 * h;
  }
};

inline ExteriorEvaluator make_exterior_evaluator(const SpectralField& f,
                                                 const ExteriorCuts* cuts = nullptr) {
  ExteriorEvaluator ev;
  const int n = f.basis.n;
  if (n < 3) return ev;

  ev.deriv = differentiate(f);
  const double den_sq = field_norm_sq(ev.deriv);
  if (den_sq <= 0.0) return ev;
  ev.denom = std::sqrt(den_sq);
  ev.cuts = cuts ? *cuts : basis_exterior_cuts(f.basis);

  const QuadratureRule& rule = *shared_rule(2 * (n + 2));
  const double reach = rule.nodes.back() / f.basis.beta;
  ev.span_lo = f.basis.x0 - reach;
  ev.span_hi = f.basis.x0 + reach;
  ev.panels = std::max(24, n);
  ev.degenerate = false;
  return ev;
}

}  // namespace detail

/// (right, left) exterior-error indicators; nullopt when the derivative
/// vanishes or n < 3.
inline std::optional<ExteriorIndicators> exterior_error_indicators(const SpectralField& f) {
  const detail::ExteriorEvaluator ev = detail::make_exterior_evaluator(f);
  if (ev.degenerate) return std::nullopt;
  return ExteriorIndicators{std::min(ev.right_ratio(0.0), 1.0),
                            std::min(ev.left_ratio(0.0), 1.0)};
}

inline std::optional<IndicatorSnapshot> indicator_snapshot(const SpectralField& f) {
  const std::optional<double> freq = frequency_indicator(f);
  const detail::ExteriorEvaluator ev = detail::make_exterior_evaluator(f);
  if (!freq || ev.degenerate) return std::nullopt;
  return IndicatorSnapshot{*freq,
                           std::min(ev.right_ratio(0.0), 1.0),
                           std::min(ev.left_ratio(0.0), 1.0),
                           ev.cuts.left,
                           ev.cuts.right,
                           f.basis.n / 3};
}

}  // namespace hsm
