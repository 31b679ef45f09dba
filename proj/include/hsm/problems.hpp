#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "hsm/integrator.hpp"

namespace hsm {

/// Weak parabolic problem on the line: du/dt weak-paired with a coercive
/// symmetric form, a source, an initial value, and (when manufactured) the
/// closed-form solution for error measurement.
struct ParabolicProblem {
  BilinearForm form;
  SourceTerm source;
  std::function<cplx(double)> initial;
  std::optional<SourceFn> analytic;
  double horizon;
  double dt;

  void validate() const {
    if (!(dt > 0.0)) throw ConfigError("problem: dt must be positive");
    if (!(horizon > 0.0)) throw ConfigError("problem: horizon must be positive");
    const double steps = horizon / dt;
    if (std::abs(steps - std::llround(steps)) > 1e-6)
      throw ConfigError("problem: horizon must be a whole number of steps");
    if (!initial) throw ConfigError("problem: initial condition missing");
  }
};

/**
 * Heat problem whose solution is a rightward-drifting, widening, increasingly
 * oscillatory complex Gaussian:
 *
 *   u(x,t) = (t+1)^{-1/2} exp[i (t+1) x - (x-2t)^2 / (4(t+1))].
 */
inline ParabolicProblem example1() {
  auto envelope = [](double x, double t) {
    const double s = x - 2.0 * t;
    return cplx(-s * s / (4.0 * (t + 1.0)), (t + 1.0) * x);
  };
  SourceFn analytic = [envelope](double x, double t) {
    return std::exp(envelope(x, t)) / std::sqrt(t + 1.0);
  };
  SourceFn source = [envelope](double x, double t) {
    const cplx numer = cplx(x - 2.0 * t + std::pow(t + 1.0, 3), 2.0 * (x - t) * (1.0 + t));
    return numer / std::pow(t + 1.0, 1.5) * std::exp(envelope(x, t));
  };
  return ParabolicProblem{
      BilinearForm::heat(),
      SourceTerm{std::move(source)},
      [analytic](double x) { return analytic(x, 0.0); },
      analytic,
      2.0,
      2e-4,
  };
}

/**
 * Heat problem whose solution is a Gaussian-windowed sine translating left
 * with speed 2 until t = 2, then right:
 *
 *   u(x,t) = exp(-z^2) sin z,  z = x + 2t  (t <= 2),  z = x - 2t + 8  (t >= 2).
 *
 * Both branches agree at t = 2.  Real valued.
 */
inline ParabolicProblem example2() {
  constexpr double v = 2.0;
  auto center_arg = [](double x, double t) {
    return (t <= 2.0) ? x + v * t : x - v * (t - 4.0);
  };
  SourceFn analytic = [center_arg](double x, double t) {
    const double z = center_arg(x, t);
    return cplx(std::exp(-z * z) * std::sin(z), 0.0);
  };
  SourceFn source = [center_arg](double x, double t) {
    const double z = center_arg(x, t);
    const double vel = (t <= 2.0) ? v : -v;  // speed of z relative to t
    const double val = (3.0 - 4.0 * z * z - 2.0 * vel * z) * std::sin(z) +
                       (vel + 4.0 * z) * std::cos(z);
    return cplx(val * std::exp(-z * z), 0.0);
  };
  return ParabolicProblem{
      BilinearForm::heat(),
      SourceTerm{std::move(source)},
      [analytic](double x) { return analytic(x, 0.0); },
      analytic,
      6.0,
      2e-4,
  };
}

/// ||u(.,t) - U|| by Gauss-Hermite quadrature of order 4(n+1) in the field's
/// own scale.
inline double absolute_l2_error(const SpectralField& field, const SourceFn& analytic,
                                double t) {
  const QuadratureRule& rule = *detail::shared_rule(4 * (field.basis.n + 1));
  std::vector<double> xs(rule.nodes.size());
  for (size_t k = 0; k < xs.size(); ++k)
    xs[k] = field.basis.x0 + rule.nodes[k] / field.basis.beta;
  const std::vector<cplx> uv = synthesize(field, xs);
  double err = 0.0;
  for (size_t k = 0; k < xs.size(); ++k) {
    const double w = rule.function_weights[k] / field.basis.beta;
    err += w * std::norm(analytic(xs[k], t) - uv[k]);
  }
  return std::sqrt(err);
}

/// Relative L2 error against the analytic solution; nullopt when the
/// solution's norm is too small to divide by.
inline std::optional<double> relative_l2_error(const SpectralField& field,
                                               const SourceFn& analytic, double t) {
  const QuadratureRule& rule = *detail::shared_rule(4 * (field.basis.n + 1));
  std::vector<double> xs(rule.nodes.size());
  for (size_t k = 0; k < xs.size(); ++k)
    xs[k] = field.basis.x0 + rule.nodes[k] / field.basis.beta;
  const std::vector<cplx> uv = synthesize(field, xs);
  double err = 0.0, den = 0.0;
  for (size_t k = 0; k < xs.size(); ++k) {
    const double w = rule.function_weights[k] / field.basis.beta;
    const cplx exact = analytic(xs[k], t);
    err += w * std::norm(exact - uv[k]);
    den += w * std::norm(exact);
  }
  if (den <= 1e-280) return std::nullopt;
  return std::sqrt(err / den);
}

}  // namespace hsm
