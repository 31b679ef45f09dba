#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hsm/basis.hpp"
#include "hsm/operators.hpp"

namespace hsm {

/// Dense real matrix, row major.  Small orders only; nothing sparse-aware.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

  Matrix scaled(double s) const {
    Matrix out = *this;
    for (double& v : out.data_) v *= s;
    return out;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

inline std::vector<cplx> matvec(const Matrix& a, std::span<const cplx> v) {
  std::vector<cplx> out(a.rows(), cplx{});
  for (int i = 0; i < a.rows(); ++i) {
    cplx s{};
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

inline double inf_norm(const Matrix& a) {
  double best = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    for (int j = 0; j < a.cols(); ++j) row += std::abs(a(i, j));
    best = std::max(best, row);
  }
  return best;
}

/// Symmetric coercive bilinear form, as an assembly rule per basis.  The
/// built-in heat form (du, dv) assembles exactly from the derivative
/// coefficient map; weighted forms go through quadrature.
struct BilinearForm {
  enum class Kind { Zero, Heat, WeightedH1, Custom };

  Kind kind = Kind::Heat;
  bool symmetric = true;
  std::function<double(double)> diffusion;  // WeightedH1 coefficient on u'v'
  std::function<double(double)> reaction;   // WeightedH1 coefficient on uv
  std::function<double(int, int, const BasisParams&)> entry;  // Custom

  static BilinearForm heat() { return BilinearForm{Kind::Heat, true, {}, {}, {}}; }
  static BilinearForm zero() { return BilinearForm{Kind::Zero, true, {}, {}, {}}; }
  static BilinearForm weighted_h1(std::function<double(double)> diffusion,
                                  std::function<double(double)> reaction) {
    return BilinearForm{Kind::WeightedH1, true, std::move(diffusion), std::move(reaction), {}};
  }
  static BilinearForm custom(std::function<double(int, int, const BasisParams&)> entry,
                             bool symmetric = true) {
    return BilinearForm{Kind::Custom, symmetric, {}, {}, std::move(entry)};
  }
};

namespace detail {

/// Rows of basis-function values and spatial derivatives at one point.
inline void hermite_function_and_deriv_rows(const BasisParams& basis, double x,
                                            std::span<double> values,
                                            std::span<double> derivs) {
  const int n = basis.n;
  const double y = basis.beta * (x - basis.x0);
  std::vector<double> ext(static_cast<size_t>(n) + 2);
  hermite_function_row(n + 1, y, ext);
  for (int i = 0; i <= n; ++i) values[i] = ext[i];
  for (int i = 0; i <= n; ++i) {
    const double lower = (i > 0) ? std::sqrt(i / 2.0) * ext[i - 1] : 0.0;
    derivs[i] = basis.beta * (lower - std::sqrt((i + 1) / 2.0) * ext[i + 1]);
  }
}

}  // namespace detail

/**
 * Stiffness matrix a(H_i, H_j) for the given basis.  Heat entries are closed
 * form (pentadiagonal pattern: coupled strides of 2); weighted forms use a
 * Gauss-Hermite rule of order 2(n+2).  Declared-symmetric forms are checked
 * and rejected if assembly comes out asymmetric.
 */
inline Matrix assemble_stiffness(const BilinearForm& form, const BasisParams& basis) {
  const int n = basis.n;
  Matrix a(n + 1, n + 1);
  switch (form.kind) {
    case BilinearForm::Kind::Zero:
      return a;
    case BilinearForm::Kind::Heat: {
      const double s = basis.beta * kSqrtPi;  // beta^2 * mode_norm_sq
      for (int i = 0; i <= n; ++i) a(i, i) = s * (2.0 * i + 1.0) / 2.0;
      for (int i = 0; i + 2 <= n; ++i) {
        const double off = -s * std::sqrt((i + 1.0) * (i + 2.0)) / 2.0;
        a(i, i + 2) = off;
        a(i + 2, i) = off;
      }
      return a;
    }
    case BilinearForm::Kind::WeightedH1: {
      const QuadratureRule& rule = *detail::shared_rule(2 * (n + 2));
      std::vector<double> values(static_cast<size_t>(n) + 1), derivs(static_cast<size_t>(n) + 1);
      for (int k = 0; k < rule.order(); ++k) {
        const double x = basis.x0 + rule.nodes[k] / basis.beta;
        const double w = rule.function_weights[k] / basis.beta;
        detail::hermite_function_and_deriv_rows(basis, x, values, derivs);
        const double d = form.diffusion ? form.diffusion(x) : 0.0;
        const double r = form.reaction ? form.reaction(x) : 0.0;
        for (int i = 0; i <= n; ++i)
          for (int j = i; j <= n; ++j)
            a(i, j) += w * (d * derivs[i] * derivs[j] + r * values[i] * values[j]);
      }
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j < i; ++j) a(i, j) = a(j, i);
      return a;
    }
    case BilinearForm::Kind::Custom: {
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) a(i, j) = form.entry(i, j, basis);
      if (form.symmetric) {
        double scale = 0.0, skew = 0.0;
        for (int i = 0; i <= n; ++i)
          for (int j = 0; j <= n; ++j) {
            scale = std::max(scale, std::abs(a(i, j)));
            skew = std::max(skew, std::abs(a(i, j) - a(j, i)));
          }
        if (skew > 1e-12 * std::max(scale, 1.0))
          throw ConfigError("assemble_stiffness: declared-symmetric form assembled asymmetric");
      }
      return a;
    }
  }
  return a;
}

/**
 * w = exp(-A dt) v.  The exponent is split into thirds and each third applied
 * as a truncated Taylor series; if ||A|| dt/3 exceeds 1 the third is halved
 * (doubling the application count) until the series argument is at most 1.
 * Terms stop once the next one falls below 1e-15 of the accumulated result.
 */
inline std::vector<cplx> expm_apply(const Matrix& a, double dt, std::span<const cplx> v) {
  if (dt < 0.0) throw std::invalid_argument("expm_apply: dt must be nonnegative");
  std::vector<cplx> w(v.begin(), v.end());
  if (dt == 0.0) return w;

  const double norm_a = inf_norm(a);
  int levels = 0;
  while (norm_a * dt / (3.0 * (1 << levels)) > 1.0 && levels < 60) ++levels;
  const double tau = dt / (3.0 * (1 << levels));
  const long reps = 3L * (1L << levels);

  auto vec_norm = [](const std::vector<cplx>& x) {
    double s = 0.0;
    for (const cplx& c : x) s += std::norm(c);
    return std::sqrt(s);
  };

  if (vec_norm(w) == 0.0) return w;
  for (long r = 0; r < reps; ++r) {
    std::vector<cplx> term = w;
    std::vector<cplx> acc = w;
    bool converged = false;
    for (int k = 1; k <= 60; ++k) {
      term = matvec(a, term);
      const double factor = -tau / k;
      for (cplx& c : term) c *= factor;
      for (size_t i = 0; i < acc.size(); ++i) acc[i] += term[i];
      if (vec_norm(term) <= 1e-15 * vec_norm(acc)) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw NumericalError("expm_apply: Taylor series did not converge within 60 terms"
                           " (||A||*dt = " + std::to_string(norm_a * dt) + ")");
    w = std::move(acc);
  }
  return w;
}

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Newton iteration on the Legendre recurrence.
inline GaussLegendreRule gauss_legendre_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_rule: n must be >= 1");
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      if (n == 1) p1 = x;
      for (int k = 1; k < n; ++k) {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

using SourceFn = std::function<cplx(double, double)>;

/// Source term f(x, t) of the weak problem.
struct SourceTerm {
  SourceFn eval;
};

/**
 * Exact-in-time coefficient advance for the mass-normalized Galerkin system:
 *
 *   u(t+dt) = exp(-Ah dt) u(t) + sum_j w_j exp(-Ah (t+dt-s_j)) fh(s_j)
 *
 * with Ah = A / mode_norm_sq, fh the normalized source projection, and the
 * integral nodes s_j from a Gauss-Legendre rule on [t, t+dt].  Everything
 * basis-dependent is cached and rebuilt only when the basis changes.
 */
class TimeStepper {
 public:
  TimeStepper(BilinearForm form, SourceTerm source, int gl_order = 5)
      : form_(std::move(form)), source_(std::move(source)), gl_(gauss_legendre_rule(gl_order)) {
    if (gl_order < 1) throw ConfigError("TimeStepper: gl_order must be >= 1");
  }

  SpectralField advance(const SpectralField& field, double t, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("TimeStepper::advance: dt must be positive");
    ensure_plan(field.basis);
    std::vector<cplx> next = expm_apply(plan_->a_hat, dt, field.coeffs);
    if (source_.eval) {
      const size_t m = plan_->src_nodes.size();
      std::vector<cplx> fvals(m);
      for (size_t j = 0; j < gl_.nodes.size(); ++j) {
        const double s = t + 0.5 * dt * (gl_.nodes[j] + 1.0);
        const double w = 0.5 * dt * gl_.weights[j];
        for (size_t k = 0; k < m; ++k) fvals[k] = source_.eval(plan_->src_nodes[k], s);
        std::vector<cplx> fh = matvec_complex(plan_->src_transform, fvals);
        std::vector<cplx> term = expm_apply(plan_->a_hat, t + dt - s, fh);
        for (size_t i = 0; i < next.size(); ++i) next[i] += w * term[i];
      }
    }
    return SpectralField(field.basis, std::move(next));
  }

 private:
  struct Plan {
    BasisParams basis;
    Matrix a_hat;
    std::vector<double> src_nodes;
    Matrix src_transform;  // (n+1) x m, maps source samples to normalized coefficients
  };

  static std::vector<cplx> matvec_complex(const Matrix& a, const std::vector<cplx>& v) {
    return matvec(a, std::span<const cplx>(v));
  }

  void ensure_plan(const BasisParams& basis) {
    if (plan_ && plan_->basis == basis) return;
    Plan plan{basis, {}, {}, {}};
    plan.a_hat = assemble_stiffness(form_, basis).scaled(1.0 / mode_norm_sq(basis));

    const int m = 2 * (basis.n + 1);
    const QuadratureRule& rule = *detail::shared_rule(m);
    plan.src_nodes.resize(m);
    for (int k = 0; k < m; ++k) plan.src_nodes[k] = basis.x0 + rule.nodes[k] / basis.beta;
    plan.src_transform = Matrix(basis.n + 1, m);
    std::vector<double> row(static_cast<size_t>(basis.n) + 1);
    for (int k = 0; k < m; ++k) {
      detail::hermite_function_row(basis.n, rule.nodes[k], row);
      const double w = rule.function_weights[k] / kSqrtPi;
      for (int i = 0; i <= basis.n; ++i) plan.src_transform(i, k) = w * row[i];
    }
    plan_ = std::move(plan);
  }

  BilinearForm form_;
  SourceTerm source_;
  GaussLegendreRule gl_;
  std::optional<Plan> plan_;
};

/// One-shot advance; repeated stepping should hold a TimeStepper instead.
inline SpectralField step(const SpectralField& field, double t, double dt,
                          const BilinearForm& form, const SourceTerm& src, int gl_order = 5) {
  TimeStepper stepper(form, src, gl_order);
  return stepper.advance(field, t, dt);
}

}  // namespace hsm
