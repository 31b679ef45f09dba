// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Criteria 4-7 share the expensive runs (one full drifting-pulse solve, ten
// sweep solves, four moving-mode solves of the turnaround pulse).

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "test_support.hpp"

using namespace hsm;

namespace {

int g_failures = 0;

void report(const char* name, bool pass, const std::string& detail) {
  std::printf("%s %-28s %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

double finite_or_inf(double v) {
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

// Non-increasing up to one adjacent inversion below 10 percent.
bool trend_non_increasing(const std::vector<double>& v, std::string* why) {
  int inversions = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1]) {
      ++inversions;
      const double rel = (v[i] - v[i - 1]) / std::max(std::abs(v[i - 1]), 1e-300);
      if (inversions > 1 || rel >= 0.10) {
        *why = fmt("inversion of %.1f%% at position %zu", rel * 100.0, i);
        return false;
      }
    }
  }
  return true;
}

bool trend_non_decreasing(std::vector<double> v, std::string* why) {
  for (double& x : v) x = -x;
  return trend_non_increasing(v, why);
}

// ---------------------------------------------------------------------------

void criterion1_quadrature_orthogonality() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;

  for (int m : {1, 2, 3, 4, 6, 8, 12, 16, 24, 32}) {
    const QuadratureRule rule = gauss_hermite_rule(m);
    double moment = kSqrtPi;  // integral of x^{2k} e^{-x^2}, k = 0
    for (int k = 0; 2 * k <= 2 * m - 1; ++k) {
      if (k > 0) moment *= (2.0 * k - 1.0) / 2.0;
      double q = 0.0;
      for (int j = 0; j < m; ++j) q += rule.weights[j] * std::pow(rule.nodes[j], 2 * k);
      if (std::abs(q - moment) > 1e-12 * moment) {
        pass = false;
        detail = fmt("moment 2k=%d at m=%d off by %.2e rel", 2 * k, m,
                     std::abs(q - moment) / moment);
      }
    }
  }

  const int n = 64;
  for (double beta : {0.2, 1.0, 5.0}) {
    const QuadratureRule rule = gauss_hermite_rule(n + 1);
    std::vector<double> row(static_cast<size_t>(n) + 1);
    std::vector<std::vector<double>> gram(n + 1, std::vector<double>(n + 1, 0.0));
    for (int k = 0; k <= n; ++k) {
      detail::hermite_function_row(n, rule.nodes[k], row);
      const double w = rule.function_weights[k] / beta;
      for (int i = 0; i <= n; ++i)
        for (int j = i; j <= n; ++j) gram[i][j] += w * row[i] * row[j];
    }
    for (int i = 0; i <= n && pass; ++i)
      for (int j = i; j <= n; ++j) {
        const double expected = (i == j) ? kSqrtPi / beta : 0.0;
        if (std::abs(gram[i][j] - expected) > 1e-10) {
          pass = false;
          detail = fmt("gram(%d,%d) at beta=%g off by %.2e", i, j, beta,
                       std::abs(gram[i][j] - expected));
          break;
        }
      }
  }

  const double elapsed = seconds_since(start);
  if (elapsed >= 5.0) {
    pass = false;
    detail = fmt("runtime %.2fs exceeds 5s", elapsed);
  }
  if (pass) detail = fmt("moments to m=32, orthogonality n=64 x 3 widths, %.2fs", elapsed);
  report("1 quadrature/orthogonality", pass, detail);
}

void criterion2_operator_properties() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  testsup::rng(9001);

  for (int trial = 0; trial < 200 && pass; ++trial) {
    const BasisParams src(testsup::uniform(0.5, 2.0), testsup::uniform(-1.5, 1.5),
                          testsup::uniform_int(4, 20));
    const BasisParams tgt(testsup::uniform(0.5, 2.0), testsup::uniform(-1.5, 1.5),
                          testsup::uniform_int(4, 20));
    const SpectralField f = testsup::random_field(src);
    const ProjectionResult pr = project(f, tgt);

    const double pyth = field_norm_sq(pr.field) +
                        pr.report.discarded_norm * pr.report.discarded_norm;
    if (std::abs(pyth - field_norm_sq(f)) > 1e-9 * field_norm_sq(f)) {
      pass = false;
      detail = fmt("pythagoras off at trial %d", trial);
    }
    if (cross_distance(f, pr.field) > cross_distance(f, interpolate(f, tgt)) + 1e-10) {
      pass = false;
      detail = fmt("projection lost to interpolation at trial %d", trial);
    }
  }

  for (int trial = 0; trial < 200 && pass; ++trial) {
    const double beta = testsup::uniform(0.6, 1.6);
    const double ratio = testsup::uniform(0.5, 2.0);
    const BasisParams src(beta, testsup::uniform(-1.0, 1.0), testsup::uniform_int(4, 16));
    const SpectralField f = testsup::random_field(src);
    const ProjectionResult pr = project(f, BasisParams(beta * ratio, src.x0, src.n));
    const double factor =
        std::abs(1.0 - ratio) * std::sqrt(1.0 + ratio) / (std::sqrt(2.0) * ratio);
    if (pr.report.discarded_norm > factor * x_weighted_deriv_norm(f) + 1e-9) {
      pass = false;
      detail = fmt("scaling bound broken at trial %d", trial);
    }
  }

  for (int trial = 0; trial < 200 && pass; ++trial) {
    const BasisParams src(testsup::uniform(0.6, 1.6), testsup::uniform(-1.0, 1.0),
                          testsup::uniform_int(4, 16));
    const double d = testsup::uniform(-1.0, 1.0);
    const SpectralField f = testsup::random_field(src);
    const ProjectionResult pr = project(f, BasisParams(src.beta, src.x0 + d, src.n));
    if (pr.report.discarded_norm > std::abs(d) * field_norm(differentiate(f)) + 1e-9) {
      pass = false;
      detail = fmt("moving bound broken at trial %d", trial);
    }
  }

  for (int trial = 0; trial < 200 && pass; ++trial) {
    const BasisParams basis(testsup::uniform(0.4, 2.5), testsup::uniform(-1.0, 1.0),
                            testsup::uniform_int(2, 24));
    const SpectralField f = testsup::random_field(basis);
    const double l2_sq = field_norm_sq(f);
    const double h1_sq = l2_sq + field_norm_sq(differentiate(f));
    if (h1_sq > (2.0 * basis.n * basis.beta * basis.beta + 1.0) * l2_sq * (1.0 + 1e-9)) {
      pass = false;
      detail = fmt("inverse inequality broken at trial %d", trial);
    }
  }

  const double elapsed = seconds_since(start);
  if (elapsed >= 30.0) {
    pass = false;
    detail = fmt("runtime %.2fs exceeds 30s", elapsed);
  }
  if (pass) detail = fmt("200 cases per property, %.2fs", elapsed);
  report("2 operator properties", pass, detail);
}

void criterion3_integrator_oracles() {
  bool pass = true;
  std::string detail;
  testsup::rng(9002);

  for (int trial = 0; trial < 50 && pass; ++trial) {
    const int n = testsup::uniform_int(2, 16);
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        const double v = testsup::uniform(-2.0, 2.0);
        a(i, j) = v;
        a(j, i) = v;
      }
    std::vector<cplx> v(n);
    for (auto& c : v) c = cplx(testsup::uniform(-1, 1), testsup::uniform(-1, 1));
    const double dt = testsup::uniform(0.0, 1.5);
    const std::vector<cplx> fast = expm_apply(a, dt, v);
    const std::vector<cplx> oracle = testsup::expm_eigen_oracle(a, dt, v);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      num += std::norm(fast[i] - oracle[i]);
      den += std::norm(oracle[i]);
    }
    if (std::sqrt(num) > 1e-11 * std::sqrt(den)) {
      pass = false;
      detail = fmt("oracle mismatch %.2e at trial %d (n=%d)", std::sqrt(num / den), trial, n);
    }
  }

  if (pass) {
    const BasisParams basis(1.1, -0.2, 18);
    const SpectralField f = testsup::random_field(basis);
    TimeStepper stepper(BilinearForm::heat(), SourceTerm{});
    const SpectralField whole = stepper.advance(f, 0.0, 0.02);
    const SpectralField halves =
        stepper.advance(stepper.advance(f, 0.0, 0.01), 0.01, 0.01);
    double worst = 0.0;
    for (int i = 0; i <= basis.n; ++i)
      worst = std::max(worst, std::abs(whole.coeffs[i] - halves.coeffs[i]));
    if (worst > 1e-12) {
      pass = false;
      detail = fmt("semigroup defect %.2e", worst);
    } else {
      detail = fmt("50 matrices vs eigendecomposition, semigroup defect %.1e", worst);
    }
  }
  report("3 integrator oracles", pass, detail);
}

// Audit of the frequency-indicator lower bound at one logged state.
struct FreqBoundAuditor {
  SourceFn analytic;
  int violations = 0;
  int checked = 0;
  double worst_margin = std::numeric_limits<double>::infinity();

  void operator()(double t, const SpectralField& field) {
    const std::optional<double> freq = frequency_indicator(field);
    if (!freq) return;
    const int n = field.basis.n;
    const int keep = n - n / 3;

    // project the analytic solution onto the first keep+1 modes, then
    // measure the projection residual pointwise; forming it as a norm
    // difference would cancel catastrophically at the ~1e-7 tail scale
    const QuadratureRule& rule = *detail::shared_rule(4 * (n + 1));
    std::vector<double> xs(rule.nodes.size());
    std::vector<cplx> uv(rule.nodes.size());
    for (size_t k = 0; k < xs.size(); ++k) {
      xs[k] = field.basis.x0 + rule.nodes[k] / field.basis.beta;
      uv[k] = analytic(xs[k], t);
    }
    std::vector<cplx> uhat(static_cast<size_t>(keep) + 1, cplx{});
    std::vector<double> row(static_cast<size_t>(keep) + 1);
    double u_norm_sq = 0.0;
    for (size_t k = 0; k < xs.size(); ++k) {
      u_norm_sq += rule.function_weights[k] / field.basis.beta * std::norm(uv[k]);
      detail::hermite_function_row(keep, rule.nodes[k], row);
      const cplx scaled = uv[k] * (rule.function_weights[k] / kSqrtPi);
      for (int i = 0; i <= keep; ++i) uhat[i] += scaled * row[i];
    }
    double tail_sq = 0.0;
    for (size_t k = 0; k < xs.size(); ++k) {
      detail::hermite_function_row(keep, rule.nodes[k], row);
      cplx projected{};
      for (int i = 0; i <= keep; ++i) projected += uhat[i] * row[i];
      tail_sq += rule.function_weights[k] / field.basis.beta * std::norm(uv[k] - projected);
    }
    const double tail = std::sqrt(tail_sq);

    const double err = absolute_l2_error(field, analytic, t);
    const double lower = *freq * std::sqrt(u_norm_sq) - tail;
    worst_margin = std::min(worst_margin, err - lower);
    if (err < lower - 1e-8) ++violations;
    ++checked;
  }
};

struct Example1Outcome {
  RunRecord record;
  FreqBoundAuditor audit;
};

Example1Outcome run_example1(double dt, double t_final, int n0, int log_every) {
  RunConfig cfg;
  cfg.problem = "example1";
  cfg.initial_basis = BasisParams(1.0, 0.0, n0);
  cfg.dt_override = dt;
  cfg.t_final_override = t_final;
  cfg.log_every = log_every;
  cfg.keep_event_fields = true;
  Example1Outcome out{RunRecord{}, FreqBoundAuditor{*example1().analytic}};
  out.record = run(cfg, example1(),
                   [&out](double t, const SpectralField& f) { out.audit(t, f); });
  return out;
}

void criterion4_example1(const Example1Outcome& full) {
  {
    const RunSummary& s = full.record.summary;
    bool pass = true;
    std::string detail;
    if (!(s.final_error < 1e-3)) {
      pass = false;
      detail = fmt("final error %.2e >= 1e-3", s.final_error);
    } else if (!(s.final_basis.x0 >= 3.0 && s.final_basis.x0 <= 5.0)) {
      pass = false;
      detail = fmt("final x0 %.3f outside [3,5]", s.final_basis.x0);
    } else if (!(s.final_basis.n > 40)) {
      pass = false;
      detail = fmt("final n %d <= 40", s.final_basis.n);
    } else if (full.audit.violations > 0) {
      pass = false;
      detail = fmt("%d lower-bound violations over %d rows", full.audit.violations,
                   full.audit.checked);
    } else {
      detail = fmt("err=%.2e x0=%.2f n=%d bound-margin>=%.1e over %d rows",
                   s.final_error, s.final_basis.x0, s.final_basis.n,
                   full.audit.worst_margin, full.audit.checked);
    }
    report("4 example1 full run", pass, detail);
  }

  {
    const auto start = std::chrono::steady_clock::now();
    const Example1Outcome reduced = run_example1(2e-3, 1.0, 30, 10);
    const double elapsed = seconds_since(start);
    const RunSummary& s = reduced.record.summary;
    bool pass = true;
    std::string detail;
    if (elapsed >= 60.0) {
      pass = false;
      detail = fmt("runtime %.1fs exceeds 60s", elapsed);
    } else if (!(s.final_error < 1e-2)) {
      pass = false;
      detail = fmt("final error %.2e >= 1e-2", s.final_error);
    } else if (!(s.final_basis.x0 >= 1.0 && s.final_basis.x0 <= 3.0)) {
      pass = false;
      detail = fmt("final x0 %.3f not near the center 2", s.final_basis.x0);
    } else if (!(s.final_basis.n > 30)) {
      pass = false;
      detail = fmt("final n %d <= 30", s.final_basis.n);
    } else if (reduced.audit.violations > 0) {
      pass = false;
      detail = fmt("%d lower-bound violations", reduced.audit.violations);
    } else {
      detail = fmt("err=%.2e x0=%.2f n=%d %.1fs", s.final_error, s.final_basis.x0,
                   s.final_basis.n, elapsed);
    }
    report("4 example1 reduced run", pass, detail);
  }
}

void criterion5_sweeps() {
  RunConfig base;
  base.problem = "example1";
  base.initial_basis = BasisParams(1.0, 0.0, 40);
  base.log_every = 10000;
  base.keep_event_fields = false;

  // q and mu probe the scaling and moving techniques with the expansion
  // order held fixed; otherwise order growth absorbs their effect
  RunConfig fixed_order = base;
  fixed_order.adaptive.enable_order = false;

  bool pass = true;
  std::string detail;

  const SweepResult q_sweep = sweep(fixed_order, "q", {0.8, 0.9, 0.95, 0.99});
  std::vector<double> q_err;
  for (const SweepCell& c : q_sweep.cells)
    q_err.push_back(finite_or_inf(c.record ? c.record->summary.final_error
                                           : std::numeric_limits<double>::infinity()));
  std::string why;
  if (!trend_non_increasing(q_err, &why)) {
    pass = false;
    detail = "q error trend: " + why;
  }

  const SweepResult mu_sweep = sweep(fixed_order, "mu", {1.00005, 1.05, 1.5});
  std::vector<double> mu_x0, mu_err;
  for (const SweepCell& c : mu_sweep.cells) {
    mu_x0.push_back(c.record ? c.record->summary.final_basis.x0 : 0.0);
    mu_err.push_back(finite_or_inf(c.record ? c.record->summary.final_error
                                            : std::numeric_limits<double>::infinity()));
  }
  if (pass && !trend_non_increasing(mu_x0, &why)) {
    pass = false;
    detail = "mu x0 trend: " + why;
  }
  if (pass && !trend_non_decreasing(mu_err, &why)) {
    pass = false;
    detail = "mu error trend: " + why;
  }

  const SweepResult g_sweep = sweep(base, "gamma", {1.02, 1.2, 2.0});
  std::vector<double> g_n;
  for (const SweepCell& c : g_sweep.cells)
    g_n.push_back(c.record ? static_cast<double>(c.record->summary.final_basis.n) : 1e9);
  if (pass && !trend_non_increasing(g_n, &why)) {
    pass = false;
    detail = "gamma n trend: " + why;
  }

  if (pass)
    detail = fmt("q err {%.1e %.1e %.1e %.1e} | mu x0 {%.2f %.2f %.2f} | gamma n {%g %g %g}",
                 q_err[0], q_err[1], q_err[2], q_err[3], mu_x0[0], mu_x0[1], mu_x0[2],
                 g_n[0], g_n[1], g_n[2]);
  report("5 example1 sweep trends", pass, detail);
}

const RunRow* row_at(const RunRecord& rec, double t) {
  for (const RunRow& r : rec.rows)
    if (std::abs(r.t - t) < 1e-9) return &r;
  return nullptr;
}

std::vector<ModeRun> run_example2_modes() {
  RunConfig base;
  base.problem = "example2";
  base.log_every = 250;  // rows every 0.05 with the preset step
  base.keep_event_fields = true;
  return compare_moving_modes(base);
}

void criterion6_example2(const std::vector<ModeRun>& modes) {
  bool pass = true;
  std::string detail;

  const RunRecord* none = nullptr;
  const RunRecord* left = nullptr;
  const RunRecord* right = nullptr;
  const RunRecord* both = nullptr;
  for (const ModeRun& mr : modes) {
    if (mr.mode == "none") none = &mr.record;
    if (mr.mode == "left_only") left = &mr.record;
    if (mr.mode == "right_only") right = &mr.record;
    if (mr.mode == "bidirectional") both = &mr.record;
  }

  const double e_both = finite_or_inf(both->summary.final_error);
  for (const RunRecord* other : {none, left, right}) {
    const double e_other = finite_or_inf(other->summary.final_error);
    if (!(e_both * 5.0 <= e_other)) {
      pass = false;
      detail = fmt("bidirectional %.2e not 5x under %.2e", e_both, e_other);
    }
  }

  if (pass) {
    const RunRow* l2 = row_at(*left, 2.0);
    const RunRow* b2 = row_at(*both, 2.0);
    if (!l2 || !b2 || !(l2->rel_error <= 2.0 * b2->rel_error)) {
      pass = false;
      detail = fmt("left-only at t=2 (%.2e) not within 2x of bidirectional (%.2e)",
                   l2 ? l2->rel_error : -1.0, b2 ? b2->rel_error : -1.0);
    }
  }

  if (pass) {
    const RunRow* n0 = row_at(*none, 0.0);
    const RunRow* n15 = row_at(*none, 1.5);
    const RunRow* n5 = row_at(*none, 5.0);
    if (!n0 || !n15 || !n5 || !(n15->ext_left > n0->ext_left) ||
        !(n5->ext_right > n0->ext_right)) {
      pass = false;
      detail = "no-moving exterior indicators did not grow as expected";
    }
  }

  if (pass)
    detail = fmt("final err: both=%.2e none=%.2e left=%.2e right=%.2e", e_both,
                 finite_or_inf(none->summary.final_error),
                 finite_or_inf(left->summary.final_error),
                 finite_or_inf(right->summary.final_error));
  report("6 example2 moving modes", pass, detail);
}

void criterion7_ledger(const Example1Outcome& full, const std::vector<ModeRun>& modes) {
  bool pass = true;
  std::string detail;

  const SourceFn u1 = *example1().analytic;
  const BoundReport r1 = verify_bound(full.record.events, u1);
  long events = static_cast<long>(r1.rows.size());
  int failures = r1.failures;

  const SourceFn u2 = *example2().analytic;
  for (const ModeRun& mr : modes) {
    const BoundReport r2 = verify_bound(mr.record.events, u2);
    events += static_cast<long>(r2.rows.size());
    failures += r2.failures;
  }

  if (failures > 0) {
    pass = false;
    detail = fmt("%d of %ld event jumps exceeded their ledger terms", failures, events);
  } else {
    detail = fmt("all %ld event jumps within their ledger terms", events);
  }
  report("7 ledger bound audit", pass, detail);
}

void criterion8_declarations() {
  report("8 scope declarations", true,
         "reference curves are checked as trends only (criteria 4-6), not as digitized "
         "values; analysis-only inequality constants are never computed, their role is "
         "covered by the property and ledger audits (criteria 2, 7)");
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--quick") == 0) quick = true;

  criterion1_quadrature_orthogonality();
  criterion2_operator_properties();
  criterion3_integrator_oracles();

  if (quick) {
    std::printf("SKIP criteria 4-7 (--quick)\n");
    criterion8_declarations();
    return g_failures == 0 ? 0 : 1;
  }

  const Example1Outcome full = run_example1(2e-4, 2.0, 40, 20);
  criterion4_example1(full);
  criterion5_sweeps();
  const std::vector<ModeRun> modes = run_example2_modes();
  criterion6_example2(modes);
  criterion7_ledger(full, modes);
  criterion8_declarations();

  std::printf("%s: %d criterion failure(s)\n", g_failures == 0 ? "SUCCESS" : "FAILURE",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
