#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hsm/ledger.hpp"
#include "hsm/runner_fwd.hpp"

namespace hsm {

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline nlohmann::json basis_json(const BasisParams& b) {
  return {{"beta", b.beta}, {"x0", b.x0}, {"n", b.n}};
}

inline nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace detail

inline ParabolicProblem make_problem(const std::string& name) {
  if (name == "example1") return example1();
  if (name == "example2") return example2();
  throw ConfigError("unknown problem '" + name + "' (expected example1 or example2;"
                    " custom problems enter through the library API)");
}

inline void write_series_csv(const std::filesystem::path& path,
                             const std::vector<RunRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file " + path.string());
  out << "t,rel_error,beta,x0,n,freq,ext_left,ext_right,e_scale,e_move,e_coarsen\n";
  for (const RunRow& r : rows) {
    out << detail::fmt_double(r.t) << ',' << detail::fmt_double(r.rel_error) << ','
        << detail::fmt_double(r.beta) << ',' << detail::fmt_double(r.x0) << ',' << r.n << ','
        << detail::fmt_double(r.freq) << ',' << detail::fmt_double(r.ext_left) << ','
        << detail::fmt_double(r.ext_right) << ',' << detail::fmt_double(r.e_scale) << ','
        << detail::fmt_double(r.e_move) << ',' << detail::fmt_double(r.e_coarsen) << '\n';
  }
}

inline void write_events_json(const std::filesystem::path& path,
                              const std::vector<AdaptationEvent>& events) {
  nlohmann::json arr = nlohmann::json::array();
  for (const AdaptationEvent& ev : events) {
    arr.push_back({{"kind", event_kind_name(ev.kind)},
                   {"t", ev.time},
                   {"before", detail::basis_json(ev.before)},
                   {"after", detail::basis_json(ev.after)},
                   {"ledger_increment", ev.ledger_increment}});
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file " + path.string());
  out << arr.dump(2) << '\n';
}

inline void write_summary_json(const std::filesystem::path& path, const RunRecord& record) {
  const RunSummary& s = record.summary;
  nlohmann::json j{
      {"problem", s.problem},
      {"completed", s.completed},
      {"steps", s.steps},
      {"final_time", s.final_time},
      {"final_error", detail::finite_or_null(s.final_error)},
      {"wall_seconds", s.wall_seconds},
      {"final_basis", detail::basis_json(s.final_basis)},
      {"ledger",
       {{"e_scale", s.totals.e_scale},
        {"e_move", s.totals.e_move},
        {"e_coarsen", s.totals.e_coarsen}}},
      {"counts",
       {{"move_right", s.totals.count(EventKind::MoveRight)},
        {"move_left", s.totals.count(EventKind::MoveLeft)},
        {"scale_up", s.totals.count(EventKind::ScaleUp)},
        {"scale_down", s.totals.count(EventKind::ScaleDown)},
        {"refine", s.totals.count(EventKind::Refine)},
        {"coarsen", s.totals.count(EventKind::Coarsen)}}},
  };
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file " + path.string());
  out << j.dump(2) << '\n';
}

inline void write_run_outputs(const RunRecord& record, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_series_csv(dir / "series.csv", record.rows);
  write_events_json(dir / "events.json", record.events);
  write_summary_json(dir / "summary.json", record);
}

/**
 * Full solve of one configured problem: interpolate the initial condition,
 * alternate exact time advances with the adaptation pipeline, keep the
 * posterior-bound ledger in sync with the events, and log a row every
 * log_every steps.  Logging is observation only.  If the integrator throws,
 * whatever was recorded is flushed before the exception escapes.
 */
inline RunRecord run(const RunConfig& config, const ParabolicProblem& problem,
                     const std::function<void(double, const SpectralField&)>& on_log = {}) {
  config.adaptive.validate();
  if (config.log_every < 1) throw ConfigError("log_every must be >= 1");

  ParabolicProblem prob = problem;
  if (config.dt_override) prob.dt = *config.dt_override;
  if (config.t_final_override) prob.horizon = *config.t_final_override;
  prob.validate();

  const auto t_start = std::chrono::steady_clock::now();
  const long steps = std::llround(prob.horizon / prob.dt);

  const std::vector<double> xs = collocation_points(config.initial_basis);
  std::vector<cplx> init_values(xs.size());
  for (size_t k = 0; k < xs.size(); ++k) init_values[k] = prob.initial(xs[k]);
  SpectralField field = analyze(init_values, config.initial_basis);

  ThresholdState st = make_threshold_state(field, config.adaptive);
  TimeStepper stepper(prob.form, prob.source, config.gl_order);

  RunRecord record;
  record.summary.problem = config.problem;
  record.summary.steps = steps;

  LedgerTotals totals;
  auto log_row = [&](double t) {
    RunRow row;
    row.t = t;
    row.rel_error = std::numeric_limits<double>::quiet_NaN();
    if (prob.analytic) {
      if (const auto err = relative_l2_error(field, *prob.analytic, t)) row.rel_error = *err;
    }
    row.beta = field.basis.beta;
    row.x0 = field.basis.x0;
    row.n = field.basis.n;
    row.freq = std::numeric_limits<double>::quiet_NaN();
    row.ext_left = std::numeric_limits<double>::quiet_NaN();
    row.ext_right = std::numeric_limits<double>::quiet_NaN();
    if (const auto freq = frequency_indicator(field)) row.freq = *freq;
    if (const auto ext = exterior_error_indicators(field)) {
      row.ext_left = ext->left;
      row.ext_right = ext->right;
    }
    row.e_scale = totals.e_scale;
    row.e_move = totals.e_move;
    row.e_coarsen = totals.e_coarsen;
    record.rows.push_back(row);
    if (on_log) on_log(t, field);
  };

  auto finalize = [&](double t, bool completed) {
    record.summary.completed = completed;
    record.summary.final_time = t;
    record.summary.final_basis = field.basis;
    record.summary.totals = totals;
    record.summary.final_error = record.rows.empty()
                                     ? std::numeric_limits<double>::quiet_NaN()
                                     : record.rows.back().rel_error;
    record.summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    if (!config.output_path.empty()) write_run_outputs(record, config.output_path);
  };

  double t = 0.0;
  log_row(0.0);
  try {
    for (long j = 0; j < steps; ++j) {
      field = stepper.advance(field, j * prob.dt, prob.dt);
      t = (j + 1) * prob.dt;
      ControllerStepResult adapted = controller_step(field, t, config.adaptive, st);
      field = std::move(adapted.field);
      for (AdaptationEvent& ev : adapted.events) {
        totals.add(ev);
        if (!config.keep_event_fields) {
          ev.pre_field.reset();
          ev.post_field.reset();
        }
        record.events.push_back(std::move(ev));
      }
      if ((j + 1) % config.log_every == 0 || j + 1 == steps) log_row(t);
    }
  } catch (...) {
    finalize(t, false);
    throw;
  }
  finalize(t, true);
  return record;
}

inline RunRecord run(const RunConfig& config) {
  return run(config, make_problem(config.problem));
}

inline double* sweep_parameter_slot(AdaptiveConfig& cfg, const std::string& name) {
  if (name == "q") return &cfg.q;
  if (name == "nu") return &cfg.nu;
  if (name == "delta") return &cfg.delta;
  if (name == "mu") return &cfg.mu;
  if (name == "gamma") return &cfg.gamma;
  if (name == "eta") return &cfg.eta;
  if (name == "eta0") return &cfg.eta0;
  return nullptr;
}

/**
 * One run per parameter value, fanned out across threads (runs share
 * nothing).  A failed cell is reported and skipped; the sweep continues.
 * Writes a consolidated summary CSV next to the per-run outputs.
 */
inline SweepResult sweep(const RunConfig& base, const std::string& parameter,
                         const std::vector<double>& values) {
  {
    AdaptiveConfig probe = base.adaptive;
    if (!sweep_parameter_slot(probe, parameter))
      throw ConfigError("sweep: unknown parameter '" + parameter + "'");
  }

  std::vector<std::future<RunRecord>> futures;
  futures.reserve(values.size());
  for (double value : values) {
    RunConfig config = base;
    config.keep_event_fields = false;
    *sweep_parameter_slot(config.adaptive, parameter) = value;
    if (!base.output_path.empty()) {
      config.output_path = (std::filesystem::path(base.output_path) /
                            (parameter + "_" + detail::fmt_label(value)))
                               .string();
    }
    futures.push_back(std::async(std::launch::async,
                                 [config]() { return run(config); }));
  }

  SweepResult result;
  result.parameter = parameter;
  for (size_t i = 0; i < futures.size(); ++i) {
    SweepCell cell;
    cell.value = values[i];
    try {
      cell.record = futures[i].get();
    } catch (const std::exception& e) {
      cell.error_message = e.what();
    }
    result.cells.push_back(std::move(cell));
  }

  if (!base.output_path.empty()) {
    std::filesystem::create_directories(base.output_path);
    std::ofstream out(std::filesystem::path(base.output_path) / "sweep_summary.csv");
    out << "value,final_error,final_beta,final_x0,final_n\n";
    for (const SweepCell& cell : result.cells) {
      if (!cell.record) {
        out << detail::fmt_double(cell.value) << ",failed,,,\n";
        continue;
      }
      const RunSummary& s = cell.record->summary;
      out << detail::fmt_double(cell.value) << ',' << detail::fmt_double(s.final_error) << ','
          << detail::fmt_double(s.final_basis.beta) << ','
          << detail::fmt_double(s.final_basis.x0) << ',' << s.final_basis.n << '\n';
    }
  }
  return result;
}

/**
 * The four moving-technique variants on the translating-pulse problem, with
 * the moving-only tuning that problem calls for (scaling and order
 * adaptation off; mu 1.0005, delta 5e-4, d_max 0.2, beta 1.2, n 24, x0 0).
 */
inline std::vector<ModeRun> compare_moving_modes(const RunConfig& base) {
  if (base.problem != "example2")
    throw ConfigError("compare_moving_modes expects problem=example2");
  const std::pair<const char*, MoveMode> modes[] = {
      {"none", MoveMode::Off},
      {"left_only", MoveMode::LeftOnly},
      {"right_only", MoveMode::RightOnly},
      {"bidirectional", MoveMode::Both},
  };
  std::vector<std::future<RunRecord>> futures;
  std::vector<std::string> names;
  for (const auto& [name, mode] : modes) {
    RunConfig config = base;
    config.initial_basis = BasisParams(1.2, 0.0, 24);
    config.adaptive.mu = 1.0005;
    config.adaptive.delta = 5e-4;
    config.adaptive.d_max = 0.2;
    config.adaptive.enable_scale = false;
    config.adaptive.enable_order = false;
    config.adaptive.move_mode = mode;
    if (!base.output_path.empty())
      config.output_path = (std::filesystem::path(base.output_path) / name).string();
    names.emplace_back(name);
    futures.push_back(std::async(std::launch::async,
                                 [config]() { return run(config); }));
  }
  std::vector<ModeRun> out;
  for (size_t i = 0; i < futures.size(); ++i)
    out.push_back(ModeRun{names[i], futures[i].get()});

  if (!base.output_path.empty()) {
    std::filesystem::create_directories(base.output_path);
    std::ofstream csv(std::filesystem::path(base.output_path) / "comparison.csv");
    csv << "mode,final_error,final_x0,e_move_total\n";
    for (const ModeRun& mr : out) {
      csv << mr.mode << ',' << detail::fmt_double(mr.record.summary.final_error) << ','
          << detail::fmt_double(mr.record.summary.final_basis.x0) << ','
          << detail::fmt_double(mr.record.summary.totals.e_move) << '\n';
    }
  }
  return out;
}

}  // namespace hsm
