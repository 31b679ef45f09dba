#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hsm/controller.hpp"
#include "hsm/ledger.hpp"
#include "hsm/problems.hpp"

namespace hsm {

/// Everything a single run needs beyond the problem itself.
struct RunConfig {
  std::string problem = "example1";
  BasisParams initial_basis{1.0, 0.0, 40};
  AdaptiveConfig adaptive;
  int gl_order = 5;
  std::string output_path;  // empty: in-memory only
  int log_every = 1;
  std::optional<double> dt_override;
  std::optional<double> t_final_override;
  bool keep_event_fields = true;  // retain snapshots for the bound audit
};

/// One logged observation; columns match the series CSV.
struct RunRow {
  double t = 0.0;
  double rel_error = 0.0;
  double beta = 0.0;
  double x0 = 0.0;
  int n = 0;
  double freq = 0.0;
  double ext_left = 0.0;
  double ext_right = 0.0;
  double e_scale = 0.0;
  double e_move = 0.0;
  double e_coarsen = 0.0;
};

struct RunSummary {
  std::string problem;
  bool completed = false;
  long steps = 0;
  double final_time = 0.0;
  double final_error = 0.0;
  double wall_seconds = 0.0;
  BasisParams final_basis{1.0, 0.0, 0};
  LedgerTotals totals;
};

struct RunRecord {
  std::vector<RunRow> rows;
  std::vector<AdaptationEvent> events;
  RunSummary summary;
};

struct SweepCell {
  double value = 0.0;
  std::optional<RunRecord> record;
  std::string error_message;
};

struct SweepResult {
  std::string parameter;
  std::vector<SweepCell> cells;
};

struct ModeRun {
  std::string mode;
  RunRecord record;
};

}  // namespace hsm
