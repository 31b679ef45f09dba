#pragma once

#include <array>
#include <span>
#include <vector>

#include "hsm/controller.hpp"
#include "hsm/problems.hpp"

namespace hsm {

/// Running posterior-bound totals: one sum per adaptation family, plus event
/// counts.  Refinement is exact and contributes only to its count.
struct LedgerTotals {
  double e_scale = 0.0;
  double e_move = 0.0;
  double e_coarsen = 0.0;
  std::array<long, 6> counts{};  // indexed by EventKind

  void add(const AdaptationEvent& ev) {
    counts[static_cast<size_t>(ev.kind)] += 1;
    switch (ev.kind) {
      case EventKind::ScaleUp:
      case EventKind::ScaleDown:
        e_scale += ev.ledger_increment;
        break;
      case EventKind::MoveRight:
      case EventKind::MoveLeft:
        e_move += ev.ledger_increment;
        break;
      case EventKind::Coarsen:
        e_coarsen += ev.ledger_increment;
        break;
      case EventKind::Refine:
        break;
    }
  }

  long count(EventKind k) const { return counts[static_cast<size_t>(k)]; }
  long scale_count() const { return count(EventKind::ScaleUp) + count(EventKind::ScaleDown); }
  long move_count() const { return count(EventKind::MoveRight) + count(EventKind::MoveLeft); }
  long order_count() const { return count(EventKind::Refine) + count(EventKind::Coarsen); }
  double bound_sum() const { return e_scale + e_move + e_coarsen; }
};

inline LedgerTotals record(const AdaptationEvent& ev, LedgerTotals totals) {
  totals.add(ev);
  return totals;
}

struct BoundCheckRow {
  EventKind kind;
  double time;
  double ledger_increment;
  double measured_jump;  // error right after the change minus right before
  bool pass;
};

struct BoundReport {
  std::vector<BoundCheckRow> rows;
  int failures = 0;
};

/**
 * Audit the per-event bound: at each adaptation the instantaneous increase of
 * the measured L2 error (same time, before vs after the basis change) must
 * not exceed the booked increment, up to tolerance.  Needs the analytic
 * solution; each side is measured by quadrature in its own basis scale.
 */
inline BoundReport verify_bound(std::span<const AdaptationEvent> events,
                                const SourceFn& analytic, double tol = 1e-9) {
  BoundReport report;
  report.rows.reserve(events.size());
  for (const AdaptationEvent& ev : events) {
    if (!ev.pre_field || !ev.post_field)
      throw std::invalid_argument("verify_bound: event field snapshots were dropped");
    const double before = absolute_l2_error(*ev.pre_field, analytic, ev.time);
    const double after = absolute_l2_error(*ev.post_field, analytic, ev.time);
    const double jump = after - before;
    const bool pass = jump <= ev.ledger_increment + tol;
    if (!pass) ++report.failures;
    report.rows.push_back({ev.kind, ev.time, ev.ledger_increment, jump, pass});
  }
  return report;
}

}  // namespace hsm
