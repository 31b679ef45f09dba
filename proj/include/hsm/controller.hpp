#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hsm/indicators.hpp"
#include "hsm/operators.hpp"

namespace hsm {

enum class EventKind { MoveRight, MoveLeft, ScaleUp, ScaleDown, Refine, Coarsen };

inline const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::MoveRight: return "move_right";
    case EventKind::MoveLeft: return "move_left";
    case EventKind::ScaleUp: return "scale_up";
    case EventKind::ScaleDown: return "scale_down";
    case EventKind::Refine: return "refine";
    case EventKind::Coarsen: return "coarsen";
  }
  return "unknown";
}

enum class MoveMode { Off, LeftOnly, RightOnly, Both };

/// Controller tuning: update ratios, activation multipliers, and the hard
/// clamps on how far any single step may change the basis.
struct AdaptiveConfig {
  double q = 0.99;        // scaling update ratio, in (0,1)
  double nu = 1.02;       // scaling activation multiplier, > 1
  double delta = 1e-4;    // minimal displacement quantum, > 0
  double mu = 1.00005;    // moving activation multiplier, > 1
  double eta = 1.05;      // initial refinement multiplier, >= eta0
  double eta0 = 1.02;     // coarsening multiplier, > 1
  double gamma = 1.02;    // growth of the refinement multiplier, >= 1
  double d_max = 0.01;    // max displacement per step
  int n_max = 6;          // max order increment per step
  double beta_min = 0.2;
  double beta_max = 5.0;
  // Frequency references recorded below this are clamped up to it.  The
  // indicator is round-off noise once the spectrum tail reaches machine
  // precision; a reference that follows it down there turns the relative
  // thresholds into noise triggers and the order search never settles.
  double freq_floor = 1e-13;
  bool enable_scale = true;
  bool enable_order = true;
  MoveMode move_mode = MoveMode::Both;

  bool move_enabled() const { return move_mode != MoveMode::Off; }
  bool move_right_enabled() const {
    return move_mode == MoveMode::Both || move_mode == MoveMode::RightOnly;
  }
  bool move_left_enabled() const {
    return move_mode == MoveMode::Both || move_mode == MoveMode::LeftOnly;
  }

  void validate() const {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("adaptive: q must lie in (0,1)");
    if (!(nu > 1.0)) throw ConfigError("adaptive: nu must exceed 1");
    if (!(mu > 1.0)) throw ConfigError("adaptive: mu must exceed 1");
    if (!(eta0 > 1.0)) throw ConfigError("adaptive: eta0 must exceed 1");
    if (!(eta >= eta0)) throw ConfigError("adaptive: eta must be >= eta0");
    if (!(gamma >= 1.0)) throw ConfigError("adaptive: gamma must be >= 1");
    if (!(delta > 0.0)) throw ConfigError("adaptive: delta must be positive");
    if (!(d_max > 0.0)) throw ConfigError("adaptive: d_max must be positive");
    if (!(delta <= d_max)) throw ConfigError("adaptive: delta must not exceed d_max");
    if (n_max < 1) throw ConfigError("adaptive: n_max must be >= 1");
    if (!(beta_min > 0.0)) throw ConfigError("adaptive: beta_min must be positive");
    if (!(beta_max > beta_min)) throw ConfigError("adaptive: beta_max must exceed beta_min");
    if (!(freq_floor > 0.0)) throw ConfigError("adaptive: freq_floor must be positive");
  }
};

/// Reference indicator values the activation thresholds are derived from.
/// The scaling reference is refreshed by scaling and order events alike; the
/// order reference only by order events; the exterior references by moves.
/// The exterior cut positions are part of the moving technique's state: they
/// are placed once from the initial basis and afterwards only translated
/// along with it, so the exterior references stay comparable across scaling
/// and order changes.
struct ThresholdState {
  std::optional<double> f_ref_scale;
  std::optional<double> f_ref_order;
  std::optional<double> e_ref_right;
  std::optional<double> e_ref_left;
  std::optional<ExteriorCuts> cuts;
  double eta_current = 0.0;
  // Lower bound for the frequency references: the indicator recorded when
  // references were first anchored (never below the config floor).  The
  // initial resolution is the control target; without this anchor each
  // refinement re-anchors the reference below the previous one and the
  // order search burrows until the spectrum tail is round-off.
  double freq_anchor = 0.0;
};

/// Frequency reference with the anchor floor applied.
inline std::optional<double> floored(std::optional<double> freq, const ThresholdState& st) {
  if (!freq) return freq;
  return std::max(*freq, st.freq_anchor);
}

/// First recording of a frequency reference fixes the anchor as well.
inline std::optional<double> anchor_first(std::optional<double> freq, ThresholdState& st,
                                          const AdaptiveConfig& cfg) {
  if (!freq) return freq;
  if (st.freq_anchor <= 0.0) st.freq_anchor = std::max(*freq, cfg.freq_floor);
  return floored(freq, st);
}

inline ThresholdState make_threshold_state(const SpectralField& initial,
                                           const AdaptiveConfig& cfg) {
  ThresholdState st;
  st.eta_current = cfg.eta;
  st.freq_anchor = 0.0;
  const std::optional<double> f0 = anchor_first(frequency_indicator(initial), st, cfg);
  st.f_ref_scale = st.f_ref_order = f0;
  if (initial.basis.n >= 3) st.cuts = basis_exterior_cuts(initial.basis);
  const detail::ExteriorEvaluator ev =
      detail::make_exterior_evaluator(initial, st.cuts ? &*st.cuts : nullptr);
  if (!ev.degenerate) {
    st.e_ref_right = ev.right_ratio(0.0);
    st.e_ref_left = ev.left_ratio(0.0);
  }
  return st;
}

/// One basis change, with the posterior-bound increment it contributes and
/// the field snapshots needed to audit that bound afterwards.  Snapshots may
/// be dropped (null) by callers that only need the serialized record.
struct AdaptationEvent {
  EventKind kind;
  double time;
  BasisParams before;
  BasisParams after;
  double ledger_increment;
  std::shared_ptr<const SpectralField> pre_field;
  std::shared_ptr<const SpectralField> post_field;
};

/// Eq-level bound factor for a scaling change: |b~ - b| sqrt(1 + b~/b) / (sqrt(2) b~).
inline double scaling_bound_factor(double beta_from, double beta_to) {
  return std::abs(beta_to - beta_from) * std::sqrt(1.0 + beta_to / beta_from) /
         (std::sqrt(2.0) * beta_to);
}

struct MoveOutcome {
  SpectralField field;
  std::optional<AdaptationEvent> event;
};

struct ScaleOutcome {
  SpectralField field;
  std::optional<AdaptationEvent> event;
  bool refine_needed = false;
};

struct OrderOutcome {
  SpectralField field;
  std::optional<AdaptationEvent> event;
};

/**
 * Bidirectional exterior-error-driven translation.  When either exterior
 * indicator exceeds mu times its reference, search the smallest multiples of
 * delta whose shifted cut brings each side back under threshold (capped at
 * d_max), move the basis by the net displacement via projection, and
 * re-record both references from the post-move field.
 */
inline MoveOutcome maybe_move(const SpectralField& field, const AdaptiveConfig& cfg,
                              ThresholdState& st, double t = 0.0) {
  if (!cfg.move_enabled()) return {field, std::nullopt};
  if (field.basis.n >= 3 && !st.cuts) st.cuts = basis_exterior_cuts(field.basis);
  const detail::ExteriorEvaluator ev =
      detail::make_exterior_evaluator(field, st.cuts ? &*st.cuts : nullptr);
  if (ev.degenerate) return {field, std::nullopt};
  const double e_right = ev.right_ratio(0.0);
  const double e_left = ev.left_ratio(0.0);
  if (!st.e_ref_right || !st.e_ref_left) {
    st.e_ref_right = e_right;
    st.e_ref_left = e_left;
    return {field, std::nullopt};
  }
  const bool trig_right = cfg.move_right_enabled() && e_right > cfg.mu * *st.e_ref_right;
  const bool trig_left = cfg.move_left_enabled() && e_left > cfg.mu * *st.e_ref_left;
  if (!trig_right && !trig_left) return {field, std::nullopt};

  const int cap = static_cast<int>(std::ceil(cfg.d_max / cfg.delta));
  auto search = [&](bool rightward, double threshold) {
    for (int n = 0; n <= cap; ++n) {
      const double shift = n * cfg.delta;
      const double ratio = rightward ? ev.right_ratio(shift) : ev.left_ratio(shift);
      if (ratio < threshold) return std::min(shift, cfg.d_max);
    }
    return cfg.d_max;
  };
  const double d_right =
      cfg.move_right_enabled() ? search(true, cfg.mu * *st.e_ref_right) : 0.0;
  const double d_left =
      cfg.move_left_enabled() ? search(false, cfg.mu * *st.e_ref_left) : 0.0;
  const double net = d_right - d_left;

  // References re-record from the post-move state, but never above mu times
  // their previous value: when the displacement search ran into d_max the
  // indicator is still over threshold, and letting the reference chase it
  // upward would permanently loosen the technique.
  auto refresh = [&](std::optional<double>& ref, double value) {
    ref = ref ? std::min(value, cfg.mu * *ref) : value;
  };

  if (net == 0.0) {
    refresh(st.e_ref_right, e_right);
    refresh(st.e_ref_left, e_left);
    return {field, std::nullopt};
  }

  const BasisParams target(field.basis.beta, field.basis.x0 + net, field.basis.n);
  ProjectionResult moved = project(field, target);
  const double increment = std::abs(net) * field_norm(differentiate(field));
  if (st.cuts) {
    st.cuts->right += net;
    st.cuts->left += net;
  }
  const detail::ExteriorEvaluator post =
      detail::make_exterior_evaluator(moved.field, st.cuts ? &*st.cuts : nullptr);
  if (!post.degenerate) {
    refresh(st.e_ref_right, post.right_ratio(0.0));
    refresh(st.e_ref_left, post.left_ratio(0.0));
  } else {
    st.e_ref_right.reset();
    st.e_ref_left.reset();
  }
  AdaptationEvent event{net > 0.0 ? EventKind::MoveRight : EventKind::MoveLeft,
                        t,
                        field.basis,
                        target,
                        increment,
                        std::make_shared<const SpectralField>(field),
                        std::make_shared<const SpectralField>(moved.field)};
  return {std::move(moved.field), std::move(event)};
}

/**
 * Width adaptation.  Shrink beta through powers of q (with the clamp value
 * as final candidate) until the projected field's frequency indicator drops
 * under nu times the reference; if no candidate manages it, leave the field
 * alone and report that refinement is needed instead.  Grow beta by a single
 * 1/q step when the indicator has fallen below reference/nu, accepting only
 * if the projection does not push the indicator back above the reference.
 */
inline ScaleOutcome maybe_scale(const SpectralField& field, const AdaptiveConfig& cfg,
                                ThresholdState& st, double t = 0.0) {
  if (!cfg.enable_scale) return {field, std::nullopt, false};
  const std::optional<double> freq = frequency_indicator(field);
  if (!freq) return {field, std::nullopt, false};
  if (!st.f_ref_scale) {
    st.f_ref_scale = anchor_first(freq, st, cfg);
    return {field, std::nullopt, false};
  }
  const double ref = *st.f_ref_scale;
  const double beta = field.basis.beta;

  auto apply = [&](ProjectionResult scaled, EventKind kind) {
    const double increment =
        scaling_bound_factor(beta, scaled.field.basis.beta) * x_weighted_deriv_norm(field);
    st.f_ref_scale = floored(frequency_indicator(scaled.field), st);
    AdaptationEvent event{kind,
                          t,
                          field.basis,
                          scaled.field.basis,
                          increment,
                          std::make_shared<const SpectralField>(field),
                          std::make_shared<const SpectralField>(scaled.field)};
    return ScaleOutcome{std::move(scaled.field), std::move(event), false};
  };

  if (*freq > cfg.nu * ref) {
    double candidate = beta;
    for (int iter = 0; iter < 100000; ++iter) {
      candidate *= cfg.q;
      const bool clamped = candidate <= cfg.beta_min;
      if (clamped) candidate = cfg.beta_min;
      if (candidate >= beta) break;  // clamp above current value, nothing to try
      ProjectionResult trial =
          project(field, BasisParams(candidate, field.basis.x0, field.basis.n));
      const std::optional<double> trial_freq = frequency_indicator(trial.field);
      if (trial_freq && *trial_freq < cfg.nu * ref)
        return apply(std::move(trial), EventKind::ScaleDown);
      if (clamped) break;
    }
    return {field, std::nullopt, true};
  }

  if (*freq < ref / cfg.nu) {
    const double candidate = std::min(beta / cfg.q, cfg.beta_max);
    if (candidate <= beta) return {field, std::nullopt, false};
    ProjectionResult trial =
        project(field, BasisParams(candidate, field.basis.x0, field.basis.n));
    const std::optional<double> trial_freq = frequency_indicator(trial.field);
    if (trial_freq && *trial_freq <= ref) return apply(std::move(trial), EventKind::ScaleUp);
    return {field, std::nullopt, false};
  }

  return {field, std::nullopt, false};
}

/**
 * Order adaptation.  Refinement pads zero modes (exact, no bound increment)
 * up to the smallest order whose re-cut frequency indicator clears the
 * current refinement threshold, capped at n + n_max; each refinement raises
 * the threshold multiplier by gamma.  Coarsening truncates to the smallest
 * order that keeps the indicator within eta0 times the reference and books
 * the discarded tail.  Both refresh the order and scaling references.
 */
inline OrderOutcome maybe_adapt_order(const SpectralField& field, const AdaptiveConfig& cfg,
                                      ThresholdState& st, bool refine_needed,
                                      double t = 0.0) {
  if (!cfg.enable_order) return {field, std::nullopt};
  const std::optional<double> freq = frequency_indicator(field);
  if (!freq) return {field, std::nullopt};
  if (!st.f_ref_order) {
    st.f_ref_order = anchor_first(freq, st, cfg);
    return {field, std::nullopt};
  }
  const double ref = *st.f_ref_order;
  const int n = field.basis.n;

  auto finish = [&](SpectralField next, EventKind kind, double increment) {
    const std::optional<double> post = floored(frequency_indicator(next), st);
    st.f_ref_order = post;
    st.f_ref_scale = post;  // order changes also re-anchor the scaling threshold
    AdaptationEvent event{kind,
                          t,
                          field.basis,
                          next.basis,
                          increment,
                          std::make_shared<const SpectralField>(field),
                          std::make_shared<const SpectralField>(next)};
    return OrderOutcome{std::move(next), std::move(event)};
  };

  if (refine_needed || *freq > st.eta_current * ref) {
    const double threshold = st.eta_current * ref;
    double total = 0.0;
    for (const cplx& c : field.coeffs) total += std::norm(c);
    const double den = std::sqrt(total);
    int chosen = n + cfg.n_max;
    for (int cand = n + 1; cand <= n + cfg.n_max; ++cand) {
      const int m_cut = cand / 3;
      double tail = 0.0;
      for (int i = std::max(cand - m_cut + 1, 0); i <= std::min(n, cand); ++i)
        tail += std::norm(field.coeffs[i]);
      if (std::sqrt(tail) / den < threshold) {
        chosen = cand;
        break;
      }
    }
    ProjectionResult padded =
        project(field, BasisParams(field.basis.beta, field.basis.x0, chosen));
    st.eta_current *= cfg.gamma;
    return finish(std::move(padded.field), EventKind::Refine, 0.0);
  }

  if (*freq < ref / cfg.eta0) {
    int chosen = -1;
    for (int cand = 3; cand <= n; ++cand) {
      const int m_cut = cand / 3;
      double total = 0.0, tail = 0.0;
      for (int i = 0; i <= cand; ++i) {
        const double a = std::norm(field.coeffs[i]);
        total += a;
        if (i >= cand - m_cut + 1) tail += a;
      }
      if (total <= 0.0) continue;
      if (std::sqrt(tail / total) <= cfg.eta0 * ref) {
        chosen = cand;
        break;
      }
    }
    if (chosen < 0 || chosen >= n) return {field, std::nullopt};
    const double increment = tail_norm(field, chosen);
    ProjectionResult truncated =
        project(field, BasisParams(field.basis.beta, field.basis.x0, chosen));
    return finish(std::move(truncated.field), EventKind::Coarsen, increment);
  }

  return {field, std::nullopt};
}

struct ControllerStepResult {
  SpectralField field;
  std::vector<AdaptationEvent> events;
};

/// One pass of the adaptation pipeline in flow order: move, scale, order.
inline ControllerStepResult controller_step(const SpectralField& field, double t,
                                            const AdaptiveConfig& cfg, ThresholdState& st) {
  ControllerStepResult out{field, {}};
  MoveOutcome moved = maybe_move(out.field, cfg, st, t);
  out.field = std::move(moved.field);
  if (moved.event) out.events.push_back(std::move(*moved.event));

  ScaleOutcome scaled = maybe_scale(out.field, cfg, st, t);
  out.field = std::move(scaled.field);
  if (scaled.event) out.events.push_back(std::move(*scaled.event));

  OrderOutcome ordered = maybe_adapt_order(out.field, cfg, st, scaled.refine_needed, t);
  out.field = std::move(ordered.field);
  if (ordered.event) out.events.push_back(std::move(*ordered.event));
  return out;
}

}  // namespace hsm
