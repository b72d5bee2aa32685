#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "msgn/diagnostics.hpp"
#include "msgn/dynamics.hpp"
#include "msgn/energy.hpp"
#include "msgn/model.hpp"

namespace msgn {

struct SimConfig {
  ModelParams params;
  Grid grid;
  double t_end = 1.0;
  double courant = 0.3;
  double dt_min = 1e-9;
  int snapshot_every = 1;
  std::optional<Thresholds> thresholds;  ///< defaults derived from the initial state when empty
  /// dt <= gradient_courant / (-min u_x); zero disables the bound.
  double gradient_courant = 0.05;
  int max_retries = 10;
  Formulation form = Formulation::energy_conserving;
};

struct Trajectory {
  std::vector<FluidState> snapshots;
  std::vector<SeriesRow> series;  ///< one row per state, dt = step proposed from it
  Termination termination = Termination::reached_t_end;
  Classification classification;
  Thresholds thresholds;
  std::vector<std::string> warnings;
  std::size_t steps = 0;
};

inline void validate(const SimConfig& c) {
  if (!(c.t_end > 0.0)) throw ParameterDomainError("simulate: t_end must be positive");
  if (!(c.courant > 0.0) || c.courant > 1.0) throw ParameterDomainError("simulate: courant must lie in (0, 1]");
  if (!(c.dt_min > 0.0)) throw ParameterDomainError("simulate: dt_min must be positive");
  if (c.snapshot_every < 1) throw ParameterDomainError("simulate: snapshot_every must be at least 1");
  if (!(c.gradient_courant >= 0.0)) throw ParameterDomainError("simulate: gradient_courant must be non-negative");
  if (c.max_retries < 0) throw ParameterDomainError("simulate: max_retries must be non-negative");
}

namespace detail {

// Largest |h - hbar| within 2% of the box on either side of x = 0.
inline double edge_disturbance(const FluidState& s, const ModelParams& p) {
  const std::size_t n = s.h.size();
  const std::size_t band = std::max<std::size_t>(1, n / 50);
  double m = 0.0;
  for (std::size_t i = 0; i < band; ++i) {
    m = std::max(m, std::abs(s.h[i] - p.hbar));
    m = std::max(m, std::abs(s.h[n - 1 - i] - p.hbar));
  }
  return m;
}

}  // namespace detail

/// Advances with RK4 until t_end or a termination condition, recording every state.
inline Trajectory simulate(const SimConfig& cfg, const FluidState& initial) {
  validate(cfg);
  validate(initial, cfg.grid, "simulate");
  const ModelParams& p = cfg.params;
  const Grid& grid = cfg.grid;

  Trajectory traj;
  traj.thresholds = cfg.thresholds ? *cfg.thresholds : default_thresholds(initial, p, grid);
  const Thresholds& th = traj.thresholds;
  const double edge0 = detail::edge_disturbance(initial, p);

  FluidState state = initial;
  traj.snapshots.push_back(state);
  bool last_stored = true;
  const double t_tol = 1e-12 * std::max(1.0, cfg.t_end);
  Termination stop = Termination::reached_t_end;

  while (true) {
    SeriesRow row;
    row.t = state.t;
    try {
      row.ind = blowup_indicators(state, p, grid);
    } catch (const InstabilityError&) {
      stop = Termination::instability;
      break;
    } catch (const InternalError&) {
      stop = Termination::instability;
      break;
    }
    row.total_energy = total_energy(state, p, grid);
    row.mass = total_mass(state, grid);
    double dt = cfl_dt(state, p, grid, cfg.courant);
    if (cfg.gradient_courant > 0.0) dt = std::min(dt, gradient_dt(state, grid, cfg.gradient_courant));
    row.dt = dt;
    traj.series.push_back(row);

    if (row.ind.min_h < th.h_floor) {
      stop = Termination::depth_vanishing;
      break;
    }
    if (state.t >= cfg.t_end - t_tol) {
      stop = Termination::reached_t_end;
      break;
    }
    if (dt < cfg.dt_min) {
      stop = Termination::dt_underflow;
      break;
    }

    double step = std::min(dt, cfg.t_end - state.t);
    std::optional<FluidState> next;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
      try {
        next = rk4_step(state, step, p, grid, cfg.form);
        break;
      } catch (const StageFailure&) {
        step *= 0.5;
        if (step < cfg.dt_min) break;
      }
    }
    if (!next) {
      stop = step < cfg.dt_min ? Termination::dt_underflow : Termination::instability;
      break;
    }
    if (state.t + step >= cfg.t_end - t_tol) next->t = cfg.t_end;
    state = std::move(*next);
    ++traj.steps;
    last_stored = traj.steps % static_cast<std::size_t>(cfg.snapshot_every) == 0;
    if (last_stored) traj.snapshots.push_back(state);
  }
  if (!last_stored) traj.snapshots.push_back(state);

  traj.termination = stop;
  traj.classification = classify_termination(traj.series, stop, th);
  const double edge1 = detail::edge_disturbance(state, p);
  if (edge0 <= 1e-10 * p.hbar && edge1 > 1e-10 * p.hbar) {
    traj.warnings.push_back("disturbance reached the periodic boundary (|h - hbar| = " + std::to_string(edge1) +
                            " near x = 0)");
  }
  return traj;
}

}  // namespace msgn
