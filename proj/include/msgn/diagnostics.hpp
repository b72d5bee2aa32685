#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "msgn/dynamics.hpp"
#include "msgn/energy.hpp"
#include "msgn/model.hpp"
#include "msgn/riemann.hpp"

namespace msgn {

/// Energy flux u [E + R + g h (h - hbar)] + beta/2 g h^3 h_x u_x with centered slopes.
inline Field energy_flux(const FluidState& state, const ModelParams& params, const Grid& grid) {
  const Field r = script_r(state, params, grid);
  const Field ux = stencil::centered_diff(state.u, grid.dx);
  const Field hx = stencil::centered_diff(state.h, grid.dx);
  Field q(grid.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double h = state.h[i], u = state.u[i];
    const double e = local_energy_density(h, u, hx[i], ux[i], params);
    q[i] = u * (e + r[i] + params.g * h * (h - params.hbar)) + 0.5 * params.beta * params.g * h * h * h * hx[i] * ux[i];
  }
  return q;
}

/// (E(t+dt) - E(t-dt)) / (2 dt) + D0 Q(t) from three equally spaced snapshots.
inline Field conservation_residual(const std::array<FluidState, 3>& snaps, const ModelParams& params,
                                   const Grid& grid) {
  const double d1 = snaps[1].t - snaps[0].t;
  const double d2 = snaps[2].t - snaps[1].t;
  if (!(d1 > 0.0) || std::abs(d1 - d2) > 1e-9 * std::max(d1, d2)) {
    throw ParameterDomainError("conservation_residual: snapshots must be equally spaced in time");
  }
  const Field e0 = energy_density(snaps[0], params, grid);
  const Field e2 = energy_density(snaps[2], params, grid);
  const Field dq = stencil::centered_diff(energy_flux(snaps[1], params, grid), grid.dx);
  Field r(grid.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = (e2[i] - e0[i]) / (2.0 * d1) + dq[i];
  return r;
}

/// Pointwise defects of the two energy/flux identities along lambda and mu, with the size of their terms.
struct EdResidual {
  Field first;         ///< lambda E - Q - k Q^2 - B1
  Field second;        ///< -mu E + Q - k P^2 - B2
  Field first_scale;   ///< sum of magnitudes of the terms in first
  Field second_scale;  ///< same for second

  double max_relative() const {
    double m = 0.0;
    for (std::size_t i = 0; i < first.size(); ++i) {
      m = std::max(m, std::abs(first[i]) / std::max(first_scale[i], std::numeric_limits<double>::min()));
      m = std::max(m, std::abs(second[i]) / std::max(second_scale[i], std::numeric_limits<double>::min()));
    }
    return m;
  }
};

inline EdResidual ed_identity_residual(const FluidState& state, const ModelParams& params, const Grid& grid) {
  const Field r = script_r(state, params, grid);
  const Field ux = stencil::centered_diff(state.u, grid.dx);
  const Field hx = stencil::centered_diff(state.h, grid.dx);
  const double k = params.reduced_gravity();
  const std::size_t n = grid.size();
  EdResidual out;
  out.first.resize(n);
  out.second.resize(n);
  out.first_scale.resize(n);
  out.second_scale.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = state.h[i], u = state.u[i];
    const double c = std::sqrt(k * h);
    const double e = local_energy_density(h, u, hx[i], ux[i], params);
    const double pressure = r[i] + params.g * h * (h - params.hbar);
    const double flux = u * (e + pressure) + 0.5 * params.beta * params.g * h * h * h * hx[i] * ux[i];
    const double p_loc = ux[i] + std::sqrt(k / h) * hx[i];
    const double q_loc = ux[i] - std::sqrt(k / h) * hx[i];
    const double coef = std::sqrt(6.0 * params.alpha * params.beta * params.g * std::pow(h, 7)) / 12.0;
    const double dh = h - params.hbar;
    const double base = c * (0.5 * h * u * u + 0.5 * params.g * dh * dh);
    const double b1 = base - u * pressure;
    const double b2 = base + u * pressure;
    const double lam = u + c, mu = u - c;
    out.first[i] = lam * e - flux - coef * q_loc * q_loc - b1;
    out.second[i] = -mu * e + flux - coef * p_loc * p_loc - b2;
    out.first_scale[i] = std::abs(lam * e) + std::abs(flux) + coef * q_loc * q_loc + std::abs(b1);
    out.second_scale[i] = std::abs(mu * e) + std::abs(flux) + coef * p_loc * p_loc + std::abs(b2);
  }
  return out;
}

/// Uniform bounds on depth and velocity implied by an energy level below the threshold.
struct Bounds {
  double h_min = 0.0, h_max = 0.0;
  double u_min = 0.0, u_max = 0.0;
};

inline Bounds prop_bounds(double energy, const ModelParams& params) {
  if (!(energy >= 0.0)) throw ParameterDomainError("prop_bounds: energy must be non-negative");
  if (!(energy < params.energy_threshold)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "prop_bounds: energy " << energy << " is not below the threshold " << params.energy_threshold
        << " = g sqrt(beta) / (3 sqrt 2) hbar^3";
    throw OutOfRangeError(msg.str());
  }
  const double radical =
      std::sqrt(3.0 * std::sqrt(2.0) * energy / (params.g * std::sqrt(params.beta) * params.hbar));
  Bounds b;
  b.h_min = params.hbar - radical;
  b.h_max = params.hbar + radical;
  b.u_max = std::pow(3.0 / params.alpha, 0.25) * std::sqrt(energy) / b.h_min;
  b.u_min = -b.u_max;
  return b;
}

struct Indicators {
  double min_h = 0.0;
  double min_ux = 0.0, max_ux = 0.0;
  double max_abs_hx = 0.0, max_hx = 0.0, min_hx = 0.0;
  double norm_R_inf = 0.0;
};

inline Indicators blowup_indicators(const FluidState& state, const ModelParams& params, const Grid& grid) {
  const Field ux = stencil::centered_diff(state.u, grid.dx);
  const Field hx = stencil::centered_diff(state.h, grid.dx);
  Indicators ind;
  ind.min_h = min_of(state.h);
  ind.min_ux = min_of(ux);
  ind.max_ux = max_of(ux);
  ind.max_hx = max_of(hx);
  ind.min_hx = min_of(hx);
  ind.max_abs_hx = std::max(ind.max_hx, -ind.min_hx);
  ind.norm_R_inf = max_abs_of(script_r(state, params, grid));
  return ind;
}

/// Detector settings.
struct Thresholds {
  double h_floor = 0.0;
  double u_big = 0.0;
  double h_big = 0.0;
  double decade_growth = 10.0;  ///< growth required over the final decade of dt
};

inline Thresholds default_thresholds(const FluidState& initial, const ModelParams& params, const Grid& grid) {
  Thresholds t;
  t.h_floor = 0.05 * params.hbar;
  t.u_big = 100.0 * max_abs_of(stencil::centered_diff(initial.u, grid.dx)) + 10.0 * params.c0 / params.hbar;
  t.h_big = 100.0 * max_abs_of(stencil::centered_diff(initial.h, grid.dx)) + 10.0;
  return t;
}

enum class Termination { reached_t_end, blowup_suspected, depth_vanishing, dt_underflow, instability };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::reached_t_end: return "reached_t_end";
    case Termination::blowup_suspected: return "blowup_suspected";
    case Termination::depth_vanishing: return "depth_vanishing";
    case Termination::dt_underflow: return "dt_underflow";
    case Termination::instability: return "instability";
  }
  return "unknown";
}

/// Which extremum of h_x runs away while the other stays bounded.
enum class HxSide { none, max_hx_diverging, min_hx_diverging };

inline const char* to_string(HxSide s) {
  switch (s) {
    case HxSide::none: return "none";
    case HxSide::max_hx_diverging: return "max_hx_diverging";
    case HxSide::min_hx_diverging: return "min_hx_diverging";
  }
  return "unknown";
}

/// One row per state: time, the step proposed from that state, and its scalar diagnostics.
struct SeriesRow {
  double t = 0.0;
  double dt = 0.0;
  double total_energy = 0.0;
  double mass = 0.0;
  Indicators ind;
};

struct Classification {
  Termination label = Termination::reached_t_end;
  HxSide side = HxSide::none;
  std::size_t decade_start = 0;  ///< first row of the final decade of dt
  double ux_growth = std::numeric_limits<double>::quiet_NaN();
  double max_hx_growth = std::numeric_limits<double>::quiet_NaN();
  double min_hx_growth = std::numeric_limits<double>::quiet_NaN();

  /// Growth of the diverging h_x extremum (the larger one when no side is flagged).
  double hx_growth() const {
    if (side == HxSide::max_hx_diverging) return max_hx_growth;
    if (side == HxSide::min_hx_diverging) return min_hx_growth;
    return std::fmax(max_hx_growth, min_hx_growth);
  }
};

namespace detail {

inline double growth(double start, double end) {
  if (!(start > 0.0) || !(end > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return end / start;
}

}  // namespace detail

/**
 * Labels a finished run from its series and the reason the stepper stopped.
 *
 * The final decade runs from the last row whose step is at least ten times the
 * final one to the end. Growth factors are ratios of end to start magnitudes of
 * min u_x, max h_x and -min h_x over that window.
 */
inline Classification classify_termination(const std::vector<SeriesRow>& series, Termination stopped,
                                           const Thresholds& th) {
  if (series.empty()) throw ParameterDomainError("classify_termination: empty series");
  Classification c;
  const SeriesRow& last = series.back();

  const double dt_end = last.dt;
  std::optional<std::size_t> start;
  if (dt_end > 0.0) {
    for (std::size_t i = series.size() - 1; i-- > 0;) {
      if (series[i].dt >= 10.0 * dt_end) {
        start = i;
        break;
      }
    }
  }
  if (start) {
    const Indicators& a = series[*start].ind;
    c.decade_start = *start;
    c.ux_growth = detail::growth(-a.min_ux, -last.ind.min_ux);
    c.max_hx_growth = detail::growth(a.max_hx, last.ind.max_hx);
    c.min_hx_growth = detail::growth(-a.min_hx, -last.ind.min_hx);
  }

  const bool max_runs = last.ind.max_hx > th.h_big && c.max_hx_growth >= th.decade_growth;
  const bool min_runs = -last.ind.min_hx > th.h_big && c.min_hx_growth >= th.decade_growth;
  if (max_runs && last.ind.min_hx >= -th.h_big) c.side = HxSide::max_hx_diverging;
  if (min_runs && last.ind.max_hx <= th.h_big) c.side = HxSide::min_hx_diverging;

  bool vanished = false;
  for (const SeriesRow& r : series) vanished = vanished || r.ind.min_h < th.h_floor;
  if (vanished || stopped == Termination::depth_vanishing) {
    c.label = Termination::depth_vanishing;
    return c;
  }
  if (stopped == Termination::dt_underflow) {
    const bool signature = last.ind.min_ux < -th.u_big && last.ind.max_abs_hx > th.h_big && last.ind.min_h > th.h_floor;
    const bool diverging = c.ux_growth >= th.decade_growth && c.hx_growth() >= th.decade_growth;
    c.label = signature && diverging ? Termination::blowup_suspected : Termination::dt_underflow;
    return c;
  }
  c.label = stopped;
  return c;
}

}  // namespace msgn
