#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "msgn/elliptic.hpp"
#include "msgn/model.hpp"
#include "msgn/riemann.hpp"
#include "msgn/stencil.hpp"

namespace msgn {

struct Tendency {
  Field dh_dt;
  Field du_dt;
};

/// Spatial discretisations of the velocity equation.
enum class Formulation {
  /// Skew-symmetric momentum form built from the discrete energy; conserves
  /// the discrete energy exactly in semi-discrete form. Used for time stepping.
  energy_conserving,
  /// Depth-averaged velocity equation with the zero-order non-local term,
  /// every derivative a centered difference.
  reformulated,
};

namespace detail {

inline void require_finite(std::span<const double> v, const char* where) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InstabilityError(std::string(where) + ": non-finite value");
  }
}

// Flux inside the non-local term: 2/3 alpha h^3 u_x^2 - 1/4 beta g h^2 h_x^2 + g/(2 alpha) h^2 - offset.
inline Field nonlocal_flux(std::span<const double> h, std::span<const double> ux, std::span<const double> hx,
                           const ModelParams& p, double h2_offset) {
  Field f(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double h2 = h[i] * h[i];
    f[i] = 2.0 / 3.0 * p.alpha * h2 * h[i] * ux[i] * ux[i] - 0.25 * p.beta * p.g * h2 * hx[i] * hx[i] +
           p.g / (2.0 * p.alpha) * (h2 - h2_offset);
  }
  return f;
}

inline Tendency rhs_reformulated(const FluidState& s, const ModelParams& p, const Grid& grid) {
  const std::size_t n = grid.size();
  const double dx = grid.dx;
  const Field ux = stencil::centered_diff(s.u, dx);
  const Field hx = stencil::centered_diff(s.h, dx);
  Field hu(n);
  for (std::size_t i = 0; i < n; ++i) hu[i] = s.h[i] * s.u[i];
  const SLOperator op = assemble(s.h, p, grid);
  const Field nonlocal = solve_dx(op, nonlocal_flux(s.h, ux, hx, p, 0.0));
  Tendency t;
  t.dh_dt = stencil::centered_diff(hu, dx);
  t.du_dt.resize(n);
  const double k = p.reduced_gravity();
  for (std::size_t i = 0; i < n; ++i) {
    t.dh_dt[i] = -t.dh_dt[i];
    t.du_dt[i] = -s.u[i] * ux[i] - k * hx[i] - nonlocal[i];
  }
  return t;
}

// Momentum m = L_h u evolves as
//   m_t = -D0(u m) - m D0 u - h D0 phi,   h_t = -D0(h u),
// with phi the depth-gradient of the discrete energy at fixed m. D0 is
// skew-adjoint, so the discrete energy is a first integral. The velocity
// tendency follows from m_t = L_h u_t + (dL_h/dh)[h_t] u.
inline Tendency rhs_energy_conserving(const FluidState& s, const ModelParams& p, const Grid& grid) {
  const std::size_t n = grid.size();
  const double dx = grid.dx;
  const auto& h = s.h;
  const auto& u = s.u;

  Field hu(n);
  for (std::size_t i = 0; i < n; ++i) hu[i] = h[i] * u[i];
  Field ht = stencil::centered_diff(hu, dx);
  for (double& v : ht) v = -v;

  const SLOperator op = assemble(h, p, grid);
  const Field m = msgn::apply(op, u);
  const Field a = stencil::face_average(h);
  const Field du = stencil::face_diff(u, dx);
  const Field dh = stencil::face_diff(h, dx);

  Field t_face(n), v_face(n), h_flux(n), dl_flux(n);
  for (std::size_t f = 0; f < n; ++f) {
    const double a2 = a[f] * a[f];
    t_face[f] = 0.25 * p.alpha * a2 * du[f] * du[f];
    v_face[f] = 0.25 * p.beta * p.g * a[f] * dh[f] * dh[f];
    h_flux[f] = a2 * dh[f];
    const double dface = 1.5 * a2 * (ht[f] + ht[stencil::next(f, n)]);
    dl_flux[f] = dface * du[f];
  }
  const Field div_h_flux = stencil::face_divergence(h_flux, dx);
  const Field div_dl_flux = stencil::face_divergence(dl_flux, dx);

  Field phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t im = stencil::prev(i, n);
    const double dT = 0.5 * u[i] * u[i] + t_face[i] + t_face[im];
    const double dV = p.g * (h[i] - p.hbar) + v_face[i] + v_face[im] - 0.5 * p.beta * p.g * div_h_flux[i];
    phi[i] = dV - dT;
  }

  Field um(n);
  for (std::size_t i = 0; i < n; ++i) um[i] = u[i] * m[i];
  const Field d_um = stencil::centered_diff(um, dx);
  const Field d_u = stencil::centered_diff(u, dx);
  const Field d_phi = stencil::centered_diff(phi, dx);

  Field forcing(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mt = -d_um[i] - m[i] * d_u[i] - h[i] * d_phi[i];
    const double dl_u = ht[i] * u[i] - p.alpha / 3.0 * div_dl_flux[i];
    forcing[i] = mt - dl_u;
  }
  Tendency t;
  t.dh_dt = std::move(ht);
  t.du_dt = solve(op, forcing);
  return t;
}

}  // namespace detail

inline Tendency rhs(const FluidState& state, const ModelParams& params, const Grid& grid,
                    Formulation form = Formulation::energy_conserving) {
  require_shape(state, grid);
  require_positive_depth(state.h, "rhs");
  detail::require_finite(state.u, "rhs");
  Tendency t = form == Formulation::energy_conserving ? detail::rhs_energy_conserving(state, params, grid)
                                                      : detail::rhs_reformulated(state, params, grid);
  detail::require_finite(t.dh_dt, "rhs");
  detail::require_finite(t.du_dt, "rhs");
  return t;
}

/// Dispersive stress without time derivatives or second space derivatives.
inline Field script_r(const FluidState& state, const ModelParams& params, const Grid& grid) {
  require_shape(state, grid);
  require_positive_depth(state.h, "script_r");
  detail::require_finite(state.u, "script_r");
  const std::size_t n = grid.size();
  const double dx = grid.dx;
  const auto& h = state.h;
  const Field ux = stencil::centered_diff(state.u, dx);
  const Field hx = stencil::centered_diff(h, dx);
  const double offset = params.hbar * params.hbar;
  const Field flux = detail::nonlocal_flux(h, ux, hx, params, offset);
  const SLOperator op = assemble(h, params, grid);
  const Field d_inner = stencil::centered_diff(solve_dx(op, flux), dx);
  Field r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double h3 = h[i] * h[i] * h[i];
    r[i] = flux[i] + params.alpha / 3.0 * h3 * d_inner[i] - params.g * (h[i] * h[i] - offset) / (2.0 * params.alpha);
  }
  return r;
}

/// Largest step allowed by the characteristic speeds u +- sqrt(((alpha-1)/alpha) g h).
inline double cfl_dt(const FluidState& state, const ModelParams& params, const Grid& grid, double courant) {
  require_shape(state, grid);
  require_positive_depth(state.h, "cfl_dt");
  double smax = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    smax = std::max(smax, std::abs(state.u[i]) + wave_speed(state.h[i], params));
  }
  return courant * grid.dx / smax;
}

/// Step bound from the compression time scale 1 / max(0, -min u_x); infinite when nothing compresses.
inline double gradient_dt(const FluidState& state, const Grid& grid, double gradient_courant) {
  require_shape(state, grid);
  const double rate = -min_of(stencil::centered_diff(state.u, grid.dx));
  if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
  return gradient_courant / rate;
}

/// Classical four-stage Runge-Kutta step of (h, u).
inline FluidState rk4_step(const FluidState& state, double dt, const ModelParams& params, const Grid& grid,
                           Formulation form = Formulation::energy_conserving) {
  if (!(dt > 0.0)) throw ParameterDomainError("rk4_step: dt must be positive");
  const std::size_t n = grid.size();
  auto stage = [&](const FluidState& s) {
    try {
      return rhs(s, params, grid, form);
    } catch (const DegenerateDepthError& e) {
      throw StageFailure(e.what());
    } catch (const InstabilityError& e) {
      throw StageFailure(e.what());
    } catch (const InternalError& e) {
      throw StageFailure(e.what());
    }
  };
  auto shifted = [&](const Tendency& k, double c) {
    FluidState s;
    s.t = state.t + c;
    s.h.resize(n);
    s.u.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      s.h[i] = state.h[i] + c * k.dh_dt[i];
      s.u[i] = state.u[i] + c * k.du_dt[i];
    }
    return s;
  };
  const Tendency k1 = stage(state);
  const Tendency k2 = stage(shifted(k1, 0.5 * dt));
  const Tendency k3 = stage(shifted(k2, 0.5 * dt));
  const Tendency k4 = stage(shifted(k3, dt));
  FluidState out;
  out.t = state.t + dt;
  out.h.resize(n);
  out.u.resize(n);
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.h[i] = state.h[i] + w * (k1.dh_dt[i] + 2.0 * k2.dh_dt[i] + 2.0 * k3.dh_dt[i] + k4.dh_dt[i]);
    out.u[i] = state.u[i] + w * (k1.du_dt[i] + 2.0 * k2.du_dt[i] + 2.0 * k3.du_dt[i] + k4.du_dt[i]);
    if (!std::isfinite(out.h[i]) || !std::isfinite(out.u[i])) throw StageFailure("rk4_step: non-finite result");
    if (!(out.h[i] > 0.0)) throw StageFailure("rk4_step: depth reached zero");
  }
  return out;
}

}  // namespace msgn
