#pragma once

#include <span>

#include "msgn/model.hpp"
#include "msgn/stencil.hpp"

namespace msgn {

/// Energy density as an algebraic function of local values and slopes.
inline double local_energy_density(double h, double u, double hx, double ux, const ModelParams& p) {
  const double dh = h - p.hbar;
  return 0.5 * h * u * u + p.alpha / 6.0 * h * h * h * ux * ux + 0.5 * p.g * dh * dh +
         0.25 * p.beta * p.g * h * h * hx * hx;
}

namespace detail {

struct EnergyParts {
  Field kinetic, dispersive_u, potential, dispersive_h;
};

// Gradient terms live on faces (face-averaged h, one-sided difference) and are
// split evenly between the two adjacent cells. The resulting total is the
// quadratic form u.L_h u / 2 + potential, which the energy-conserving
// tendency preserves exactly in semi-discrete form.
inline EnergyParts energy_parts(const FluidState& s, const ModelParams& p, const Grid& grid) {
  require_shape(s, grid);
  require_positive_depth(s.h, "energy_density");
  const std::size_t n = grid.size();
  const Field a = stencil::face_average(s.h);
  const Field du = stencil::face_diff(s.u, grid.dx);
  const Field dh = stencil::face_diff(s.h, grid.dx);
  Field fu(n), fh(n);
  for (std::size_t f = 0; f < n; ++f) {
    fu[f] = p.alpha / 6.0 * a[f] * a[f] * a[f] * du[f] * du[f];
    fh[f] = 0.25 * p.beta * p.g * a[f] * a[f] * dh[f] * dh[f];
  }
  EnergyParts e;
  e.kinetic.resize(n);
  e.dispersive_u.resize(n);
  e.potential.resize(n);
  e.dispersive_h.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t im = stencil::prev(i, n);
    const double d = s.h[i] - p.hbar;
    e.kinetic[i] = 0.5 * s.h[i] * s.u[i] * s.u[i];
    e.potential[i] = 0.5 * p.g * d * d;
    e.dispersive_u[i] = 0.5 * (fu[i] + fu[im]);
    e.dispersive_h[i] = 0.5 * (fh[i] + fh[im]);
  }
  return e;
}

}  // namespace detail

/// Cell-wise energy density; sums (times dx) to the conserved discrete energy.
inline Field energy_density(const FluidState& s, const ModelParams& p, const Grid& grid) {
  const detail::EnergyParts e = detail::energy_parts(s, p, grid);
  Field out(e.kinetic.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = e.kinetic[i] + e.dispersive_u[i] + e.potential[i] + e.dispersive_h[i];
  }
  return out;
}

inline EnergyBudget energy_budget(const FluidState& s, const ModelParams& p, const Grid& grid) {
  const detail::EnergyParts e = detail::energy_parts(s, p, grid);
  EnergyBudget b;
  b.kinetic = integrate(e.kinetic, grid.dx);
  b.dispersive_u = integrate(e.dispersive_u, grid.dx);
  b.potential = integrate(e.potential, grid.dx);
  b.dispersive_h = integrate(e.dispersive_h, grid.dx);
  b.total = b.kinetic + b.dispersive_u + b.potential + b.dispersive_h;
  return b;
}

inline double total_energy(const FluidState& s, const ModelParams& p, const Grid& grid) {
  return energy_budget(s, p, grid).total;
}

inline double total_mass(const FluidState& s, const Grid& grid) { return integrate(s.h, grid.dx); }

}  // namespace msgn
