#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <sstream>

#include "msgn/energy.hpp"
#include "msgn/model.hpp"
#include "msgn/riemann.hpp"

namespace msgn {

inline FluidState flat_state(const Grid& grid, const ModelParams& params, double velocity = 0.0) {
  FluidState s;
  s.h.assign(grid.size(), params.hbar);
  s.u.assign(grid.size(), velocity);
  return s;
}

/// hbar + amplitude exp(-((x - center)/width)^2) at rest, distances measured on the periodic box.
inline FluidState gaussian_state(const Grid& grid, const ModelParams& params, double amplitude, double width,
                                 double center) {
  if (!(width > 0.0)) throw ParameterDomainError("gaussian_state: width must be positive");
  if (!(amplitude > -params.hbar)) throw DegenerateDepthError("gaussian_state: amplitude would empty the basin");
  FluidState s = flat_state(grid, params);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double d = std::remainder(grid.x(i) - center, grid.length);
    const double bump = std::exp(-(d / width) * (d / width));
    if (bump < 1e-15) continue;
    s.h[i] = params.hbar + amplitude * bump;
  }
  require_positive_depth(s.h, "gaussian_state");
  return s;
}

/// Velocity that makes the left-going invariant S spatially constant, so Q = 0.
inline FluidState zero_q_state(const Grid& grid, const ModelParams& params, std::span<const double> h_profile) {
  if (h_profile.size() != grid.size()) throw ShapeError("zero_q_state: profile size mismatch");
  require_positive_depth(h_profile, "zero_q_state");
  FluidState s;
  s.h.assign(h_profile.begin(), h_profile.end());
  s.u.resize(grid.size());
  const double c = 2.0 * std::sqrt(params.reduced_gravity());
  const double root_hbar = std::sqrt(params.hbar);
  for (std::size_t i = 0; i < grid.size(); ++i) s.u[i] = c * (std::sqrt(s.h[i]) - root_hbar);
  return s;
}

/// C-infinity transition from 0 (xi <= 0) to 1 (xi >= 1); steepest slope 2 at xi = 1/2.
inline double smooth_step(double xi) {
  if (xi <= 0.0) return 0.0;
  if (xi >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / xi);
  const double b = std::exp(-1.0 / (1.0 - xi));
  return a / (a + b);
}

enum class SlopeSide {
  down,  ///< steep ramp descends in +x, Q = 0 everywhere, P strongly negative on the ramp
  up,    ///< mirror image x -> L - x, u -> -u: P = 0 everywhere, Q strongly negative
};

struct BlowupSetup {
  FluidState state;
  double min_p0 = 0.0;  ///< most negative initial invariant gradient on the steep side
  double amplitude = 0.0;
  double ramp_width = 0.0;
  double energy = 0.0;
};

namespace detail {

// int_0^y smooth_step, composite Simpson.
inline double smooth_step_integral(double y) {
  if (y <= 0.0) return 0.0;
  const double b = std::min(y, 1.0);
  constexpr int m = 128;
  const double hstep = b / m;
  double acc = smooth_step(0.0) + smooth_step(b);
  for (int j = 1; j < m; ++j) acc += (j % 2 ? 4.0 : 2.0) * smooth_step(j * hstep);
  return acc * hstep / 3.0 + std::max(0.0, y - 1.0);
}

constexpr double ramp_corner = 0.1;

// Integral of the slope shape smooth_step(xi/c) smooth_step((1-xi)/c) over [0, 1].
inline double ramp_mass() {
  const double c = ramp_corner;
  return 2.0 * c * smooth_step_integral(1.0) + (1.0 - 2.0 * c);
}

// Monotone C-infinity ramp from 0 to 1 on [0, 1], linear between the corners.
inline double ramp(double xi) {
  if (xi <= 0.0) return 0.0;
  if (xi >= 1.0) return 1.0;
  const double c = ramp_corner;
  const double total = ramp_mass();
  auto g = [&](double z) {
    if (z <= c) return c * smooth_step_integral(z / c);
    return c * smooth_step_integral(1.0) + (z - c);
  };
  return xi <= 0.5 ? g(xi) / total : 1.0 - g(1.0 - xi) / total;
}

struct PlateauLayout {
  double rise_start, rise_width, ramp_start;
  double max_ramp_width;
  double min_ramp_width;
};

inline PlateauLayout plateau_layout(const Grid& grid) {
  const double L = grid.length;
  return {0.03 * L, 0.25 * L, 0.30 * L, 0.64 * L, 32.0 * grid.dx};
}

// Plateau of height hbar + steepness hbar width ramp_mass(), steep side of slope -steepness hbar.
inline FluidState plateau_down(const Grid& grid, const ModelParams& params, double steepness, double ramp_width) {
  const PlateauLayout lay = plateau_layout(grid);
  const double amplitude = steepness * params.hbar * ramp_width * ramp_mass();
  Field h(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    h[i] = params.hbar + amplitude * (ramp((x - lay.rise_start) / lay.rise_width) -
                                      ramp((x - lay.ramp_start) / ramp_width));
  }
  return zero_q_state(grid, params, h);
}

inline FluidState mirrored(const FluidState& s) {
  const std::size_t n = s.h.size();
  FluidState m;
  m.t = s.t;
  m.h.resize(n);
  m.u.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i == 0 ? 0 : n - i;
    m.h[i] = s.h[j];
    m.u[i] = -s.u[j];
  }
  return m;
}

// Largest t in [lo, hi] with energy(build(t)) <= cap, energy increasing in t.
template <class Build>
double largest_within(Build build, double lo, double hi, double energy_cap, const ModelParams& params,
                      const Grid& grid) {
  if (total_energy(build(hi), params, grid) <= energy_cap) return hi;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (total_energy(build(mid), params, grid) <= energy_cap) lo = mid;
    else hi = mid;
  }
  return lo;
}

}  // namespace detail

/**
 * Smooth plateau with one long ramp of constant slope, velocity chosen so one
 * family of invariant gradients vanishes identically.
 *
 * The ramp slope is -steepness * hbar. Its width is the largest value (at most
 * 0.64 L, and with plateau height at most hbar/2) for which the discrete
 * energy stays below energy_cap. The ramp must span at least 32 cells.
 */
inline BlowupSetup blowup_state(const Grid& grid, const ModelParams& params, double steepness, double energy_cap,
                                SlopeSide side = SlopeSide::down) {
  if (!(steepness > 0.0)) throw ParameterDomainError("blowup_state: steepness must be positive");
  if (!(energy_cap > 0.0) || !(energy_cap < params.energy_threshold)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "blowup_state: energy_cap " << energy_cap << " must lie in ]0, g sqrt(beta) / (3 sqrt 2) hbar^3[ = ]0, "
        << params.energy_threshold << "[";
    throw OutOfRangeError(msg.str());
  }
  const detail::PlateauLayout lay = detail::plateau_layout(grid);
  const double hbar = params.hbar;
  const double mass = detail::ramp_mass();

  auto finish = [&](FluidState st, double s, double width) {
    BlowupSetup out;
    out.amplitude = s * hbar * width * mass;
    out.ramp_width = width;
    out.energy = total_energy(st, params, grid);
    out.state = side == SlopeSide::down ? std::move(st) : detail::mirrored(st);
    const RiemannFields f = riemann_fields(out.state, params, grid);
    out.min_p0 = side == SlopeSide::down ? min_of(f.P) : min_of(f.Q);
    return out;
  };

  const double width_limit = std::min(lay.max_ramp_width, 0.5 / (steepness * mass));
  auto at_steepness = [&](double w) { return detail::plateau_down(grid, params, steepness, w); };
  const double width =
      width_limit < lay.min_ramp_width
          ? width_limit
          : detail::largest_within(at_steepness, lay.min_ramp_width, width_limit, energy_cap, params, grid);
  if (width < lay.min_ramp_width || total_energy(at_steepness(width), params, grid) > energy_cap) {
    // Best achievable: ramp at the resolution limit, steepness capped by energy and height.
    const double w = lay.min_ramp_width;
    auto at_width = [&](double s) { return detail::plateau_down(grid, params, s, w); };
    const double s_best = detail::largest_within(at_width, 0.0, 0.5 / (w * mass), energy_cap, params, grid);
    const BlowupSetup best = finish(at_width(s_best), s_best, w);
    std::ostringstream msg;
    msg << "blowup_state: steepness " << steepness << " does not fit a ramp of at least " << w
        << " within the energy cap; achievable minimum P0 is " << best.min_p0;
    throw InfeasibleError(msg.str(), best.min_p0);
  }
  return finish(at_steepness(width), steepness, width);
}

namespace detail {

// Uniform double in [0, 1) from the top 53 bits.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

/**
 * Reproducible smooth data: a few periodic Gaussian bumps in h and u, scaled so
 * the discrete energy equals a seed-dependent value in [cap/2, cap].
 */
inline FluidState random_state(const Grid& grid, const ModelParams& params, std::uint64_t seed, double energy_cap,
                               int bumps = 3) {
  if (!(energy_cap > 0.0)) throw ParameterDomainError("random_state: energy_cap must be positive");
  if (bumps < 1) throw ParameterDomainError("random_state: need at least one bump");
  std::mt19937_64 rng(seed);
  const double L = grid.length;
  Field dh(grid.size(), 0.0), du(grid.size(), 0.0);
  auto add_bumps = [&](Field& f) {
    for (int b = 0; b < bumps; ++b) {
      const double center = L * detail::unit_uniform(rng);
      const double width = L * (0.05 + 0.1 * detail::unit_uniform(rng));
      const double amp = 2.0 * detail::unit_uniform(rng) - 1.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = std::remainder(grid.x(i) - center, L) / width;
        f[i] += amp * std::exp(-d * d);
      }
    }
  };
  add_bumps(dh);
  add_bumps(du);
  const double target = energy_cap * (0.5 + 0.5 * detail::unit_uniform(rng));
  const double scale_max = 0.5 * params.hbar / std::max(max_abs_of(dh), 1e-300);
  auto build = [&](double s) {
    FluidState st = flat_state(grid, params);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      st.h[i] += s * dh[i];
      st.u[i] = s * std::sqrt(params.g * params.hbar) * du[i];
    }
    return st;
  };
  return build(detail::largest_within(build, 0.0, scale_max, target, params, grid));
}

}  // namespace msgn
