#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "msgn/dynamics.hpp"
#include "msgn/initial_data.hpp"
#include "msgn/model.hpp"

namespace msgn {

/// c^2 / (g hbar) of the model for a linear wave of wavenumber k, as a function of k hbar.
inline double msgn_phase_speed_sq(double khbar, double beta) {
  if (!(khbar >= 0.0)) throw ParameterDomainError("msgn_phase_speed_sq: khbar must be non-negative");
  if (!(beta >= 0.0)) throw ParameterDomainError("msgn_phase_speed_sq: beta must be non-negative");
  const double k2 = khbar * khbar;
  return (2.0 + beta * k2) / (2.0 + (2.0 / 3.0 + beta) * k2);
}

/// tanh(k hbar) / (k hbar) of the full Euler equations.
inline double exact_phase_speed_sq(double khbar) {
  if (!(khbar >= 0.0)) throw ParameterDomainError("exact_phase_speed_sq: khbar must be non-negative");
  if (khbar < 1e-4) {
    const double k2 = khbar * khbar;
    return 1.0 - k2 / 3.0 + 2.0 * k2 * k2 / 15.0;
  }
  return std::tanh(khbar) / khbar;
}

struct DispersionPoint {
  double khbar = 0.0;
  double msgn = 0.0;
  double exact = 0.0;
  double rel_error = 0.0;
};

inline DispersionPoint dispersion_point(double khbar, double beta) {
  DispersionPoint d;
  d.khbar = khbar;
  d.msgn = msgn_phase_speed_sq(khbar, beta);
  d.exact = exact_phase_speed_sq(khbar);
  d.rel_error = std::abs(d.msgn - d.exact) / d.exact;
  return d;
}

/// Coefficients of 1 + c2 (k hbar)^2 + c4 (k hbar)^4.
struct SeriesCoeffs {
  double c0 = 1.0, c2 = 0.0, c4 = 0.0;
};

struct SeriesComparison {
  SeriesCoeffs model;
  SeriesCoeffs exact;
};

inline SeriesComparison series_coeffs(double beta) {
  if (!(beta >= 0.0)) throw ParameterDomainError("series_coeffs: beta must be non-negative");
  SeriesComparison s;
  s.model = {1.0, -1.0 / 3.0, 1.0 / 9.0 + beta / 6.0};
  s.exact = {1.0, -1.0 / 3.0, 2.0 / 15.0};
  return s;
}

/// Reduced fraction num/den with den > 0.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den) {
    if (den == 0) throw ParameterDomainError("Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    return {num / (g == 0 ? 1 : g), den / (g == 0 ? 1 : g)};
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Fourth-order coefficient 1/9 + beta/6 in exact arithmetic.
inline Rational series_c4_exact(Rational beta) {
  if (beta.num < 0) throw ParameterDomainError("series_c4_exact: beta must be non-negative");
  return Rational::make(2 * beta.den + 3 * beta.num, 18 * beta.den);
}

inline constexpr Rational exact_c4() { return {2, 15}; }

struct PhaseSpeedMeasurement {
  double khbar = 0.0;
  double measured = 0.0;  ///< omega^2 / (g hbar k^2)
  double formula = 0.0;
  double rel_error = 0.0;
  double omega = 0.0;
  double harmonic_ratio = 0.0;  ///< largest second-harmonic amplitude over the fundamental
  int cells_per_wavelength = 0;
  int steps = 0;
};

namespace detail {

// Residual of the best a cos(w t) + b sin(w t) fit.
inline double standing_fit_residual(const std::vector<double>& t, const std::vector<double>& y, double w) {
  double cc = 0.0, ss = 0.0, cs = 0.0, yc = 0.0, ys = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double c = std::cos(w * t[j]), s = std::sin(w * t[j]);
    cc += c * c;
    ss += s * s;
    cs += c * s;
    yc += y[j] * c;
    ys += y[j] * s;
  }
  const double det = cc * ss - cs * cs;
  const double a = (yc * ss - ys * cs) / det;
  const double b = (ys * cc - yc * cs) / det;
  double r = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double e = y[j] - a * std::cos(w * t[j]) - b * std::sin(w * t[j]);
    r += e * e;
  }
  return r;
}

inline void fourier_mode(const Field& v, double offset, const Grid& grid, int mode, double& a, double& b) {
  a = 0.0;
  b = 0.0;
  const double k = 2.0 * std::numbers::pi * mode / grid.length;
  for (std::size_t i = 0; i < v.size(); ++i) {
    a += (v[i] - offset) * std::cos(k * grid.x(i));
    b += (v[i] - offset) * std::sin(k * grid.x(i));
  }
  a *= 2.0 / grid.n;
  b *= 2.0 / grid.n;
}

}  // namespace detail

/**
 * Runs a small standing wave h = hbar + amplitude cos(k x), u = 0 for one linear
 * period and fits the frequency of its k-th Fourier amplitude.
 */
inline PhaseSpeedMeasurement measure_phase_speed(const ModelParams& params, const Grid& grid, double khbar,
                                                 double amplitude, double courant = 0.5) {
  if (!(khbar > 0.0)) throw ParameterDomainError("measure_phase_speed: khbar must be positive");
  if (!(amplitude > 0.0) || amplitude > 1e-4 * params.hbar) {
    throw ParameterDomainError("measure_phase_speed: amplitude must lie in (0, 1e-4 hbar]");
  }
  const double k = khbar / params.hbar;
  const double modes = k * grid.length / (2.0 * std::numbers::pi);
  const int mode = static_cast<int>(std::lround(modes));
  if (mode < 1 || std::abs(modes - mode) > 1e-9 * std::max(1.0, modes)) {
    throw ParameterDomainError("measure_phase_speed: k must be an integer multiple of 2 pi / L");
  }
  PhaseSpeedMeasurement m;
  m.khbar = khbar;
  m.cells_per_wavelength = grid.n / mode;
  if (grid.n % mode != 0 || m.cells_per_wavelength < 32) {
    throw ParameterDomainError("measure_phase_speed: need at least 32 cells per wavelength");
  }
  m.formula = msgn_phase_speed_sq(khbar, params.beta);
  const double omega0 = k * std::sqrt(params.g * params.hbar * m.formula);
  const double period = 2.0 * std::numbers::pi / omega0;

  FluidState s = flat_state(grid, params);
  for (std::size_t i = 0; i < grid.size(); ++i) s.h[i] += amplitude * std::cos(k * grid.x(i));
  const double c_max = params.c0 * std::sqrt(1.0 + amplitude / params.hbar);
  m.steps = static_cast<int>(std::ceil(period / (courant * grid.dx / c_max)));
  const double dt = period / m.steps;

  std::vector<double> ts, ys;
  auto record = [&](const FluidState& st, double t) {
    double a = 0.0, b = 0.0, a2 = 0.0, b2 = 0.0;
    detail::fourier_mode(st.h, params.hbar, grid, mode, a, b);
    if (2 * mode < grid.n / 2) {
      detail::fourier_mode(st.h, params.hbar, grid, 2 * mode, a2, b2);
      m.harmonic_ratio = std::max(m.harmonic_ratio, std::hypot(a2, b2) / amplitude);
    }
    ts.push_back(t);
    ys.push_back(a);
  };
  record(s, 0.0);
  for (int j = 1; j <= m.steps; ++j) {
    s = rk4_step(s, dt, params, grid);
    record(s, j * dt);
  }
  if (m.harmonic_ratio > 0.01) {
    throw OutOfRangeError("measure_phase_speed: amplitude too large, second harmonic exceeds 1% of the fundamental");
  }

  // Coarse scan, then golden section around the best bracket.
  constexpr int scan = 40;
  double lo = 0.5 * omega0, hi = 1.5 * omega0;
  int best = 0;
  double best_r = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= scan; ++j) {
    const double r = detail::standing_fit_residual(ts, ys, lo + (hi - lo) * j / scan);
    if (r < best_r) {
      best_r = r;
      best = j;
    }
  }
  const double step = (hi - lo) / scan;
  double a = lo + step * std::max(0, best - 1), b = lo + step * std::min(scan, best + 1);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = detail::standing_fit_residual(ts, ys, x1), f2 = detail::standing_fit_residual(ts, ys, x2);
  for (int it = 0; it < 100 && (b - a) > 1e-13 * omega0; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = detail::standing_fit_residual(ts, ys, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = detail::standing_fit_residual(ts, ys, x2);
    }
  }
  m.omega = 0.5 * (a + b);
  m.measured = m.omega * m.omega / (params.g * params.hbar * k * k);
  m.rel_error = std::abs(m.measured - m.formula) / m.formula;
  return m;
}

}  // namespace msgn
