#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "msgn/error.hpp"
#include "msgn/stencil.hpp"

namespace msgn {

/// Physical constants of the model and the quantities derived from them.
struct ModelParams {
  double g = 0.0;
  double hbar = 0.0;
  double beta = 0.0;
  double alpha = 0.0;             ///< 1 + 3/2 beta
  double c0 = 0.0;                ///< sqrt((alpha-1)/alpha g hbar)
  double energy_threshold = 0.0;  ///< g sqrt(beta) / (3 sqrt 2) hbar^3

  /// (alpha - 1) / alpha, evaluated as 1.5 beta / (1 + 1.5 beta).
  double reduced_gravity_factor() const { return 1.5 * beta / alpha; }
  /// ((alpha - 1) / alpha) g, the squared speed per unit depth of the hyperbolic part.
  double reduced_gravity() const { return reduced_gravity_factor() * g; }
};

inline ModelParams derive_params(double g, double hbar, double beta) {
  if (!(g > 0.0) || !(hbar > 0.0) || !(beta > 0.0)) {
    throw ParameterDomainError("derive_params: g, hbar and beta must be positive");
  }
  ModelParams p;
  p.g = g;
  p.hbar = hbar;
  p.beta = beta;
  p.alpha = 1.0 + 1.5 * beta;
  p.c0 = std::sqrt(p.reduced_gravity() * hbar);
  p.energy_threshold = g * std::sqrt(beta) / (3.0 * std::sqrt(2.0)) * hbar * hbar * hbar;
  return p;
}

enum class Boundary { periodic };

/// Uniform cell grid on [0, length), sample i at x = i dx.
struct Grid {
  int n = 0;
  double length = 0.0;
  double dx = 0.0;
  Boundary bc = Boundary::periodic;

  double x(std::size_t i) const { return static_cast<double>(i) * dx; }
  std::size_t size() const { return static_cast<std::size_t>(n); }
};

inline Grid make_grid(int n, double length) {
  if (n < 16 || n % 2 != 0) throw ParameterDomainError("grid: n must be even and >= 16");
  if (!(length > 0.0)) throw ParameterDomainError("grid: length must be positive");
  return Grid{n, length, length / n, Boundary::periodic};
}

struct FluidState {
  double t = 0.0;
  Field h;
  Field u;
};

/// Per-summand integrals of the energy density.
struct EnergyBudget {
  double total = 0.0;
  double kinetic = 0.0;       ///< 1/2 h u^2
  double dispersive_u = 0.0;  ///< alpha/6 h^3 u_x^2
  double potential = 0.0;     ///< g/2 (h - hbar)^2
  double dispersive_h = 0.0;  ///< beta/4 g h^2 h_x^2
};

inline void require_positive_depth(std::span<const double> h, const char* where) {
  for (double v : h) {
    if (!std::isfinite(v)) throw InstabilityError(std::string(where) + ": non-finite depth");
    if (!(v > 0.0)) throw DegenerateDepthError(std::string(where) + ": depth must stay positive");
  }
}

inline void require_shape(const FluidState& s, const Grid& grid) {
  if (s.h.size() != grid.size() || s.u.size() != grid.size()) {
    throw ShapeError("state sample count does not match grid");
  }
}

inline void validate(const FluidState& s, const Grid& grid, const char* where) {
  require_shape(s, grid);
  require_positive_depth(s.h, where);
  for (double v : s.u) {
    if (!std::isfinite(v)) throw InstabilityError(std::string(where) + ": non-finite velocity");
  }
}

inline double min_of(std::span<const double> v) { return *std::min_element(v.begin(), v.end()); }
inline double max_of(std::span<const double> v) { return *std::max_element(v.begin(), v.end()); }
inline double max_abs_of(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Discrete integral (rectangle rule, exact for trigonometric polynomials on the periodic grid).
inline double integrate(std::span<const double> v, double dx) {
  double s = 0.0;
  for (double x : v) s += x;
  return s * dx;
}

}  // namespace msgn
