#pragma once

#include <cmath>

#include "msgn/model.hpp"
#include "msgn/stencil.hpp"

namespace msgn {

/// Riemann invariants, characteristic speeds and invariant gradients of one state.
struct RiemannFields {
  Field R, S;
  Field lambda, mu;
  Field P, Q;
};

inline RiemannFields riemann_fields(const FluidState& state, const ModelParams& params, const Grid& grid) {
  require_shape(state, grid);
  require_positive_depth(state.h, "riemann_fields");
  const std::size_t n = grid.size();
  const double k = params.reduced_gravity();
  RiemannFields f;
  f.R.resize(n);
  f.S.resize(n);
  f.lambda.resize(n);
  f.mu.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::sqrt(k * state.h[i]);
    f.R[i] = state.u[i] + 2.0 * c;
    f.S[i] = state.u[i] - 2.0 * c;
    f.lambda[i] = state.u[i] + c;
    f.mu[i] = state.u[i] - c;
  }
  f.P = stencil::centered_diff(f.R, grid.dx);
  f.Q = stencil::centered_diff(f.S, grid.dx);
  return f;
}

/// Local sound-like speed sqrt(((alpha-1)/alpha) g h).
inline double wave_speed(double h, const ModelParams& params) { return std::sqrt(params.reduced_gravity() * h); }

}  // namespace msgn
