#pragma once

#include <span>

#include "msgn/cyclic_tridiagonal.hpp"
#include "msgn/model.hpp"
#include "msgn/stencil.hpp"

namespace msgn {

/**
 * @brief Discrete Sturm-Liouville operator  v -> h v - (alpha/3) d/dx (h^3 dv/dx).
 *
 * Conservative three-point stencil with face coefficients ((h_i + h_{i+1})/2)^3,
 * so the matrix is symmetric, cyclic tridiagonal and, for positive depth,
 * strictly diagonally dominant. Immutable after assembly.
 */
struct SLOperator {
  Field diag;      ///< diagonal entries
  Field off;       ///< off[i] couples rows i and i+1 (mod n)
  Field h_frozen;  ///< depth used at assembly
  double alpha = 0.0;
  double dx = 0.0;
  int n = 0;
};

inline SLOperator assemble(std::span<const double> h, const ModelParams& params, const Grid& grid) {
  if (h.size() != grid.size()) throw ShapeError("assemble: depth size does not match grid");
  require_positive_depth(h, "assemble");
  const std::size_t n = grid.size();
  SLOperator op;
  op.alpha = params.alpha;
  op.dx = grid.dx;
  op.n = grid.n;
  op.h_frozen.assign(h.begin(), h.end());
  op.diag.resize(n);
  op.off.resize(n);
  const double k = params.alpha / (3.0 * grid.dx * grid.dx);
  Field face(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 0.5 * (h[i] + h[stencil::next(i, n)]);
    face[i] = k * a * a * a;
  }
  for (std::size_t i = 0; i < n; ++i) {
    op.diag[i] = h[i] + face[i] + face[stencil::prev(i, n)];
    op.off[i] = -face[i];
  }
  return op;
}

inline Field apply(const SLOperator& op, std::span<const double> v) {
  if (v.size() != op.diag.size()) throw ShapeError("apply: field size does not match operator");
  const std::size_t n = v.size();
  Field out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = stencil::next(i, n);
    const std::size_t im = stencil::prev(i, n);
    out[i] = op.off[im] * v[im] + op.diag[i] * v[i] + op.off[i] * v[ip];
  }
  return out;
}

/// Unique v with L_h v = f.
inline Field solve(const SLOperator& op, std::span<const double> f) {
  if (f.size() != op.diag.size()) throw ShapeError("solve: field size does not match operator");
  const CyclicTridiagonal<double> sys(op.diag, op.off);
  Field v = sys.solve(f);
  for (double x : v) {
    if (!std::isfinite(x)) throw InternalError("solve: non-finite solution");
  }
  return v;
}

/// L_h^{-1} (D0 psi), the non-local operator of the evolution equation.
inline Field solve_dx(const SLOperator& op, std::span<const double> psi) {
  if (psi.size() != op.diag.size()) throw ShapeError("solve_dx: field size does not match operator");
  return solve(op, stencil::centered_diff(psi, op.dx));
}

/**
 * Pointwise defect of the operator identity
 *
 *   (1 + alpha/3 h^3 d/dx L^{-1} d/dx) Psi = h^3 d/dx L^{-1} (h * int_{left}^{x} h^{-3} Psi).
 *
 * The primitive is a cumulative trapezoid from the left edge of the box. On a
 * periodic grid it must return to zero at the right edge, i.e. the test field
 * needs a vanishing h^{-3}-weighted integral; otherwise the wrap-around jump
 * shows up in the residual near x = 0.
 */
inline Field psi_identity_residual(const FluidState& state, const ModelParams& params, const Grid& grid,
                                   std::span<const double> test) {
  require_shape(state, grid);
  if (test.size() != grid.size()) throw ShapeError("psi_identity_residual: test size mismatch");
  const SLOperator op = assemble(state.h, params, grid);
  const std::size_t n = grid.size();
  const double dx = grid.dx;
  const auto& h = state.h;

  const Field inner = solve_dx(op, test);
  const Field d_inner = stencil::centered_diff(inner, dx);

  Field weighted(n), primitive(n);
  for (std::size_t i = 0; i < n; ++i) weighted[i] = test[i] / (h[i] * h[i] * h[i]);
  primitive[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) primitive[i] = primitive[i - 1] + 0.5 * dx * (weighted[i - 1] + weighted[i]);
  Field hw(n);
  for (std::size_t i = 0; i < n; ++i) hw[i] = h[i] * primitive[i];
  const Field d_outer = stencil::centered_diff(solve(op, hw), dx);

  Field res(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double h3 = h[i] * h[i] * h[i];
    res[i] = test[i] + params.alpha / 3.0 * h3 * d_inner[i] - h3 * d_outer[i];
  }
  return res;
}

}  // namespace msgn
