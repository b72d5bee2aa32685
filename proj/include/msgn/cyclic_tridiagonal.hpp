#pragma once

#include <cmath>
#include <concepts>
#include <span>
#include <vector>

#include "msgn/error.hpp"
#include "msgn/stencil.hpp"

namespace msgn {

/**
 * @brief Symmetric cyclic tridiagonal system.
 *
 * Row i reads  off[i-1] x[i-1] + diag[i] x[i] + off[i] x[i+1] = rhs[i]  with
 * indices taken modulo n, so off[n-1] is the corner coupling between rows
 * n-1 and 0. The periodic corner is removed with a Sherman-Morrison rank-one
 * update and the remaining tridiagonal system is eliminated once per
 * factorisation; solve() is O(n).
 */
template <std::floating_point T>
class CyclicTridiagonal {
 public:
  CyclicTridiagonal(std::span<const T> diag, std::span<const T> off)
      : n_(diag.size()), diag_(diag.begin(), diag.end()), off_(off.begin(), off.end()) {
    if (off.size() != n_) throw ShapeError("cyclic tridiagonal: diag/off size mismatch");
    if (n_ < 3) throw ShapeError("cyclic tridiagonal: need at least 3 unknowns");
    factor();
  }

  std::size_t size() const { return n_; }

  /// y = A x
  std::vector<T> multiply(std::span<const T> x) const {
    check(x.size());
    std::vector<T> y(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t ip = stencil::next(i, n_);
      const std::size_t im = stencil::prev(i, n_);
      y[i] = off_[im] * x[im] + diag_[i] * x[i] + off_[i] * x[ip];
    }
    return y;
  }

  /// Direct solve without refinement.
  std::vector<T> solve_direct(std::span<const T> rhs) const {
    check(rhs.size());
    std::vector<T> x = eliminate(rhs);
    const T fact = (x[0] + corner_ * x[n_ - 1] / gamma_) / denom_;
    for (std::size_t i = 0; i < n_; ++i) x[i] -= fact * z_[i];
    return x;
  }

  /// Direct solve followed by one pass of iterative refinement.
  std::vector<T> solve(std::span<const T> rhs) const {
    std::vector<T> x = solve_direct(rhs);
    std::vector<T> r = multiply(x);
    for (std::size_t i = 0; i < n_; ++i) r[i] = rhs[i] - r[i];
    const std::vector<T> dx = solve_direct(r);
    for (std::size_t i = 0; i < n_; ++i) x[i] += dx[i];
    return x;
  }

 private:
  void check(std::size_t m) const {
    if (m != n_) throw ShapeError("cyclic tridiagonal: right-hand side size mismatch");
  }

  void factor() {
    corner_ = off_[n_ - 1];
    gamma_ = -diag_[0];
    if (gamma_ == T(0)) throw InternalError("cyclic tridiagonal: zero pivot");
    // Modified tridiagonal T = A - gamma-weighted outer product, stored as LU pivots.
    mdiag_ = diag_;
    mdiag_[0] = diag_[0] - gamma_;
    mdiag_[n_ - 1] = diag_[n_ - 1] - corner_ * corner_ / gamma_;
    ipiv_.assign(n_, T(0));
    mult_.assign(n_, T(0));
    T piv = mdiag_[0];
    for (std::size_t i = 0; i < n_; ++i) {
      if (i > 0) piv = mdiag_[i] - off_[i - 1] * mult_[i - 1];
      if (!(std::abs(piv) > T(0)) || !std::isfinite(piv)) {
        throw InternalError("cyclic tridiagonal: factorisation breakdown");
      }
      ipiv_[i] = T(1) / piv;
      mult_[i] = off_[i] * ipiv_[i];
    }
    std::vector<T> uvec(n_, T(0));
    uvec[0] = gamma_;
    uvec[n_ - 1] = corner_;
    z_ = eliminate(uvec);
    denom_ = T(1) + z_[0] + corner_ * z_[n_ - 1] / gamma_;
    if (denom_ == T(0)) throw InternalError("cyclic tridiagonal: singular rank-one update");
  }

  // Thomas sweep on the modified (non-cyclic) tridiagonal matrix.
  std::vector<T> eliminate(std::span<const T> rhs) const {
    std::vector<T> y(n_);
    y[0] = rhs[0];
    for (std::size_t i = 1; i < n_; ++i) y[i] = rhs[i] - mult_[i - 1] * y[i - 1];
    y[n_ - 1] *= ipiv_[n_ - 1];
    for (std::size_t i = n_ - 1; i-- > 0;) y[i] = y[i] * ipiv_[i] - mult_[i] * y[i + 1];
    return y;
  }

  std::size_t n_;
  std::vector<T> diag_, off_;
  std::vector<T> mdiag_, ipiv_, mult_, z_;
  T corner_{}, gamma_{}, denom_{};
};

}  // namespace msgn
