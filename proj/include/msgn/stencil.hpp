#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "msgn/error.hpp"

namespace msgn {

using Field = std::vector<double>;

namespace stencil {

/// Periodic index.
inline std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

inline std::size_t next(std::size_t i, std::size_t n) { return i + 1 == n ? 0 : i + 1; }
inline std::size_t prev(std::size_t i, std::size_t n) { return i == 0 ? n - 1 : i - 1; }

inline void require_same_size(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("field size mismatch");
}

/// Centered first difference (v[i+1] - v[i-1]) / (2 dx).
inline Field centered_diff(std::span<const double> v, double dx) {
  const std::size_t n = v.size();
  Field d(n);
  const double inv = 0.5 / dx;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = (v[next(i, n)] - v[prev(i, n)]) * inv;
  }
  return d;
}

/// Face differences: entry i lives at the face between cells i and i+1.
inline Field face_diff(std::span<const double> v, double dx) {
  const std::size_t n = v.size();
  Field d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = (v[next(i, n)] - v[i]) / dx;
  return d;
}

/// Face averages (v[i] + v[i+1]) / 2.
inline Field face_average(std::span<const double> v) {
  const std::size_t n = v.size();
  Field a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = 0.5 * (v[i] + v[next(i, n)]);
  return a;
}

/// Cell divergence of a face field: (f[i] - f[i-1]) / dx.
inline Field face_divergence(std::span<const double> f, double dx) {
  const std::size_t n = f.size();
  Field d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = (f[i] - f[prev(i, n)]) / dx;
  return d;
}

/// Second difference (v[i+1] - 2 v[i] + v[i-1]) / dx^2.
inline Field second_diff(std::span<const double> v, double dx) {
  const std::size_t n = v.size();
  Field d(n);
  const double inv = 1.0 / (dx * dx);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = (v[next(i, n)] - 2.0 * v[i] + v[prev(i, n)]) * inv;
  }
  return d;
}

}  // namespace stencil
}  // namespace msgn
