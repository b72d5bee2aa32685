#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "msgn/dynamics.hpp"
#include "msgn/model.hpp"
#include "msgn/riemann.hpp"
#include "msgn/simulation.hpp"

namespace msgn {

enum class Family { lambda, mu };

inline const char* to_string(Family f) { return f == Family::lambda ? "lambda" : "mu"; }

/// Speeds, invariant gradients, depth and the nonlocal Riccati source 3 h^-3 R / alpha at every snapshot.
struct TrajectoryFields {
  Grid grid;
  std::vector<double> times;
  std::vector<Field> lambda, mu, P, Q, h, source;

  std::size_t size() const { return times.size(); }
};

inline TrajectoryFields prepare_fields(const std::vector<FluidState>& snapshots, const ModelParams& params,
                                       const Grid& grid) {
  if (snapshots.empty()) throw ParameterDomainError("prepare_fields: no snapshots");
  TrajectoryFields f;
  f.grid = grid;
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    const FluidState& s = snapshots[k];
    if (k > 0 && !(s.t > f.times.back())) throw ParameterDomainError("prepare_fields: snapshot times must increase");
    RiemannFields rf = riemann_fields(s, params, grid);
    const Field r = script_r(s, params, grid);
    Field src(grid.size());
    for (std::size_t i = 0; i < src.size(); ++i) src[i] = 3.0 * r[i] / (params.alpha * s.h[i] * s.h[i] * s.h[i]);
    f.times.push_back(s.t);
    f.lambda.push_back(std::move(rf.lambda));
    f.mu.push_back(std::move(rf.mu));
    f.P.push_back(std::move(rf.P));
    f.Q.push_back(std::move(rf.Q));
    f.h.push_back(s.h);
    f.source.push_back(std::move(src));
  }
  return f;
}

inline TrajectoryFields prepare_fields(const Trajectory& traj, const ModelParams& params, const Grid& grid) {
  return prepare_fields(traj.snapshots, params, grid);
}

namespace detail {

// Periodic cubic Lagrange interpolation at any real x.
inline double interp_x(const Field& v, const Grid& grid, double x) {
  const std::size_t n = grid.size();
  const double s = x / grid.dx;
  const double fl = std::floor(s);
  const double f = s - fl;
  long long i0 = static_cast<long long>(fl) % static_cast<long long>(n);
  if (i0 < 0) i0 += static_cast<long long>(n);
  const std::size_t i = static_cast<std::size_t>(i0);
  const std::size_t im = stencil::prev(i, n), ip = stencil::next(i, n), ipp = stencil::next(ip, n);
  const double wm = -f * (f - 1.0) * (f - 2.0) / 6.0;
  const double w0 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
  const double w1 = -(f + 1.0) * f * (f - 2.0) / 2.0;
  const double w2 = (f + 1.0) * f * (f - 1.0) / 6.0;
  return wm * v[im] + w0 * v[i] + w1 * v[ip] + w2 * v[ipp];
}

inline const std::vector<Field>& speed_of(const TrajectoryFields& f, Family fam) {
  return fam == Family::lambda ? f.lambda : f.mu;
}

// Value at (t, x) for t inside snapshot interval k.
inline double interp_tx(const std::vector<Field>& v, const TrajectoryFields& f, std::size_t k, double t, double x) {
  const double a = interp_x(v[k], f.grid, x);
  if (k + 1 >= f.size()) return a;
  const double th = (t - f.times[k]) / (f.times[k + 1] - f.times[k]);
  if (th == 0.0) return a;
  return (1.0 - th) * a + th * interp_x(v[k + 1], f.grid, x);
}

// RK4 from (t_from, x) to t_to, both inside interval k, in steps that move at most about one cell.
inline double advance(const TrajectoryFields& f, Family fam, std::size_t k, double t_from, double t_to, double x) {
  const std::vector<Field>& c = speed_of(f, fam);
  const double span = t_to - t_from;
  if (span == 0.0) return x;
  const double vmax = std::max(max_abs_of(c[k]), k + 1 < f.size() ? max_abs_of(c[k + 1]) : 0.0);
  const int m = std::max(1, static_cast<int>(std::ceil(vmax * std::abs(span) / f.grid.dx)));
  const double dt = span / m;
  double t = t_from;
  for (int j = 0; j < m; ++j) {
    const double k1 = interp_tx(c, f, k, t, x);
    const double k2 = interp_tx(c, f, k, t + 0.5 * dt, x + 0.5 * dt * k1);
    const double k3 = interp_tx(c, f, k, t + 0.5 * dt, x + 0.5 * dt * k2);
    const double k4 = interp_tx(c, f, k, t + dt, x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = t_from + (j + 1) * dt;
  }
  return x;
}

}  // namespace detail

/// A traced characteristic sampled at the snapshot times.
struct CharPath {
  Family family = Family::lambda;
  double origin = 0.0;
  std::vector<double> times;
  std::vector<double> positions;  ///< unwrapped (universal cover)
  std::vector<double> P, Q, h, source;
  bool wrapped = false;    ///< travelled at least one box length
  bool truncated = false;  ///< requested end lies beyond the trajectory

  std::size_t size() const { return times.size(); }
  /// P along a lambda-path, Q along a mu-path.
  const std::vector<double>& values() const { return family == Family::lambda ? P : Q; }
  const std::vector<double>& co_values() const { return family == Family::lambda ? Q : P; }
  double wrapped_position(std::size_t j, double length) const {
    const double x = std::fmod(positions[j], length);
    return x < 0.0 ? x + length : x;
  }
};

/// Integrates dX/dt = lambda (or mu) from x = a at the first snapshot up to t_stop.
inline CharPath trace(const TrajectoryFields& f, double a, Family family,
                      double t_stop = std::numeric_limits<double>::infinity()) {
  CharPath path;
  path.family = family;
  path.origin = a;
  const double L = f.grid.length;
  auto sample = [&](std::size_t k, double x) {
    path.times.push_back(f.times[k]);
    path.positions.push_back(x);
    path.P.push_back(detail::interp_x(f.P[k], f.grid, x));
    path.Q.push_back(detail::interp_x(f.Q[k], f.grid, x));
    path.h.push_back(detail::interp_x(f.h[k], f.grid, x));
    path.source.push_back(detail::interp_x(f.source[k], f.grid, x));
    if (std::abs(x - a) >= L) path.wrapped = true;
  };
  double x = a;
  sample(0, x);
  for (std::size_t k = 0; k + 1 < f.size() && f.times[k + 1] <= t_stop; ++k) {
    x = detail::advance(f, family, k, f.times[k], f.times[k + 1], x);
    sample(k + 1, x);
  }
  path.truncated = t_stop > f.times.back() && std::isfinite(t_stop);
  return path;
}

/// Defect of the Riccati equation along a path, from centered differences in time.
struct RiccatiResidual {
  std::vector<double> times;
  std::vector<double> residual;

  double max_abs() const { return max_abs_of(residual); }
};

inline RiccatiResidual riccati_residual(const CharPath& path) {
  if (path.size() < 3) throw ParameterDomainError("riccati_residual: path needs at least three samples");
  const std::vector<double>& v = path.values();
  const std::vector<double>& w = path.co_values();
  RiccatiResidual out;
  for (std::size_t j = 1; j + 1 < path.size(); ++j) {
    const double h1 = path.times[j] - path.times[j - 1];
    const double h2 = path.times[j + 1] - path.times[j];
    const double dv = -h2 / (h1 * (h1 + h2)) * v[j - 1] + (h2 - h1) / (h1 * h2) * v[j] + h1 / (h2 * (h1 + h2)) * v[j + 1];
    const double rhs = -0.375 * v[j] * v[j] + 0.375 * w[j] * w[j] + v[j] * w[j] - path.source[j];
    out.times.push_back(path.times[j]);
    out.residual.push_back(dv - rhs);
  }
  return out;
}

struct Lemma5Result {
  double first = 0.0;   ///< integral of Q^2 along the lambda-path from x1
  double second = 0.0;  ///< integral of P^2 along the mu-path from x2
  double meet_time = std::numeric_limits<double>::quiet_NaN();
  bool met = false;
};

/// Integrals of the co-gradients squared along X_{x1} and Y_{x2} up to the time they meet.
inline Lemma5Result lemma5_integrals(const TrajectoryFields& f, double x1, double x2) {
  if (!(x1 < x2)) throw ParameterDomainError("lemma5_integrals: requires x1 < x2");
  const CharPath X = trace(f, x1, Family::lambda);
  const CharPath Y = trace(f, x2, Family::mu);
  Lemma5Result out;
  std::size_t k = 0;
  while (k + 1 < X.size() && Y.positions[k + 1] - X.positions[k + 1] > 0.0) ++k;

  auto trapezoid = [](const std::vector<double>& t, const std::vector<double>& v, std::size_t last) {
    double acc = 0.0;
    for (std::size_t j = 0; j < last; ++j) acc += 0.5 * (t[j + 1] - t[j]) * (v[j] * v[j] + v[j + 1] * v[j + 1]);
    return acc;
  };
  out.first = trapezoid(X.times, X.Q, k);
  out.second = trapezoid(Y.times, Y.P, k);
  if (k + 1 >= X.size()) return out;

  double lo = f.times[k], hi = f.times[k + 1];
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gap = detail::advance(f, Family::mu, k, f.times[k], mid, Y.positions[k]) -
                       detail::advance(f, Family::lambda, k, f.times[k], mid, X.positions[k]);
    if (gap > 0.0) lo = mid;
    else hi = mid;
  }
  const double ts = 0.5 * (lo + hi);
  const double xs = detail::advance(f, Family::lambda, k, f.times[k], ts, X.positions[k]);
  const double ys = detail::advance(f, Family::mu, k, f.times[k], ts, Y.positions[k]);
  const double qs = detail::interp_tx(f.Q, f, k, ts, xs);
  const double ps = detail::interp_tx(f.P, f, k, ts, ys);
  const double dt = ts - f.times[k];
  out.first += 0.5 * dt * (X.Q[k] * X.Q[k] + qs * qs);
  out.second += 0.5 * dt * (Y.P[k] * Y.P[k] + ps * ps);
  out.meet_time = ts;
  out.met = true;
  return out;
}

/// v <= A t + B: slope by least squares (clamped at zero), intercept lifted to cover every sample.
struct LinearBound {
  double A = 0.0;
  double B = 0.0;

  double operator()(double t) const { return A * t + B; }
};

inline LinearBound fit_linear_bound(const std::vector<double>& t, const std::vector<double>& v) {
  if (t.empty() || t.size() != v.size()) throw ParameterDomainError("fit_linear_bound: need matching non-empty samples");
  LinearBound b;
  if (t.size() > 1) {
    double tm = 0.0, vm = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      tm += t[i];
      vm += v[i];
    }
    tm /= static_cast<double>(t.size());
    vm /= static_cast<double>(t.size());
    double stt = 0.0, stv = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      stt += (t[i] - tm) * (t[i] - tm);
      stv += (t[i] - tm) * (v[i] - vm);
    }
    if (stt > 0.0) b.A = std::max(0.0, stv / stt);
  }
  b.B = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.size(); ++i) b.B = std::max(b.B, v[i] - b.A * t[i]);
  return b;
}

/// sqrt(max |R| / (alpha h^3)) over the stored snapshots.
inline double suggested_c_tilde(const TrajectoryFields& f) {
  double m = 0.0;
  for (const Field& s : f.source) m = std::max(m, max_abs_of(s));
  return std::sqrt(m / 3.0);
}

struct QbReport {
  LinearBound monitor;        ///< fit of max over paths of the running integral of the co-gradient squared
  LinearBound upper;          ///< |v| <= upper(t), from monitor and c_tilde
  double c_tilde = 0.0;
  double fraction = 1.0;      ///< samples meeting both bounds
  double worst_margin = std::numeric_limits<double>::infinity();
  double max_abs = 0.0;
  bool upper_holds = true;
  bool lower_holds = true;    ///< v >= -C tan(3 C t) wherever 3 C t < pi/2
  std::size_t samples = 0;
};

/**
 * Checks the bounded family of a path bundle: Q along mu-paths for zero-Q data
 * (P along lambda-paths for the mirror image).
 *
 * Along each path dv/dt <= 25/24 w^2 + 3 C^2, with w the co-gradient. The running
 * integral of w^2 is monitored, its bundle maximum fitted by A t + B over
 * t <= t0 + fit_fraction (t_end - t0), and |v| is tested against
 * max|v(t0)| + 25/24 (A t + B) + 3 C^2 t on every sample.
 */
inline QbReport qb_bound_check(const std::vector<CharPath>& paths, double c_tilde, double fit_fraction = 0.5) {
  if (paths.empty()) throw ParameterDomainError("qb_bound_check: no paths");
  if (!(c_tilde > 0.0)) throw ParameterDomainError("qb_bound_check: c_tilde must be positive");
  if (!(fit_fraction > 0.0) || fit_fraction > 1.0) throw ParameterDomainError("qb_bound_check: fit_fraction must lie in (0, 1]");
  const std::size_t m = paths.front().size();
  for (const CharPath& p : paths) {
    if (p.size() != m) throw ShapeError("qb_bound_check: paths must share sample times");
  }
  const std::vector<double>& times = paths.front().times;
  const double t0 = times.front();
  const double t_fit = t0 + fit_fraction * (times.back() - t0);

  QbReport rep;
  rep.c_tilde = c_tilde;
  std::vector<double> running(paths.size(), 0.0);
  std::vector<double> ft, fv;
  double v0 = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double env = 0.0;
    for (std::size_t q = 0; q < paths.size(); ++q) {
      const std::vector<double>& w = paths[q].co_values();
      if (j > 0) running[q] += 0.5 * (times[j] - times[j - 1]) * (w[j - 1] * w[j - 1] + w[j] * w[j]);
      env = std::max(env, running[q]);
      rep.max_abs = std::max(rep.max_abs, std::abs(paths[q].values()[j]));
      if (j == 0) v0 = std::max(v0, std::abs(paths[q].values()[0]));
    }
    if (times[j] <= t_fit) {
      ft.push_back(times[j] - t0);
      fv.push_back(env);
    }
  }
  rep.monitor = fit_linear_bound(ft, fv);
  rep.upper.A = 25.0 / 24.0 * rep.monitor.A + 3.0 * c_tilde * c_tilde;
  rep.upper.B = v0 + 25.0 / 24.0 * rep.monitor.B;

  const double tol = 1e-9 * std::max(1.0, rep.max_abs);
  std::size_t good = 0;
  for (const CharPath& p : paths) {
    for (std::size_t j = 0; j < m; ++j) {
      const double t = times[j] - t0;
      const double v = p.values()[j];
      const double up = rep.upper(t) - std::abs(v);
      double margin = up;
      bool ok = up >= -tol;
      rep.upper_holds = rep.upper_holds && up >= -tol;
      if (3.0 * c_tilde * t < 0.5 * std::numbers::pi) {
        const double lo = v + c_tilde * std::tan(3.0 * c_tilde * t);
        margin = std::min(margin, lo);
        ok = ok && lo >= -tol;
        rep.lower_holds = rep.lower_holds && lo >= -tol;
      }
      rep.worst_margin = std::min(rep.worst_margin, margin);
      good += ok ? 1 : 0;
      ++rep.samples;
    }
  }
  rep.fraction = static_cast<double>(good) / static_cast<double>(rep.samples);
  return rep;
}

}  // namespace msgn
