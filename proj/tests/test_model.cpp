#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "msgn/cyclic_tridiagonal.hpp"
#include "msgn/energy.hpp"
#include "msgn/model.hpp"
#include "msgn/riemann.hpp"
#include "msgn/stencil.hpp"
#include "oracles.hpp"

using namespace msgn;

TEST(ModelParams, DerivedConstants) {
  const ModelParams p = derive_params(9.81, 1.0, 2.0 / 15.0);
  EXPECT_DOUBLE_EQ(p.alpha, 1.2);
  // mpmath, 30 digits
  EXPECT_NEAR(p.c0, 1.27867118525444218285690827372, 1e-14);
  EXPECT_NEAR(p.energy_threshold, 0.844310369473216880969079857152, 1e-15);
  EXPECT_NEAR(p.reduced_gravity(), p.c0 * p.c0, 1e-14);
}

TEST(ModelParams, ThresholdScalesWithDepthCubed) {
  const ModelParams a = derive_params(9.81, 1.0, 0.2), b = derive_params(9.81, 2.0, 0.2);
  EXPECT_NEAR(b.energy_threshold / a.energy_threshold, 8.0, 1e-13);
}

TEST(ModelParams, RejectsNonPositive) {
  EXPECT_THROW(derive_params(0.0, 1.0, 0.1), ParameterDomainError);
  EXPECT_THROW(derive_params(9.81, -1.0, 0.1), ParameterDomainError);
  EXPECT_THROW(derive_params(9.81, 1.0, 0.0), ParameterDomainError);
  EXPECT_THROW(derive_params(9.81, 1.0, std::nan("")), ParameterDomainError);
}

TEST(Grid, Construction) {
  const Grid g = make_grid(64, 8.0);
  EXPECT_EQ(g.size(), 64u);
  EXPECT_DOUBLE_EQ(g.dx, 0.125);
  EXPECT_DOUBLE_EQ(g.x(3), 0.375);
  EXPECT_THROW(make_grid(15, 1.0), ParameterDomainError);
  EXPECT_THROW(make_grid(8, 1.0), ParameterDomainError);
  EXPECT_THROW(make_grid(64, 0.0), ParameterDomainError);
}

TEST(Validation, DepthAndShape) {
  const Grid g = make_grid(16, 1.0);
  FluidState s;
  s.h.assign(16, 1.0);
  s.u.assign(15, 0.0);
  EXPECT_THROW(require_shape(s, g), ShapeError);
  s.u.assign(16, 0.0);
  EXPECT_NO_THROW(validate(s, g, "test"));
  s.h[4] = 0.0;
  EXPECT_THROW(validate(s, g, "test"), DegenerateDepthError);
  s.h[4] = 1.0;
  s.u[2] = std::nan("");
  EXPECT_THROW(validate(s, g, "test"), Error);
}

TEST(Stencil, PeriodicIndexing) {
  EXPECT_EQ(stencil::wrap(-1, 8), 7u);
  EXPECT_EQ(stencil::wrap(9, 8), 1u);
  EXPECT_EQ(stencil::next(7, 8), 0u);
  EXPECT_EQ(stencil::prev(0, 8), 7u);
}

TEST(Stencil, DerivativesMatchOracleAndConverge) {
  double prev_err = 0.0;
  for (int n : {64, 128}) {
    const Grid g = make_grid(n, 2.0 * std::numbers::pi);
    Field v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::sin(g.x(i)) + 0.3 * std::cos(2.0 * g.x(i));
    const Field d = stencil::centered_diff(v, g.dx);
    const Field dd = stencil::second_diff(v, g.dx);
    EXPECT_LT(oracle::max_abs_diff(d, oracle::d0(v, g.dx)), 1e-13);
    EXPECT_LT(oracle::max_abs_diff(dd, oracle::d2(v, g.dx)), 1e-10);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      err = std::max(err, std::abs(d[i] - (std::cos(g.x(i)) - 0.6 * std::sin(2.0 * g.x(i)))));
    }
    if (prev_err > 0.0) {
      EXPECT_NEAR(std::log2(prev_err / err), 2.0, 0.05);
    }
    prev_err = err;
  }
}

TEST(Stencil, FaceDivergenceTelescopes) {
  Field f = {1.0, 3.0, -2.0, 0.5, 4.0, 1.5, -1.0, 2.0};
  const Field div = stencil::face_divergence(f, 0.25);
  double sum = 0.0;
  for (double x : div) sum += x;
  EXPECT_NEAR(sum, 0.0, 1e-14);
}

TEST(CyclicTridiagonal, MatchesDenseOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const std::size_t n = 40;
  std::vector<double> diag(n), off(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    off[i] = unit(rng);
    rhs[i] = unit(rng);
  }
  for (std::size_t i = 0; i < n; ++i) diag[i] = 2.5 + std::abs(off[i]) + std::abs(off[(i + n - 1) % n]);
  oracle::Matrix a(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = diag[i];
    a[i][(i + 1) % n] += off[i];
    a[(i + 1) % n][i] += off[i];
  }
  const CyclicTridiagonal<double> sys(diag, off);
  const auto want = oracle::dense_solve(a, rhs);
  EXPECT_LT(oracle::max_abs_diff(sys.solve(rhs), want), 1e-13);
  EXPECT_LT(oracle::max_abs_diff(sys.solve_direct(rhs), want), 1e-12);
  const auto back = sys.multiply(want);
  EXPECT_LT(oracle::max_abs_diff(back, rhs), 1e-13);
}

TEST(CyclicTridiagonal, RejectsWrongSize) {
  const CyclicTridiagonal<double> sys(std::vector<double>(8, 3.0), std::vector<double>(8, -1.0));
  EXPECT_THROW(sys.solve(std::vector<double>(7, 1.0)), ShapeError);
}

TEST(Energy, FlatRestStateHasZeroEnergy) {
  const ModelParams p = derive_params(9.81, 1.0, 2.0 / 15.0);
  const Grid g = make_grid(32, 4.0);
  FluidState s;
  s.h.assign(32, 1.0);
  s.u.assign(32, 0.0);
  EXPECT_EQ(total_energy(s, p, g), 0.0);
  EXPECT_DOUBLE_EQ(total_mass(s, g), 4.0);
}

TEST(Energy, UniformFlowIsKineticOnly) {
  const ModelParams p = derive_params(9.81, 1.5, 0.1);
  const Grid g = make_grid(32, 4.0);
  FluidState s;
  s.h.assign(32, 1.5);
  s.u.assign(32, 0.4);
  EXPECT_NEAR(total_energy(s, p, g), 0.5 * 1.5 * 0.16 * 4.0, 1e-14);
}

TEST(Energy, BudgetConvergesToQuadrature) {
  // Continuous energy of the smooth state by fine trapezoid quadrature of the local density.
  const ModelParams p = derive_params(9.81, 1.0, 2.0 / 15.0);
  const Grid fine = make_grid(8192, 10.0);
  const FluidState sf = oracle::smooth_state(fine, 1.0);
  const auto hx = oracle::d0(sf.h, fine.dx), ux = oracle::d0(sf.u, fine.dx);
  double ref = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) ref += local_energy_density(sf.h[i], sf.u[i], hx[i], ux[i], p) * fine.dx;
  std::vector<double> err;
  for (int n : {128, 256}) {
    const Grid g = make_grid(n, 10.0);
    err.push_back(std::abs(total_energy(oracle::smooth_state(g, 1.0), p, g) - ref));
  }
  EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.2);
  const Grid g = make_grid(128, 10.0);
  const FluidState s = oracle::smooth_state(g, 1.0);
  const EnergyBudget b = energy_budget(s, p, g);
  EXPECT_NEAR(b.total, total_energy(s, p, g), 1e-13);
}

TEST(Riemann, InvariantsAndGradients) {
  const ModelParams p = derive_params(9.81, 1.0, 2.0 / 15.0);
  const Grid g = make_grid(256, 10.0);
  const FluidState s = oracle::smooth_state(g, 1.0);
  const RiemannFields f = riemann_fields(s, p, g);
  const auto hx = oracle::d0(s.h, g.dx), ux = oracle::d0(s.u, g.dx);
  const double k = p.reduced_gravity();
  for (std::size_t i = 0; i < g.size(); i += 17) {
    const double c = std::sqrt(k * s.h[i]);
    EXPECT_NEAR(f.R[i] - f.S[i], 4.0 * c, 1e-13);
    EXPECT_NEAR(f.lambda[i] - f.mu[i], 2.0 * c, 1e-13);
    EXPECT_NEAR(wave_speed(s.h[i], p), c, 1e-15);
    // P - Q = 2 sqrt(k/h) h_x, P + Q = 2 u_x, up to O(dx^2)
    EXPECT_NEAR(f.P[i] - f.Q[i], 2.0 * std::sqrt(k / s.h[i]) * hx[i], 2e-3);
    EXPECT_NEAR(f.P[i] + f.Q[i], 2.0 * ux[i], 1e-12);
  }
}
