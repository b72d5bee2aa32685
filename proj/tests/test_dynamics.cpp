#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "msgn/dynamics.hpp"
#include "msgn/energy.hpp"
#include "msgn/initial_data.hpp"
#include "msgn/simulation.hpp"
#include "oracles.hpp"

using namespace msgn;

namespace {

const ModelParams params = derive_params(9.81, 1.0, 2.0 / 15.0);

// R evaluated from its definition, with u_t taken from the oracle tendency.
std::vector<double> script_r_oracle(const FluidState& s, double dx) {
  const auto t = oracle::hxx_form_rhs(s.h, s.u, params, dx);
  const auto utx = oracle::d0(t.u_t, dx), ux = oracle::d0(s.u, dx), uxx = oracle::d2(s.u, dx);
  const auto hx = oracle::d0(s.h, dx), hxx = oracle::d2(s.h, dx);
  std::vector<double> r(s.h.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double h = s.h[i];
    r[i] = params.alpha / 3.0 * h * h * h * (-utx[i] - s.u[i] * uxx[i] + ux[i] * ux[i]) -
           0.5 * params.beta * params.g * h * h * (h * hxx[i] + 0.5 * hx[i] * hx[i]);
  }
  return r;
}

}  // namespace

TEST(Rhs, RestAndUniformFlowAreSteady) {
  const Grid g = make_grid(64, 10.0);
  for (Formulation f : {Formulation::energy_conserving, Formulation::reformulated}) {
    const Tendency rest = rhs(flat_state(g, params), params, g, f);
    EXPECT_LT(max_abs_of(rest.dh_dt), 1e-15);
    EXPECT_LT(max_abs_of(rest.du_dt), 1e-15);
    const Tendency moving = rhs(flat_state(g, params, 0.7), params, g, f);
    EXPECT_LT(max_abs_of(moving.dh_dt), 1e-13);
    EXPECT_LT(max_abs_of(moving.du_dt), 1e-13);
  }
}

TEST(Rhs, BothFormsConvergeToOracle) {
  for (Formulation f : {Formulation::energy_conserving, Formulation::reformulated}) {
    std::vector<double> dxs, err;
    for (int n : {64, 128, 256}) {
      const Grid g = make_grid(n, 10.0);
      const FluidState s = oracle::smooth_state(g, 1.0, 1);
      const auto ref = oracle::hxx_form_rhs(s.h, s.u, params, g.dx);
      const Tendency t = rhs(s, params, g, f);
      dxs.push_back(g.dx);
      err.push_back(std::max(oracle::max_abs_diff(t.du_dt, ref.u_t), oracle::max_abs_diff(t.dh_dt, ref.h_t)));
    }
    EXPECT_NEAR(oracle::loglog_slope(dxs, err), 2.0, 0.3);
  }
}

TEST(Rhs, MassTendencyIntegratesToZero) {
  const Grid g = make_grid(128, 10.0);
  const Tendency t = rhs(oracle::smooth_state(g, 1.0), params, g);
  EXPECT_NEAR(integrate(t.dh_dt, g.dx), 0.0, 1e-13);
}

TEST(ScriptR, ConvergesToDefinition) {
  std::vector<double> dxs, err;
  for (int n : {64, 128, 256}) {
    const Grid g = make_grid(n, 10.0);
    const FluidState s = oracle::smooth_state(g, 1.0);
    dxs.push_back(g.dx);
    err.push_back(oracle::max_abs_diff(script_r(s, params, g), script_r_oracle(s, g.dx)));
  }
  EXPECT_NEAR(oracle::loglog_slope(dxs, err), 2.0, 0.3);
}

TEST(ScriptR, VanishesAtRest) {
  const Grid g = make_grid(32, 4.0);
  EXPECT_LT(max_abs_of(script_r(flat_state(g, params), params, g)), 1e-13);
}

TEST(TimeStep, CflMatchesFastestCharacteristic) {
  const Grid g = make_grid(64, 10.0);
  const FluidState s = oracle::smooth_state(g, 1.0);
  double smax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    smax = std::max(smax, std::abs(s.u[i]) + std::sqrt(1.5 * params.beta / params.alpha * params.g * s.h[i]));
  }
  EXPECT_NEAR(cfl_dt(s, params, g, 0.4), 0.4 * g.dx / smax, 1e-15);
}

TEST(TimeStep, GradientBound) {
  const Grid g = make_grid(64, 10.0);
  EXPECT_EQ(gradient_dt(flat_state(g, params), g, 0.1), std::numeric_limits<double>::infinity());
  const FluidState s = oracle::smooth_state(g, 1.0);
  const double rate = -min_of(oracle::d0(s.u, g.dx));
  ASSERT_GT(rate, 0.0);
  EXPECT_NEAR(gradient_dt(s, g, 0.1), 0.1 / rate, 1e-14);
}

TEST(Rk4, FourthOrderInTime) {
  const Grid g = make_grid(64, 10.0);
  const FluidState s0 = oracle::smooth_state(g, 1.0);
  auto run = [&](int steps) {
    FluidState s = s0;
    for (int j = 0; j < steps; ++j) s = rk4_step(s, 0.2 / steps, params, g);
    return s;
  };
  const FluidState ref = run(64), a = run(8), b = run(16);
  const double ea = oracle::max_abs_diff(a.u, ref.u), eb = oracle::max_abs_diff(b.u, ref.u);
  EXPECT_NEAR(std::log2(ea / eb), 4.0, 0.4);
  EXPECT_NEAR(b.t, 0.2, 1e-14);
}

TEST(Rk4, RejectsBadStep) {
  const Grid g = make_grid(32, 10.0);
  EXPECT_THROW(rk4_step(flat_state(g, params), 0.0, params, g), ParameterDomainError);
  FluidState s = gaussian_state(g, params, -0.9, 1.0, 5.0);
  for (std::size_t i = 0; i < g.size(); ++i) s.u[i] = 3.0 * std::sin(2.0 * std::numbers::pi * g.x(i) / g.length);
  EXPECT_THROW(rk4_step(s, 5.0, params, g), StageFailure);
}

TEST(Conservation, EnergyAndMassOverShortRun) {
  const Grid g = make_grid(128, 20.0);
  FluidState s = gaussian_state(g, params, 0.1, 2.0, 10.0);
  const double e0 = total_energy(s, params, g), m0 = total_mass(s, g);
  const double dt = cfl_dt(s, params, g, 0.3);
  for (int j = 0; j < 100; ++j) s = rk4_step(s, dt, params, g);
  EXPECT_LT(std::abs(total_energy(s, params, g) - e0) / e0, 1e-6);
  EXPECT_LT(std::abs(total_mass(s, g) - m0) / m0, 1e-13);
}

TEST(Conservation, ReformulatedDriftsMore) {
  const Grid g = make_grid(128, 20.0);
  FluidState a = gaussian_state(g, params, 0.1, 2.0, 10.0), b = a;
  const double e0 = total_energy(a, params, g);
  const double dt = cfl_dt(a, params, g, 0.3);
  for (int j = 0; j < 100; ++j) {
    a = rk4_step(a, dt, params, g, Formulation::energy_conserving);
    b = rk4_step(b, dt, params, g, Formulation::reformulated);
  }
  EXPECT_LT(std::abs(total_energy(a, params, g) - e0), std::abs(total_energy(b, params, g) - e0));
}

TEST(Simulate, FlatWaterReachesEnd) {
  SimConfig c;
  c.params = params;
  c.grid = make_grid(32, 4.0);
  c.t_end = 0.5;
  c.snapshot_every = 5;
  const Trajectory tr = simulate(c, flat_state(c.grid, params));
  EXPECT_EQ(tr.termination, Termination::reached_t_end);
  EXPECT_EQ(tr.classification.label, Termination::reached_t_end);
  EXPECT_DOUBLE_EQ(tr.snapshots.back().t, 0.5);
  EXPECT_EQ(tr.series.size(), tr.steps + 1);
  EXPECT_EQ(tr.snapshots.size(), tr.steps / 5 + 1 + (tr.steps % 5 ? 1 : 0));
  EXPECT_TRUE(tr.warnings.empty());
  for (const SeriesRow& r : tr.series) EXPECT_EQ(r.total_energy, 0.0);
}

TEST(Simulate, DtUnderflowWhenFloorTooHigh) {
  SimConfig c;
  c.params = params;
  c.grid = make_grid(32, 4.0);
  c.dt_min = 1.0;
  const Trajectory tr = simulate(c, flat_state(c.grid, params));
  EXPECT_EQ(tr.termination, Termination::dt_underflow);
  EXPECT_EQ(tr.steps, 0u);
  EXPECT_EQ(tr.classification.label, Termination::dt_underflow);
}

TEST(Simulate, DepthFloorStopsRun) {
  SimConfig c;
  c.params = params;
  c.grid = make_grid(64, 10.0);
  Thresholds th;
  th.h_floor = 0.95;
  th.u_big = th.h_big = 1e9;
  c.thresholds = th;
  const Trajectory tr = simulate(c, gaussian_state(c.grid, params, -0.1, 1.0, 5.0));
  EXPECT_EQ(tr.termination, Termination::depth_vanishing);
  EXPECT_EQ(tr.classification.label, Termination::depth_vanishing);
}

TEST(Simulate, BoundaryWarning) {
  SimConfig c;
  c.params = params;
  c.grid = make_grid(128, 10.0);
  c.t_end = 3.0;
  const Trajectory tr = simulate(c, gaussian_state(c.grid, params, 0.05, 0.5, 5.0));
  ASSERT_EQ(tr.warnings.size(), 1u);
  EXPECT_NE(tr.warnings[0].find("periodic boundary"), std::string::npos);
}

TEST(Simulate, ValidatesConfig) {
  SimConfig c;
  c.params = params;
  c.grid = make_grid(32, 4.0);
  const FluidState s = flat_state(c.grid, params);
  c.courant = 1.5;
  EXPECT_THROW(simulate(c, s), ParameterDomainError);
  c.courant = 0.3;
  c.t_end = -1.0;
  EXPECT_THROW(simulate(c, s), ParameterDomainError);
  c.t_end = 1.0;
  c.snapshot_every = 0;
  EXPECT_THROW(simulate(c, s), ParameterDomainError);
  c.snapshot_every = 1;
  FluidState bad = s;
  bad.h.pop_back();
  EXPECT_THROW(simulate(c, bad), ShapeError);
}
