#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "msgn/characteristics.hpp"
#include "msgn/diagnostics.hpp"
#include "msgn/dispersion.hpp"
#include "msgn/initial_data.hpp"
#include "msgn/io/config.hpp"
#include "msgn/io/csv.hpp"
#include "msgn/simulation.hpp"

namespace msgn::app {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr const char* version = "msgn 0.1.0";

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 2,
  exit_out_of_range = 3,
  exit_infeasible = 4,
  exit_blowup = 10,
  exit_depth = 11,
  exit_underflow = 12,
  exit_instability = 13,
};

inline int exit_code(Termination t) {
  switch (t) {
    case Termination::reached_t_end: return exit_ok;
    case Termination::blowup_suspected: return exit_blowup;
    case Termination::depth_vanishing: return exit_depth;
    case Termination::dt_underflow: return exit_underflow;
    case Termination::instability: return exit_instability;
  }
  return exit_instability;
}

/// Exact fraction for "p/q", integers and plain decimals; empty for anything else.
inline std::optional<Rational> to_rational(const std::string& text) {
  auto integer = [](const std::string& s, std::int64_t& v) {
    if (s.empty() || s.size() > 15) return false;
    std::size_t i = s[0] == '-' || s[0] == '+' ? 1 : 0;
    if (i == s.size()) return false;
    for (std::size_t j = i; j < s.size(); ++j) {
      if (s[j] < '0' || s[j] > '9') return false;
    }
    v = std::stoll(s);
    return true;
  };
  std::int64_t num = 0, den = 1;
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    if (!integer(text.substr(0, slash), num) || !integer(text.substr(slash + 1), den) || den == 0) return std::nullopt;
    return Rational::make(num, den);
  }
  const auto dot = text.find('.');
  if (dot == std::string::npos) {
    if (!integer(text, num)) return std::nullopt;
    return Rational::make(num, 1);
  }
  const std::string frac = text.substr(dot + 1);
  if (frac.size() > 12) return std::nullopt;
  std::string digits = text.substr(0, dot) + frac;
  if (digits.empty() || digits == "-" || digits == "+") return std::nullopt;
  if (!integer(digits, num)) return std::nullopt;
  for (std::size_t j = 0; j < frac.size(); ++j) den *= 10;
  return Rational::make(num, den);
}

namespace detail {

struct Output {
  fs::path dir;
  json files = json::array();

  void add(const fs::path& path, std::size_t rows) {
    files.push_back({{"file", fs::relative(path, dir).generic_string()}, {"rows", rows}});
  }
};

inline Output open_output(io::Config& cfg, const std::string& fallback) {
  Output out;
  out.dir = cfg.get_string("output.dir", fallback);
  fs::create_directories(out.dir);
  return out;
}

inline ModelParams read_model(io::Config& cfg) {
  const double g = cfg.get_double("model.g", 9.81);
  const double hbar = cfg.get_double("model.hbar", 1.0);
  const double beta = cfg.get_double("model.beta", 2.0 / 15.0);
  return derive_params(g, hbar, beta);
}

inline Grid read_grid(io::Config& cfg) { return make_grid(cfg.get_int("grid.n", 256), cfg.get_double("grid.length", 20.0)); }

inline SimConfig read_sim(io::Config& cfg, const ModelParams& params, const Grid& grid) {
  SimConfig s;
  s.params = params;
  s.grid = grid;
  s.t_end = cfg.get_double("time.t_end");
  s.courant = cfg.get_double("time.courant", 0.3);
  s.dt_min = cfg.get_double("time.dt_min", 1e-9);
  s.gradient_courant = cfg.get_double("time.gradient_courant", 0.05);
  s.max_retries = cfg.get_int("time.max_retries", 10);
  const std::string form = cfg.get_string("time.formulation", "energy_conserving");
  if (form == "energy_conserving") s.form = Formulation::energy_conserving;
  else if (form == "reformulated") s.form = Formulation::reformulated;
  else cfg.fail_key("time.formulation", "expected energy_conserving or reformulated");
  s.snapshot_every = cfg.get_int("output.snapshot_every", 1);
  return s;
}

inline Thresholds read_thresholds(io::Config& cfg, const FluidState& initial, const ModelParams& params,
                                  const Grid& grid) {
  const Thresholds d = default_thresholds(initial, params, grid);
  Thresholds t;
  t.h_floor = cfg.get_double("detect.h_floor", d.h_floor);
  t.u_big = cfg.get_double("detect.u_big", d.u_big);
  t.h_big = cfg.get_double("detect.h_big", d.h_big);
  t.decade_growth = cfg.get_double("detect.decade_growth", d.decade_growth);
  return t;
}

inline SlopeSide read_side(io::Config& cfg) {
  const std::string side = cfg.get_string("blowup.side", "down");
  if (side == "down") return SlopeSide::down;
  if (side == "up") return SlopeSide::up;
  cfg.fail_key("blowup.side", "expected down or up");
}

inline BlowupSetup read_blowup(io::Config& cfg, const ModelParams& params, const Grid& grid) {
  const SlopeSide side = read_side(cfg);
  const double steepness = cfg.get_double("blowup.steepness");
  const double cap = cfg.get_double("blowup.energy_cap", 0.5 * params.energy_threshold);
  return blowup_state(grid, params, steepness, cap, side);
}

inline FluidState read_initial(io::Config& cfg, const ModelParams& params, const Grid& grid, std::uint64_t& seed) {
  const std::string kind = cfg.get_string("init.kind");
  if (kind == "flat") return flat_state(grid, params, cfg.get_double("init.velocity", 0.0));
  if (kind == "gaussian" || kind == "zero_q_gaussian") {
    const double amp = cfg.get_double("init.amplitude");
    const double width = cfg.get_double("init.width");
    const double center = cfg.get_double("init.center", 0.5 * grid.length);
    FluidState s = gaussian_state(grid, params, amp, width, center);
    return kind == "gaussian" ? s : zero_q_state(grid, params, s.h);
  }
  if (kind == "random") {
    const int s = cfg.get_int("init.seed", 0);
    if (s < 0) cfg.fail_key("init.seed", "must be non-negative");
    seed = static_cast<std::uint64_t>(s);
    const double cap = cfg.get_double("init.energy_cap", 0.5 * params.energy_threshold);
    return random_state(grid, params, seed, cap, cfg.get_int("init.bumps", 3));
  }
  if (kind == "blowup") return read_blowup(cfg, params, grid).state;
  cfg.fail_key("init.kind", "expected flat, gaussian, zero_q_gaussian, random or blowup");
}

inline void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline void write_series(Output& out, const Trajectory& traj) {
  io::CsvWriter w(out.dir / "series.csv", {"t", "dt", "total_energy", "min_h", "min_ux", "max_ux", "max_abs_hx",
                                           "norm_R_inf", "max_hx", "min_hx", "mass"});
  for (const SeriesRow& r : traj.series) {
    w.row({r.t, r.dt, r.total_energy, r.ind.min_h, r.ind.min_ux, r.ind.max_ux, r.ind.max_abs_hx, r.ind.norm_R_inf,
           r.ind.max_hx, r.ind.min_hx, r.mass});
  }
  out.add(w.path(), w.rows());
}

inline void write_snapshots(Output& out, io::Config& cfg, const Trajectory& traj, const Grid& grid) {
  if (!cfg.get_bool("output.write_snapshots", true)) return;
  const int stride = cfg.get_int("output.snapshot_stride", 1);
  if (stride < 1) cfg.fail_key("output.snapshot_stride", "must be at least 1");
  const fs::path dir = out.dir / "snapshots";
  fs::create_directories(dir);
  io::CsvWriter index(dir / "index.csv", {"index", "t"});
  const std::size_t count = traj.snapshots.size();
  for (std::size_t k = 0; k < count; ++k) {
    if (k % static_cast<std::size_t>(stride) != 0 && k + 1 != count) continue;
    char name[32];
    std::snprintf(name, sizeof name, "%04zu.csv", k);
    io::CsvWriter w(dir / name, {"x", "h", "u"});
    const FluidState& s = traj.snapshots[k];
    for (std::size_t i = 0; i < grid.size(); ++i) w.row({grid.x(i), s.h[i], s.u[i]});
    out.add(w.path(), w.rows());
    index.row({static_cast<double>(k), s.t});
  }
  out.add(index.path(), index.rows());
}

inline json manifest(const std::string& command, const io::Config& cfg, std::uint64_t seed, const Output& out) {
  json m;
  m["command"] = command;
  m["version"] = version;
  m["seed"] = seed;
  m["config_echo"] = cfg.resolved();
  m["outputs"] = out.files;
  return m;
}

inline json classification_json(const Trajectory& traj) {
  const Classification& c = traj.classification;
  const SeriesRow& start = traj.series[c.decade_start];
  const SeriesRow& last = traj.series.back();
  return {{"start_t", start.t},
          {"start_dt", start.dt},
          {"end_dt", last.dt},
          {"ux_growth", c.ux_growth},
          {"max_hx_growth", c.max_hx_growth},
          {"min_hx_growth", c.min_hx_growth},
          {"diverging_hx_growth", c.hx_growth()}};
}

template <class Body>
int guarded(std::ostream& err, Body body) {
  try {
    return body();
  } catch (const io::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const ParameterDomainError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return exit_infeasible;
  } catch (const OutOfRangeError& e) {
    err << "out of range: " << e.what() << '\n';
    return exit_infeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_instability;
  }
}

inline io::Config load_config(const fs::path& path, const std::optional<fs::path>& out_dir) {
  io::Config cfg = io::Config::load(path);
  if (out_dir) cfg.set("output.dir", out_dir->string());
  return cfg;
}

}  // namespace detail

/// Runs one simulation from a configuration file and writes series, snapshots and a manifest.
inline int cmd_simulate(const fs::path& config_path, const std::optional<fs::path>& out_dir = std::nullopt,
                        std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    io::Config cfg = detail::load_config(config_path, out_dir);
    const ModelParams params = detail::read_model(cfg);
    const Grid grid = detail::read_grid(cfg);
    std::uint64_t seed = 0;
    const FluidState initial = detail::read_initial(cfg, params, grid, seed);
    SimConfig sim = detail::read_sim(cfg, params, grid);
    sim.thresholds = detail::read_thresholds(cfg, initial, params, grid);
    detail::Output out = detail::open_output(cfg, "out/simulate");
    cfg.get_bool("output.write_snapshots", true);
    cfg.get_int("output.snapshot_stride", 1);
    cfg.reject_unused();

    const Trajectory traj = simulate(sim, initial);
    detail::write_series(out, traj);
    detail::write_snapshots(out, cfg, traj, grid);
    for (const std::string& w : traj.warnings) err << "warning: " << w << '\n';

    json m = detail::manifest("simulate", cfg, seed, out);
    m["termination"] = to_string(traj.classification.label);
    m["stopped"] = to_string(traj.termination);
    m["hx_side"] = to_string(traj.classification.side);
    m["steps"] = traj.steps;
    m["warnings"] = traj.warnings;
    if (traj.classification.label == Termination::blowup_suspected) m["final_decade"] = detail::classification_json(traj);
    detail::write_json(out.dir / "manifest.json", m);
    return exit_code(traj.classification.label);
  });
}

/// Tabulates the model and exact phase speeds, optionally measuring them by simulation.
inline int cmd_dispersion(const fs::path& config_path, const std::optional<fs::path>& out_dir = std::nullopt,
                          std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    io::Config cfg = detail::load_config(config_path, out_dir);
    const double g = cfg.get_double("model.g", 9.81);
    const double hbar = cfg.get_double("model.hbar", 1.0);
    const std::vector<std::string> betas = cfg.get_items("model.beta");
    const std::vector<double> beta_values = cfg.get_doubles("model.beta");
    const std::vector<double> khbars = cfg.get_doubles("sweep.khbar");
    const bool measure = cfg.get_bool("measure.enabled", false);
    const int cells = measure ? cfg.get_int("measure.cells_per_wavelength", 64) : 0;
    const double amplitude = measure ? cfg.get_double("measure.amplitude", 1e-6) : 0.0;
    const double courant = measure ? cfg.get_double("measure.courant", 0.5) : 0.0;
    detail::Output out = detail::open_output(cfg, "out/dispersion");
    cfg.reject_unused();

    std::vector<std::string> header = {"beta", "khbar", "msgn", "exact", "rel_error", "c4_model", "c4_exact", "c4_matches"};
    if (measure) {
      header.push_back("measured");
      header.push_back("measured_rel_error");
    }
    io::CsvWriter w(out.dir / "dispersion.csv", header);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t b = 0; b < betas.size(); ++b) {
      const double beta = beta_values[b];
      const SeriesComparison sc = series_coeffs(beta);
      const std::optional<Rational> exact_beta = to_rational(betas[b]);
      const double matches = exact_beta ? (series_c4_exact(*exact_beta) == exact_c4() ? 1.0 : 0.0) : nan;
      for (double kh : khbars) {
        const DispersionPoint d = dispersion_point(kh, beta);
        std::vector<double> row = {beta, kh, d.msgn, d.exact, d.rel_error, sc.model.c4, sc.exact.c4, matches};
        if (measure) {
          double measured = nan, rel = nan;
          if (kh > 0.0 && beta > 0.0) {
            const ModelParams params = derive_params(g, hbar, beta);
            const Grid grid = make_grid(cells, 2.0 * std::numbers::pi * hbar / kh);
            const PhaseSpeedMeasurement m = measure_phase_speed(params, grid, kh, amplitude * hbar, courant);
            measured = m.measured;
            rel = m.rel_error;
          }
          row.push_back(measured);
          row.push_back(rel);
        }
        w.row(row);
      }
    }
    out.add(w.path(), w.rows());
    detail::write_json(out.dir / "manifest.json", detail::manifest("dispersion", cfg, 0, out));
    return static_cast<int>(exit_ok);
  });
}

/// Prints the depth and velocity bounds implied by an energy level as JSON.
inline int cmd_bounds(double energy, double g, double hbar, double beta, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  try {
    const ModelParams params = derive_params(g, hbar, beta);
    try {
      const Bounds b = prop_bounds(energy, params);
      json j = {{"E", energy},         {"h_min", b.h_min}, {"h_max", b.h_max},
                {"u_min", b.u_min},    {"u_max", b.u_max}, {"energy_threshold", params.energy_threshold}};
      out << j.dump(2) << '\n';
      return exit_ok;
    } catch (const OutOfRangeError& e) {
      err << e.what() << '\n';
      out << json{{"E", energy}, {"energy_threshold", params.energy_threshold}, {"error", "energy not below threshold"}}.dump(2)
          << '\n';
      return exit_out_of_range;
    }
  } catch (const ParameterDomainError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  }
}

/**
 * Builds blow-up data with one vanishing gradient family, simulates it, and traces
 * characteristics to check the Riccati dynamics and the bound on the other family.
 */
inline int cmd_blowup(const fs::path& config_path, const std::optional<fs::path>& out_dir = std::nullopt,
                      std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    io::Config cfg = detail::load_config(config_path, out_dir);
    const ModelParams params = detail::read_model(cfg);
    const Grid grid = detail::read_grid(cfg);
    const SlopeSide side = detail::read_side(cfg);
    const double steepness = cfg.get_double("blowup.steepness");
    const double cap = cfg.get_double("blowup.energy_cap", 0.5 * params.energy_threshold);
    const bool trace_paths = cfg.get_bool("blowup.trace_characteristics", true);
    const int bundle_size = cfg.get_int("blowup.paths", 32);
    const int pairs = cfg.get_int("blowup.lemma5_pairs", 15);
    const double fit_fraction = cfg.get_double("blowup.fit_fraction", 0.5);
    if (bundle_size < 1) cfg.fail_key("blowup.paths", "must be at least 1");
    if (pairs < 1) cfg.fail_key("blowup.lemma5_pairs", "must be at least 1");
    SimConfig sim = detail::read_sim(cfg, params, grid);
    const BlowupSetup setup = blowup_state(grid, params, steepness, cap, side);
    sim.thresholds = detail::read_thresholds(cfg, setup.state, params, grid);
    detail::Output out = detail::open_output(cfg, "out/blowup");
    cfg.get_bool("output.write_snapshots", true);
    cfg.get_int("output.snapshot_stride", 1);
    cfg.reject_unused();

    const Trajectory traj = simulate(sim, setup.state);
    detail::write_series(out, traj);
    detail::write_snapshots(out, cfg, traj, grid);
    for (const std::string& w : traj.warnings) err << "warning: " << w << '\n';

    json v;
    v["termination"] = to_string(traj.classification.label);
    v["stopped"] = to_string(traj.termination);
    v["hx_side"] = to_string(traj.classification.side);
    v["side"] = side == SlopeSide::down ? "down" : "up";
    v["horizon"] = sim.t_end;
    v["t_final"] = traj.series.back().t;
    v["steps"] = traj.steps;
    v["final_decade"] = detail::classification_json(traj);
    const Indicators& fin = traj.series.back().ind;
    v["final"] = {{"min_ux", fin.min_ux}, {"max_hx", fin.max_hx}, {"min_hx", fin.min_hx}, {"min_h", fin.min_h}};
    double min_h = std::numeric_limits<double>::infinity();
    for (const SeriesRow& r : traj.series) min_h = std::min(min_h, r.ind.min_h);
    v["min_h"] = min_h;
    const double e0 = traj.series.front().total_energy;
    v["energy_drift"] = (traj.series.back().total_energy - e0) / e0;
    v["initial"] = {{"energy", setup.energy},       {"energy_cap", cap},
                    {"energy_threshold", params.energy_threshold},
                    {"min_gradient", setup.min_p0}, {"amplitude", setup.amplitude},
                    {"ramp_width", setup.ramp_width}, {"steepness", steepness}};

    double min_p = 0.0, max_abs_p = 0.0, min_q = 0.0, max_abs_q = 0.0;
    for (const FluidState& s : traj.snapshots) {
      const RiemannFields f = riemann_fields(s, params, grid);
      min_p = std::min(min_p, min_of(f.P));
      max_abs_p = std::max(max_abs_p, max_abs_of(f.P));
      min_q = std::min(min_q, min_of(f.Q));
      max_abs_q = std::max(max_abs_q, max_abs_of(f.Q));
    }
    v["min_P"] = min_p;
    v["max_abs_P"] = max_abs_p;
    v["min_Q"] = min_q;
    v["max_abs_Q"] = max_abs_q;

    if (trace_paths) {
      const TrajectoryFields F = prepare_fields(traj, params, grid);
      const Family steep = side == SlopeSide::down ? Family::lambda : Family::mu;
      const Family bounded = side == SlopeSide::down ? Family::mu : Family::lambda;
      const Field& g0 = side == SlopeSide::down ? F.P.front() : F.Q.front();
      const std::size_t i0 = static_cast<std::size_t>(std::min_element(g0.begin(), g0.end()) - g0.begin());
      const double x_steep = grid.x(i0);
      const double L = grid.length;
      const CharPath X = trace(F, side == SlopeSide::down ? x_steep : x_steep - 0.5 * L, Family::lambda);
      const CharPath Y = trace(F, side == SlopeSide::down ? x_steep + 0.5 * L : x_steep, Family::mu);

      io::CsvWriter cw(out.dir / "characteristics.csv", {"t", "X", "P_along_X", "Q_along_X", "Y", "P_along_Y", "Q_along_Y"});
      for (std::size_t j = 0; j < X.size(); ++j) {
        cw.row({X.times[j], X.wrapped_position(j, L), X.P[j], X.Q[j], Y.wrapped_position(j, L), Y.P[j], Y.Q[j]});
      }
      out.add(cw.path(), cw.rows());

      if (X.size() >= 3) {
        const RiccatiResidual rx = riccati_residual(X);
        const RiccatiResidual ry = riccati_residual(Y);
        io::CsvWriter rw(out.dir / "riccati_residuals.csv", {"t", "residual_X", "residual_Y"});
        for (std::size_t j = 0; j < rx.times.size(); ++j) rw.row({rx.times[j], rx.residual[j], ry.residual[j]});
        out.add(rw.path(), rw.rows());
      }

      const CharPath& sp = steep == Family::lambda ? X : Y;
      const std::vector<double>& sv = sp.values();
      std::size_t decreasing = 0;
      for (std::size_t j = 1; j < sv.size(); ++j) decreasing += sv[j] < sv[j - 1] ? 1 : 0;
      v["steepest_path"] = {{"family", to_string(steep)},
                            {"origin", sp.origin},
                            {"start", sv.front()},
                            {"end", sv.back()},
                            {"min", *std::min_element(sv.begin(), sv.end())},
                            {"decreasing_fraction", sv.size() > 1 ? double(decreasing) / double(sv.size() - 1) : 1.0},
                            {"wrapped", sp.wrapped}};

      std::vector<CharPath> bundle;
      for (int j = 0; j < bundle_size; ++j) bundle.push_back(trace(F, L * j / bundle_size, bounded));
      const QbReport qb = qb_bound_check(bundle, suggested_c_tilde(F), fit_fraction);
      v["bounded_check"] = {{"family", to_string(bounded)},
                            {"gradient", bounded == Family::mu ? "Q" : "P"},
                            {"paths", bundle_size},
                            {"c_tilde", qb.c_tilde},
                            {"monitor_A", qb.monitor.A},
                            {"monitor_B", qb.monitor.B},
                            {"bound_A", qb.upper.A},
                            {"bound_B", qb.upper.B},
                            {"max_abs", qb.max_abs},
                            {"fraction", qb.fraction},
                            {"worst_margin", qb.worst_margin},
                            {"upper_holds", qb.upper_holds},
                            {"lower_holds", qb.lower_holds}};

      io::CsvWriter lw(out.dir / "lemma5.csv", {"x1", "x2", "meet_time", "integral_Q2_X", "integral_P2_Y", "met"});
      std::vector<double> ts, sums;
      for (int j = 1; j <= pairs; ++j) {
        const double x1 = x_steep;
        const double x2 = x1 + L * j / (pairs + 1);
        const Lemma5Result r = lemma5_integrals(F, x1, x2);
        lw.row({x1, x2, r.meet_time, r.first, r.second, r.met ? 1.0 : 0.0});
        if (r.met) {
          ts.push_back(r.meet_time);
          sums.push_back(r.first + r.second);
        }
      }
      out.add(lw.path(), lw.rows());
      if (!ts.empty()) {
        const LinearBound fit = fit_linear_bound(ts, sums);
        v["lemma5_fit"] = {{"A", fit.A}, {"B", fit.B}, {"pairs_met", ts.size()}};
      } else {
        v["lemma5_fit"] = {{"A", nullptr}, {"B", nullptr}, {"pairs_met", 0}};
      }
    }
    v["warnings"] = traj.warnings;
    detail::write_json(out.dir / "verdict.json", v);
    out.files.push_back({{"file", "verdict.json"}, {"rows", 1}});

    json m = detail::manifest("blowup", cfg, 0, out);
    m["termination"] = v["termination"];
    m["hx_side"] = v["hx_side"];
    detail::write_json(out.dir / "manifest.json", m);
    return exit_code(traj.classification.label);
  });
}

}  // namespace msgn::app
