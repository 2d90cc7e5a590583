#pragma once

// Experiment drivers. Each returns a report struct; the write_* helpers turn
// reports into CSV tables.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "zakharov/estimates.hpp"
#include "zakharov/fit.hpp"
#include "zakharov/functionals.hpp"
#include "zakharov/harness/config.hpp"
#include "zakharov/harness/io.hpp"
#include "zakharov/imethod.hpp"
#include "zakharov/solver.hpp"
#include "zakharov/state.hpp"

namespace zakharov::harness {

namespace fs = std::filesystem;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline GridPtr grid_of(const RunConfig& c) { return make_grid(c.grid.L, c.grid.M); }

/// Initial data described by cfg.data on cfg's grid.
inline FirstOrderState initial_state(const RunConfig& c) {
  const GridPtr g = grid_of(c);
  if (c.data.generator == "soliton") {
    return to_first_order(soliton_state(g, SolitonParams{c.data.a, c.data.c, c.data.x0}));
  }
  if (c.data.generator == "zero") return FirstOrderState{Field::zeros(g), Field::zeros(g), Field::zeros(g)};
  return to_first_order(sample_rough_data(g, RoughDataParams{c.physics.s, c.physics.eps, c.data.amp, c.data.seed}));
}

inline FirstOrderState scaled(const FirstOrderState& f, double a) {
  return FirstOrderState{Complex(a) * f.u, Complex(a) * f.n_plus, Complex(a) * f.n_minus};
}

inline ProductRule rule_of(const RunConfig& c) { return ProductRule{c.solver.dealias}; }

/// Trapezoid rule on possibly nonuniform samples.
inline double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t j = 1; j < t.size(); ++j) acc += 0.5 * (t[j] - t[j - 1]) * (y[j] + y[j - 1]);
  return acc;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateReport {
  std::size_t records = 0;
  std::size_t snapshots = 0;
  double final_time = 0.0;
  double mass_drift = 0.0;    ///< |mass(T) - mass(0)| / mass(0)
  double energy_drift = 0.0;  ///< |E(T) - E(0)| / |E(0)| with E = energy_plus(u, n+)
  bool blew_up = false;
};

/// Writes out/diagnostics.csv and out/snapshots/step_XXXXXXXXXX.zsnap
/// (t = 0, every snapshot_stride steps, and the final state).
inline SimulateReport simulate(const RunConfig& c, const fs::path& out) {
  fs::create_directories(out / "snapshots");
  const FirstOrderState f0 = initial_state(c);
  const Multiplier I = make_multiplier(f0.u.grid, c.physics.N, c.physics.s);
  const ProductRule rule = rule_of(c);
  CsvWriter csv(out / "diagnostics.csv", diagnostics_columns());
  SimulateReport r;
  double m0 = 0.0, e0 = 0.0;
  std::size_t step = 0;
  auto snapshot = [&](std::size_t at, double t, const FirstOrderState& s) {
    char name[64];
    std::snprintf(name, sizeof(name), "step_%010zu.zsnap", at);
    write_snapshot(out / "snapshots" / name, make_snapshot(s, t, c.physics.s, c.physics.N));
    ++r.snapshots;
  };
  std::size_t last_snap = std::numeric_limits<std::size_t>::max();
  try {
    const EvolveResult end = evolve(f0, c.solver, [&](double t, const FirstOrderState& s) {
      if (r.records == 0) {
        m0 = mass(s.u);
        e0 = energy_plus(s.u, s.n_plus);
      }
      csv.row(diagnostics_row(t, s, I, rule, c.physics.s));
      const bool due = step == 0 || (c.output.snapshot_stride > 0 && step % c.output.snapshot_stride == 0);
      if (due) {
        snapshot(step, t, s);
        last_snap = step;
      }
      ++r.records;
      step += c.solver.record_stride;
      return true;
    });
    const std::size_t final_step = c.solver.steps();
    if (last_snap != final_step) snapshot(final_step, end.time, end.state);
    r.final_time = end.time;
    r.mass_drift = m0 > 0.0 ? std::abs(mass(end.state.u) - m0) / m0 : 0.0;
    r.energy_drift = e0 != 0.0 ? std::abs(energy_plus(end.state.u, end.state.n_plus) - e0) / std::abs(e0) : 0.0;
  } catch (const BlowUpDetected& e) {
    r.blew_up = true;
    r.final_time = e.last_valid_time();
  }
  return r;
}

// ---------------------------------------------------------------------------
// increment-sweep

struct SweepRow {
  double N = 0.0;
  bool control = false;  ///< N at Nyquist, so I = identity
  double dE = 0.0;       ///< E_I(end) - E_I(start)
  std::array<double, 3> integrated_flux{};  ///< int |flux_18|, |flux_19|, |flux_20| dt
  double x_Iu = kNaN;        ///< ||Iu||_{X^{1,1/2+}_S}
  double x_In_plus = kNaN;   ///< ||In+||_{X^{0,1/2+}_{W+}}
  double x_In_minus = kNaN;  ///< ||In-||_{X^{0,1/2+}_{W-}}
};

struct SweepTable {
  std::vector<SweepRow> rows;
  double window = 0.0;
  double reached = 0.0;
  bool blew_up = false;
  std::optional<FitResult> fit;  ///< |dE| against N over non-control rows
  double spearman = kNaN;

  const SweepRow* control() const {
    for (const auto& r : rows) {
      if (r.control) return &r;
    }
    return nullptr;
  }
};

/// One trajectory on [0, window] (the dynamics do not depend on N); each row
/// evaluates the I_N functionals on it. A control row at N = Nyquist is appended.
inline SweepTable increment_sweep(const RunConfig& c, std::span<const double> Ns, double window,
                                  std::size_t threads = 1) {
  const double nyquist = grid_of(c)->nyquist();
  for (double N : Ns) {
    if (!(N > 0.0) || !(N < nyquist / 2.0)) throw InvalidArgument("increment_sweep: every N must lie below Nyquist/2");
  }
  SolverConfig sc = c.solver;
  sc.T = window;
  const FirstOrderState f0 = initial_state(c);
  const GridPtr g = f0.u.grid;
  std::vector<double> times;
  std::vector<FirstOrderState> states;
  SweepTable table;
  table.window = window;
  try {
    EvolveResult end = evolve(f0, sc, [&](double t, const FirstOrderState& s) {
      times.push_back(t);
      states.push_back(s);
      return true;
    });
    if (end.time > times.back()) {
      times.push_back(end.time);
      states.push_back(std::move(end.state));
    }
  } catch (const BlowUpDetected&) {
    table.blew_up = true;
  }
  table.reached = times.empty() ? 0.0 : times.back();

  std::vector<double> all(Ns.begin(), Ns.end());
  all.push_back(nyquist);
  table.rows.resize(all.size());
  if (states.size() < 2) return table;

  std::vector<std::array<Field, 3>> hats;
  hats.reserve(states.size());
  for (const auto& s : states) hats.push_back({to_spectral(s.u), to_spectral(s.n_plus), to_spectral(s.n_minus)});
  std::optional<CutoffWindow> cut;
  try {
    cut = make_cutoff(0.25 * table.reached, times, 0.5 * table.reached);
  } catch (const InvalidArgument&) {
    cut.reset();
  }
  const double eps_b = c.experiment.eps_b;
  const ProductRule rule = rule_of(c);

  zakharov::detail::parallel_for(all.size(), threads, [&](std::size_t i) {
    SweepRow& row = table.rows[i];
    row.N = all[i];
    row.control = i + 1 == all.size();
    const Multiplier I = make_multiplier(g, row.N, c.physics.s);
    row.dE = modified_energy(states.back(), I) - modified_energy(states.front(), I);
    std::array<std::vector<double>, 3> mags;
    for (const auto& s : states) {
      const auto parts = flux_components(s, I, rule);
      for (int k = 0; k < 3; ++k) mags[k].push_back(std::abs(parts[k]));
    }
    for (int k = 0; k < 3; ++k) row.integrated_flux[k] = trapezoid(times, mags[k]);
    if (!cut) return;
    const auto sym = I.symbol();
    auto norm = [&](int comp, double m, Phase phase) {
      SpaceTimeField f;
      f.grid = g;
      f.times = times;
      f.slots.resize(g->size());
      f.series.assign(g->size(), ComplexVector(times.size()));
      for (std::size_t k = 0; k < g->size(); ++k) {
        f.slots[k] = k;
        for (std::size_t j = 0; j < times.size(); ++j) f.series[k][j] = sym[k] * hats[j][comp].values[k];
      }
      return xsb_norm(f, NormSpec{m, 0.5 + eps_b, phase}, *cut);
    };
    row.x_Iu = norm(0, 1.0, Phase::schrodinger);
    row.x_In_plus = norm(1, 0.0, Phase::wave_plus);
    row.x_In_minus = norm(2, 0.0, Phase::wave_minus);
  });

  std::vector<double> xs, ys;
  for (const auto& r : table.rows) {
    if (r.control) continue;
    xs.push_back(r.N);
    ys.push_back(std::abs(r.dE));
  }
  table.spearman = spearman(xs, ys);
  if (std::all_of(ys.begin(), ys.end(), [](double y) { return y > 0.0; })) table.fit = fit_power_law(xs, ys);
  return table;
}

inline void write_sweep(const fs::path& path, const SweepTable& t) {
  CsvWriter csv(path, {"N", "control", "dE_I", "abs_dE_I", "int_abs_flux_18", "int_abs_flux_19", "int_abs_flux_20",
                       "X_Iu", "X_In_plus", "X_In_minus", "reached", "blew_up"});
  for (const auto& r : t.rows) {
    csv.row({r.N, r.control ? 1 : 0, r.dE, std::abs(r.dE), r.integrated_flux[0], r.integrated_flux[1],
             r.integrated_flux[2], r.x_Iu, r.x_In_plus, r.x_In_minus, t.reached, t.blew_up ? 1 : 0});
  }
}

// ---------------------------------------------------------------------------
// window-scaling

struct WindowRow {
  double amplitude = 0.0;
  double data_norm = 0.0;  ///< ||Iu0||_{H^1} + ||In+0||_{L^2} + ||In-0||_{L^2}
  double W = 0.0;
  std::string status;  ///< resolved | horizon | unresolved | blowup
};

struct WindowTable {
  std::vector<WindowRow> rows;
  double horizon = 0.0;
  double bound_factor = 0.0;  ///< 2 c2
  std::optional<FitResult> fit;  ///< W against data norm over resolved rows
  bool monotone = true;
};

/// For each amplitude a, data a * (cfg draw); W is the largest recorded time
/// such that ||Iu(t)||_{H^1} <= 2 c2 (data norm) on [0, W], found by bisection
/// on the recorded samples up to the first violation.
inline WindowTable window_scaling(const RunConfig& c, std::span<const double> amplitudes, std::size_t threads = 1) {
  const FirstOrderState base = initial_state(c);
  const Multiplier I = make_multiplier(base.u.grid, c.physics.N, c.physics.s);
  WindowTable table;
  table.horizon = c.solver.steps() * c.solver.dt;
  table.bound_factor = 2.0 * c.experiment.c2;
  table.rows.resize(amplitudes.size());
  zakharov::detail::parallel_for(amplitudes.size(), threads, [&](std::size_t i) {
    WindowRow& row = table.rows[i];
    row.amplitude = amplitudes[i];
    FirstOrderState f = scaled(base, row.amplitude);
    if (c.solver.dealias) f = project_wave_fields(f);
    auto iu = [&](const FirstOrderState& s) { return sobolev_norm(apply_I(s.u, I), 1.0); };
    row.data_norm = iu(f) + l2_norm(apply_I(f.n_plus, I)) + l2_norm(apply_I(f.n_minus, I));
    const double bound = table.bound_factor * row.data_norm;
    std::vector<double> t, q;
    bool violated = false;
    try {
      const EvolveResult end = evolve(f, c.solver, [&](double time, const FirstOrderState& s) {
        t.push_back(time);
        q.push_back(iu(s));
        violated = q.back() > bound;
        return !violated;
      });
      (void)end;
    } catch (const BlowUpDetected&) {
      row.status = "blowup";
      row.W = t.empty() ? 0.0 : t.back();
      return;
    }
    if (!violated) {
      row.W = t.back();
      row.status = "horizon";
      return;
    }
    // Running maximum makes the predicate monotone in the sample index.
    for (std::size_t j = 1; j < q.size(); ++j) q[j] = std::max(q[j], q[j - 1]);
    if (q.front() > bound) {
      row.status = "unresolved";
      row.W = 0.0;
      return;
    }
    std::size_t lo = 0, hi = q.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      (q[mid] <= bound ? lo : hi) = mid;
    }
    row.W = t[lo];
    row.status = lo == 0 ? "unresolved" : "resolved";
  });

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    if (i > 0) {
      const auto& p = table.rows[i - 1];
      const bool both_horizon = p.status == "horizon" && r.status == "horizon";
      if (!(both_horizon ? r.W <= p.W : r.W < p.W)) table.monotone = false;
    }
    if (r.status == "resolved" && r.data_norm > 0.0) {
      xs.push_back(r.data_norm);
      ys.push_back(r.W);
    }
  }
  if (xs.size() >= 3) table.fit = fit_power_law(xs, ys);
  return table;
}

inline void write_window(const fs::path& path, const WindowTable& t) {
  CsvWriter csv(path, {"amplitude", "data_norm", "bound", "W", "status"});
  for (const auto& r : t.rows) csv.row({r.amplitude, r.data_norm, t.bound_factor * r.data_norm, r.W, r.status});
}

// ---------------------------------------------------------------------------
// growth

/// 2(1 - s)/(6s - 5)
inline double growth_exponent_bound(double s) { return 2.0 * (1.0 - s) / (6.0 * s - 5.0); }

struct GrowthReport {
  double s = 0.0;
  double theoretical_exponent = 0.0;
  std::vector<double> times;
  std::vector<double> sigma;     ///< ||u||_{H^s} + ||n||_{H^{s-1}} + ||v||_{H^{s-1}}
  std::vector<double> envelope;  ///< running maximum of sigma
  FitResult fit;                 ///< envelope against 1 + t
  bool blew_up = false;
  double reached = 0.0;

  double initial() const { return sigma.empty() ? 0.0 : sigma.front(); }
  double peak() const { return envelope.empty() ? 0.0 : envelope.back(); }
};

inline GrowthReport growth_experiment(const RunConfig& c, double s, double T) {
  if (!(s > 5.0 / 6.0 && s < 1.0)) {
    throw InvalidArgument("growth_experiment: requires 5/6 < s < 1 (the growth exponent needs 6s - 5 > 0, i.e. s > 5/6)");
  }
  RunConfig rc = c;
  rc.physics.s = s;
  SolverConfig sc = c.solver;
  sc.T = T;
  GrowthReport r;
  r.s = s;
  r.theoretical_exponent = growth_exponent_bound(s);
  const FirstOrderState f0 = initial_state(rc);
  try {
    evolve(f0, sc, [&](double t, const FirstOrderState& st) {
      const ZakharovState z = from_first_order(st);
      const double v = sobolev_norm(z.u, s) + sobolev_norm(z.n, s - 1.0) + sobolev_norm(z.v, s - 1.0);
      r.times.push_back(t);
      r.sigma.push_back(v);
      r.envelope.push_back(r.envelope.empty() ? v : std::max(v, r.envelope.back()));
      return true;
    });
  } catch (const BlowUpDetected&) {
    r.blew_up = true;
  }
  r.reached = r.times.empty() ? 0.0 : r.times.back();
  if (r.peak() == 0.0) {
    r.fit = FitResult{0.0, 0.0, 1.0, r.times.size()};
  } else if (r.times.size() >= 3) {
    std::vector<double> x(r.times.size());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = 1.0 + r.times[j];
    r.fit = fit_power_law(x, r.envelope);
  }
  return r;
}

inline void write_growth(const fs::path& path, const GrowthReport& r) {
  CsvWriter csv(path, {"t", "sigma", "envelope"});
  for (std::size_t j = 0; j < r.times.size(); ++j) csv.row({r.times[j], r.sigma[j], r.envelope[j]});
}

// ---------------------------------------------------------------------------
// cutoff-scaling

inline Phase parse_phase(const std::string& p) {
  if (p == "wave_plus") return Phase::wave_plus;
  if (p == "wave_minus") return Phase::wave_minus;
  return Phase::schrodinger;
}

/// source "singular": extremal profile |t - center|^{-alpha}, alpha = 1/2 - b - margin.
/// source "solver": the cfg trajectory, windows centered at experiment.center.
inline CutoffScalingReport cutoff_scaling_run(const RunConfig& c) {
  const ExperimentSpec& e = c.experiment;
  const Phase phase = parse_phase(e.phase);
  const double dmax = *std::max_element(e.deltas.begin(), e.deltas.end());
  if (e.source == "singular") {
    const SpaceTimeField f = singular_profile(0.5 - e.b - e.alpha_margin, 4.0 * dmax + 0.5, e.sample_dt, phase, e.center);
    return cutoff_scaling(f, e.m, e.b, e.b_prime, e.deltas, phase, e.center);
  }
  const Trajectory tr = solve(initial_state(c), c.solver);
  return cutoff_scaling(space_time_field(tr, component_of(phase)), e.m, e.b, e.b_prime, e.deltas, phase, e.center);
}

inline void write_cutoff(const fs::path& path, const CutoffScalingReport& r) {
  CsvWriter csv(path, {"delta", "norm"});
  for (std::size_t i = 0; i < r.deltas.size(); ++i) csv.row({r.deltas[i], r.norms[i]});
}

// ---------------------------------------------------------------------------
// strichartz / bilinear

inline RatioStats strichartz_run(const RunConfig& c, std::size_t threads = 1) {
  return strichartz_ratio(ensemble_spec(c, threads), c.experiment.p);
}

inline RatioStats bilinear_run(const RunConfig& c, std::size_t threads = 1) {
  const ExperimentSpec& e = c.experiment;
  const EnsembleSpec spec = ensemble_spec(c, threads);
  if (e.variant.rfind("ss_", 0) == 0) {
    SsOptions o;
    o.variant = e.variant == "ss_endpoint_both" ? SsVariant::endpoint_both : SsVariant::full_modulation;
    o.gaps = e.gaps;
    o.control = e.control;
    return bilinear_ss_ratio(spec, o);
  }
  WsOptions o;
  o.variant = e.variant == "ws_endpoint_schrodinger" ? WsVariant::endpoint_schrodinger
              : e.variant == "ws_endpoint_both"      ? WsVariant::endpoint_both
                                                     : WsVariant::full_modulation;
  o.reflect_wave = e.reflect_wave;
  return bilinear_ws_ratio(spec, o);
}

inline void write_ratios(const fs::path& dir, const RatioStats& r) {
  CsvWriter all(dir / "ratios.csv", {"scale", "trial", "ratio"});
  CsvWriter sum(dir / "summary.csv", {"scale", "median", "max", "max_over_median"});
  for (const auto& s : r.scales) {
    for (std::size_t i = 0; i < s.ratios.size(); ++i) all.row({s.scale, i, s.ratios[i]});
    sum.row({s.scale, s.median, s.max, s.max_over_median});
  }
}

}  // namespace zakharov::harness
