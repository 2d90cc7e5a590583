#pragma once

// Strang splitting for the first-order system
//   i u_t + u_xx = n u,              n = (n+ + n-)/2
//   i n+-_t -+ A^{1/2} n+- = +- A^{1/2} |u|^2
// Both subflows are integrated exactly: the linear one by unimodular Fourier
// multipliers, the nonlinear one by a pointwise phase rotation of u (n and
// |u|^2 are invariant along it) and a linear-in-time update of n+-.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "zakharov/errors.hpp"
#include "zakharov/functionals.hpp"
#include "zakharov/spectral.hpp"
#include "zakharov/state.hpp"

namespace zakharov {

struct SolverConfig {
  double dt = 1e-3;
  double T = 1.0;
  std::size_t record_stride = 1;
  bool dealias = true;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("SolverConfig: dt must be positive");
    if (!(T >= dt)) throw InvalidArgument("SolverConfig: T must be >= dt");
    if (record_stride < 1) throw InvalidArgument("SolverConfig: record_stride must be >= 1");
  }

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<FirstOrderState> states;
  SolverConfig config;
  GridPtr grid;
  FirstOrderState final_state;
  double final_time = 0.0;

  std::size_t size() const noexcept { return states.size(); }
  /// Spacing between recorded snapshots.
  double sample_dt() const noexcept { return config.dt * static_cast<double>(config.record_stride); }
};

/// u^ <- exp(-i xi^2 tau) u^,  n+-^ <- exp(-+ i |xi| tau) n+-^
inline FirstOrderState linear_flow(const FirstOrderState& f, double tau) {
  auto schroedinger = [tau](double k, std::size_t) { return std::exp(Complex(0.0, -k * k * tau)); };
  auto wave = [tau](double sign) {
    return [tau, sign](double k, std::size_t) { return std::exp(Complex(0.0, -sign * std::abs(k) * tau)); };
  };
  return FirstOrderState{apply_symbol(to_physical(f.u), schroedinger),
                         apply_symbol(to_physical(f.n_plus), wave(1.0)),
                         apply_symbol(to_physical(f.n_minus), wave(-1.0))};
}

/// u <- u exp(-i n tau),  n+- <- n+- -+ i tau A^{1/2} rho,  rho = |u|^2 (2/3-truncated
/// when dealiasing is on).
inline FirstOrderState nonlinear_flow(const FirstOrderState& f, double tau, ProductRule rule = {}) {
  require_conjugacy(f, "nonlinear_flow");
  FirstOrderState out{to_physical(f.u), to_physical(f.n_plus), to_physical(f.n_minus)};
  const Field R = fractional_op(rule.density(out.u), 1.0, ZeroModeRule::zero);
  for (std::size_t j = 0; j < out.u.values.size(); ++j) {
    const double n = 0.5 * (out.n_plus.values[j] + out.n_minus.values[j]).real();
    out.u.values[j] *= std::exp(Complex(0.0, -n * tau));
    const double r = R.values[j].real();
    out.n_plus.values[j] -= Complex(0.0, tau * r);
    out.n_minus.values[j] += Complex(0.0, tau * r);
  }
  return out;
}

/// nonlinear(dt/2) o linear(dt) o nonlinear(dt/2)
inline FirstOrderState strang_step(const FirstOrderState& f, double dt, ProductRule rule = {}) {
  return nonlinear_flow(linear_flow(nonlinear_flow(f, 0.5 * dt, rule), dt), 0.5 * dt, rule);
}

inline bool all_finite(const FirstOrderState& f) {
  for (const Field* p : {&f.u, &f.n_plus, &f.n_minus}) {
    for (const auto& v : p->values) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
  }
  return true;
}

/// 2/3-rule projection of n+- (applied to initial data when dealiasing is on,
/// so that the wave fields stay in the retained band).
inline FirstOrderState project_wave_fields(const FirstOrderState& f) {
  return FirstOrderState{to_physical(f.u), dealias(to_physical(f.n_plus)), dealias(to_physical(f.n_minus))};
}

struct EvolveResult {
  double time = 0.0;
  FirstOrderState state;
};

/// Integrates from t = 0 to round(T/dt) dt and calls on_record(t, state) for
/// t = 0 and every record_stride-th step. on_record may return false to stop
/// early. Returns the last time and state reached.
template <class OnRecord>
EvolveResult evolve(const FirstOrderState& f0, const SolverConfig& cfg, OnRecord&& on_record) {
  cfg.validate();
  require_conjugacy(f0, "solve");
  const ProductRule rule{cfg.dealias};
  EvolveResult r;
  r.state = cfg.dealias ? project_wave_fields(f0)
                        : FirstOrderState{to_physical(f0.u), to_physical(f0.n_plus), to_physical(f0.n_minus)};
  if (!on_record(0.0, std::as_const(r.state))) return r;
  const std::size_t steps = cfg.steps();
  for (std::size_t step = 1; step <= steps; ++step) {
    FirstOrderState next = strang_step(r.state, cfg.dt, rule);
    if (!all_finite(next)) {
      throw BlowUpDetected("solve: non-finite field values", r.time);
    }
    r.state = std::move(next);
    r.time = static_cast<double>(step) * cfg.dt;
    if (step % cfg.record_stride == 0 && !on_record(r.time, std::as_const(r.state))) return r;
  }
  return r;
}

/// Integrates from t = 0 to round(T/dt) dt, keeping every record_stride-th
/// state (t = 0 included).
inline Trajectory solve(const FirstOrderState& f0, const SolverConfig& cfg) {
  Trajectory traj;
  traj.config = cfg;
  traj.grid = f0.u.grid;
  EvolveResult end = evolve(f0, cfg, [&](double t, const FirstOrderState& s) {
    traj.times.push_back(t);
    traj.states.push_back(s);
    return true;
  });
  traj.final_time = end.time;
  traj.final_state = std::move(end.state);
  return traj;
}

}  // namespace zakharov
