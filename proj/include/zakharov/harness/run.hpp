#pragma once

// Subcommand dispatch: load config, run the experiment, write artifacts and the
// manifest, map the outcome to an exit status.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "zakharov/harness/config.hpp"
#include "zakharov/harness/experiments.hpp"
#include "zakharov/harness/io.hpp"

namespace zakharov::harness {

enum ExitStatus : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitBlowUp = 3 };

struct RunOptions {
  std::string subcommand;
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
};

struct Outcome {
  Json results = Json::object();
  std::vector<std::string> failures;
  bool blew_up = false;

  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

namespace detail {

inline Json fit_json(const std::optional<FitResult>& f) {
  if (!f) return nullptr;
  return {{"exponent", f->exponent}, {"intercept", f->intercept}, {"r_squared", f->r_squared}, {"n_points", f->n_points}};
}

inline Json ratio_json(const RatioStats& r) {
  Json scales = Json::array();
  for (const auto& s : r.scales) {
    scales.push_back({{"scale", s.scale}, {"median", s.median}, {"max", s.max}, {"max_over_median", s.max_over_median}});
  }
  return {{"growth_slope_per_octave", r.growth_slope}, {"worst_max_over_median", r.worst_spread}, {"scales", scales}};
}

inline std::string num(double v) { return format_double(v); }

inline Outcome run_experiment(const RunConfig& c, const fs::path& out, std::size_t threads) {
  Outcome o;
  const ExperimentSpec& e = c.experiment;
  const std::string& k = e.kind;
  if (k == "simulate") {
    const SimulateReport r = simulate(c, out);
    o.blew_up = r.blew_up;
    o.results = {{"records", r.records},
                 {"snapshots", r.snapshots},
                 {"final_time", r.final_time},
                 {"mass_relative_drift", r.mass_drift},
                 {"energy_relative_drift", r.energy_drift}};
  } else if (k == "increment-sweep") {
    const SweepTable t = increment_sweep(c, e.Ns, e.window, threads);
    write_sweep(out / "sweep.csv", t);
    o.blew_up = t.blew_up;
    const SweepRow* ctl = t.control();
    o.results = {{"window", t.window},
                 {"reached", t.reached},
                 {"blew_up", t.blew_up},
                 {"spearman", t.spearman},
                 {"fit", fit_json(t.fit)},
                 {"control_abs_dE", ctl ? std::abs(ctl->dE) : kNaN}};
    if (!t.blew_up) {
      o.check(ctl && std::abs(ctl->dE) < e.control_tolerance,
              "control row |dE_I| = " + num(ctl ? std::abs(ctl->dE) : kNaN) + " >= " + num(e.control_tolerance));
      o.check(t.spearman <= e.max_spearman, "Spearman rho " + num(t.spearman) + " > " + num(e.max_spearman));
      o.check(t.fit && t.fit->exponent <= e.max_exponent,
              "fitted N exponent " + num(t.fit ? t.fit->exponent : kNaN) + " > " + num(e.max_exponent));
    }
  } else if (k == "window-scaling") {
    const WindowTable t = window_scaling(c, e.amplitudes, threads);
    write_window(out / "window.csv", t);
    for (const auto& r : t.rows) o.blew_up = o.blew_up || r.status == "blowup";
    o.results = {{"horizon", t.horizon}, {"bound_factor", t.bound_factor}, {"monotone", t.monotone},
                 {"fit", fit_json(t.fit)}};
    o.check(t.monotone, "window length does not decrease across the amplitude list");
  } else if (k == "growth") {
    const GrowthReport r = growth_experiment(c, c.physics.s, c.solver.T);
    write_growth(out / "growth.csv", r);
    o.blew_up = r.blew_up;
    o.results = {{"s", r.s},
                 {"theoretical_exponent", r.theoretical_exponent},
                 {"fitted_exponent", r.fit.exponent},
                 {"r_squared", r.fit.r_squared},
                 {"sigma_initial", r.initial()},
                 {"sigma_peak", r.peak()},
                 {"reached", r.reached}};
    o.check(r.peak() <= 0.0 || r.peak() < e.max_growth * r.initial(),
            "sigma peak " + num(r.peak()) + " >= " + num(e.max_growth) + " x initial " + num(r.initial()));
    o.check(r.fit.exponent <= r.theoretical_exponent + e.slack,
            "envelope exponent " + num(r.fit.exponent) + " > " + num(r.theoretical_exponent + e.slack));
  } else if (k == "cutoff-scaling") {
    const CutoffScalingReport r = cutoff_scaling_run(c);
    write_cutoff(out / "cutoff.csv", r);
    const double target = e.b - e.b_prime;
    o.results = {{"fitted_exponent", r.fit.exponent}, {"target", target}, {"reference_norm", r.reference_norm},
                 {"r_squared", r.fit.r_squared}};
    if (e.source == "singular") {
      o.check(std::abs(r.fit.exponent - target) <= e.tolerance,
              "exponent " + num(r.fit.exponent) + " outside " + num(target) + " +- " + num(e.tolerance));
    } else {
      o.check(r.fit.exponent >= target - e.tolerance,
              "exponent " + num(r.fit.exponent) + " < " + num(target) + " - " + num(e.tolerance));
    }
  } else if (k == "strichartz" || k == "bilinear") {
    const RatioStats r = k == "strichartz" ? strichartz_run(c, threads) : bilinear_run(c, threads);
    write_ratios(out, r);
    o.results = ratio_json(r);
    o.check(r.growth_slope < e.max_slope,
            "growth slope " + num(r.growth_slope) + " per octave >= " + num(e.max_slope));
    o.check(r.worst_spread < e.max_spread, "max/median " + num(r.worst_spread) + " >= " + num(e.max_spread));
  }
  return o;
}

}  // namespace detail

/// Loads the config, applies overrides and checks it matches the subcommand.
inline RunConfig resolve_config(const RunOptions& opt) {
  RunConfig c = load_config(opt.config_path);
  bool known = false;
  for (const auto& k : experiment_kinds()) known = known || k == opt.subcommand;
  if (!known) throw ConfigError("<subcommand>", "unknown subcommand '" + opt.subcommand + "'");
  if (c.experiment.kind != opt.subcommand) {
    throw ConfigError("experiment.kind", "'" + c.experiment.kind + "' does not match subcommand '" + opt.subcommand + "'");
  }
  if (opt.out) c.output.dir = *opt.out;
  if (opt.seed) c.data.seed = *opt.seed;
  if (opt.threads < 1) throw ConfigError("--threads", "must be >= 1");
  validate(c);
  return c;
}

inline int run(const RunOptions& opt, std::ostream& log, std::ostream& err) {
  RunConfig c;
  try {
    c = resolve_config(opt);
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  const fs::path out = c.output.dir;
  Outcome o;
  try {
    fs::create_directories(out);
    o = detail::run_experiment(c, out, opt.threads);
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BlowUpDetected& e) {
    err << "blow-up: " << e.what() << " (last valid t = " << e.last_valid_time() << ")\n";
    o.blew_up = true;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  const int status = o.blew_up ? kExitBlowUp : (o.failures.empty() ? kExitOk : kExitFailure);
  Json manifest;
  manifest["subcommand"] = opt.subcommand;
  manifest["config"] = to_json(c);
  manifest["versions"] = versions();
  manifest["seeds"] = {{"data", c.data.seed}};
  manifest["threads"] = opt.threads;
  manifest["status"] = status == kExitOk ? "ok" : (status == kExitBlowUp ? "blowup" : "failed");
  manifest["failures"] = o.failures;
  manifest["results"] = o.results;
  try {
    write_text(out / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  log << opt.subcommand << ": " << manifest["status"].get<std::string>() << '\n' << o.results.dump(2) << '\n';
  for (const auto& f : o.failures) err << "FAILED: " << f << '\n';
  if (o.blew_up) err << "numerical blow-up detected; partial results written to " << out.string() << '\n';
  return status;
}

}  // namespace zakharov::harness
