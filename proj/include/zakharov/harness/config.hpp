#pragma once

// Run configuration: strict JSON parsing (unknown keys are errors naming the
// key) and serialization that round-trips every field bit-exactly.

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "zakharov/errors.hpp"
#include "zakharov/estimates.hpp"
#include "zakharov/solver.hpp"
#include "zakharov/spectral.hpp"

namespace zakharov::harness {

using Json = nlohmann::ordered_json;

/// Malformed or inconsistent configuration. key() is the dotted path of the
/// offending entry.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : InvalidArgument("config key '" + key + "': " + message), key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"simulate",       "increment-sweep", "window-scaling", "bilinear",
                                                 "strichartz",     "cutoff-scaling",  "growth"};
  return kinds;
}

struct GridParams {
  double L = 2.0 * kPi;
  std::size_t M = 256;
  bool operator==(const GridParams&) const = default;
};

struct PhysicsParams {
  double s = 0.9;
  double N = 4.0;
  double eps = 0.01;
  bool operator==(const PhysicsParams&) const = default;
};

/// generator: "rough" (amp), "soliton" (a, c, x0) or "zero".
struct DataSpec {
  std::string generator = "rough";
  double amp = 1.0;
  double a = 1.0;
  double c = 0.0;
  double x0 = 0.0;
  std::uint64_t seed = 0;
  bool operator==(const DataSpec&) const = default;
};

/// snapshot_stride counts solver steps; 0 writes the initial and final states only.
struct OutputSpec {
  std::string dir = "out";
  std::size_t snapshot_stride = 0;
  bool operator==(const OutputSpec&) const = default;
};

struct ExperimentSpec {
  std::string kind = "simulate";

  // increment-sweep
  std::vector<double> Ns = {8, 16, 32, 64};
  double window = 0.1;
  double control_tolerance = 1e-10;
  double max_spearman = -0.9;
  double max_exponent = -0.1;

  // window-scaling
  std::vector<double> amplitudes = {0, 1, 2, 4};
  double c2 = 1.0;

  // growth
  double slack = 0.5;
  double max_growth = 10.0;

  // cutoff-scaling
  std::string source = "singular";  ///< "singular" or "solver"
  std::string phase = "schrodinger";
  double m = 0.0;
  double b = 0.4;
  double b_prime = 0.2;
  std::vector<double> deltas = {1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125};
  double center = 0.0;
  double sample_dt = 1.0 / 4096.0;
  double alpha_margin = 0.02;
  double tolerance = 0.15;

  // strichartz / bilinear
  double p = 6.0;
  std::string variant = "ws_full";
  std::size_t trials = 50;
  std::size_t octaves = 6;
  int first_octave = 0;
  double window_delta = 0.25;
  std::string profile = "gaussian_bump";
  double eps_b = 0.1;
  double eps_m = 0.01;
  std::vector<int> gaps = {2, 3, 4, 5, 6, 7};
  bool reflect_wave = false;
  bool control = false;
  double max_slope = 0.1;
  double max_spread = 4.0;

  bool operator==(const ExperimentSpec&) const = default;
};

struct RunConfig {
  GridParams grid;
  SolverConfig solver;
  PhysicsParams physics;
  DataSpec data;
  ExperimentSpec experiment;
  OutputSpec output;

  bool operator==(const RunConfig& o) const {
    return grid == o.grid && solver.dt == o.solver.dt && solver.T == o.solver.T &&
           solver.record_stride == o.solver.record_stride && solver.dealias == o.solver.dealias &&
           physics == o.physics && data == o.data && experiment == o.experiment && output == o.output;
  }
};

static_assert(std::is_same_v<std::size_t, std::uint64_t>, "size_t must be 64-bit");

namespace detail {

/// Reads keys of one JSON object and rejects any key left unread.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void read(const std::string& key, double& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(key_path(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(key_path(key), "expected a finite number");
    }
  }

  void read(const std::string& key, bool& out) {
    if (const Json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(key_path(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void read(const std::string& key, std::string& out) {
    if (const Json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(key_path(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void read(const std::string& key, std::uint64_t& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(key_path(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void read(const std::string& key, int& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
      out = v->get<int>();
    }
  }

  template <class T>
  void read(const std::string& key, std::vector<T>& out) {
    if (const Json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(key_path(key), "expected an array");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const Json& e = (*v)[i];
        const std::string where = key_path(key) + "[" + std::to_string(i) + "]";
        if constexpr (std::is_same_v<T, int>) {
          if (!e.is_number_integer()) throw ConfigError(where, "expected an integer");
        } else {
          if (!e.is_number()) throw ConfigError(where, "expected a number");
        }
        out.push_back(e.get<T>());
      }
    }
  }

  ObjectReader child(const std::string& key) {
    const Json* v = find(key);
    static const Json empty = Json::object();
    return ObjectReader(v ? *v : empty, key_path(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(key_path(it.key()), "unknown key");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline bool is_one_of(const std::string& v, std::initializer_list<const char*> options) {
  for (const char* o : options) {
    if (v == o) return true;
  }
  return false;
}

inline void read_experiment(ObjectReader r, ExperimentSpec& e) {
  r.read("kind", e.kind);
  bool known = false;
  for (const auto& k : experiment_kinds()) known = known || k == e.kind;
  if (!known) throw ConfigError(r.key_path("kind"), "unknown experiment '" + e.kind + "'");
  const std::string& k = e.kind;
  if (k == "increment-sweep") {
    r.read("Ns", e.Ns);
    r.read("window", e.window);
    r.read("control_tolerance", e.control_tolerance);
    r.read("max_spearman", e.max_spearman);
    r.read("max_exponent", e.max_exponent);
    r.read("eps_b", e.eps_b);
  } else if (k == "window-scaling") {
    r.read("amplitudes", e.amplitudes);
    r.read("c2", e.c2);
  } else if (k == "growth") {
    r.read("slack", e.slack);
    r.read("max_growth", e.max_growth);
  } else if (k == "cutoff-scaling") {
    r.read("source", e.source);
    r.read("phase", e.phase);
    r.read("m", e.m);
    r.read("b", e.b);
    r.read("b_prime", e.b_prime);
    r.read("deltas", e.deltas);
    r.read("center", e.center);
    r.read("sample_dt", e.sample_dt);
    r.read("alpha_margin", e.alpha_margin);
    r.read("tolerance", e.tolerance);
  } else if (k == "strichartz" || k == "bilinear") {
    if (k == "strichartz") r.read("p", e.p);
    if (k == "bilinear") {
      r.read("variant", e.variant);
      r.read("eps_m", e.eps_m);
      r.read("gaps", e.gaps);
      r.read("reflect_wave", e.reflect_wave);
      r.read("control", e.control);
    }
    r.read("trials", e.trials);
    r.read("octaves", e.octaves);
    r.read("first_octave", e.first_octave);
    r.read("window_delta", e.window_delta);
    r.read("profile", e.profile);
    r.read("eps_b", e.eps_b);
    r.read("max_slope", e.max_slope);
    r.read("max_spread", e.max_spread);
  }
  r.finish();
}

}  // namespace detail

/// Domain checks that do not need the solver to run.
inline void validate(const RunConfig& c) {
  if (!(c.grid.L > 0.0)) throw ConfigError("grid.L", "must be positive");
  if (c.grid.M < 4 || c.grid.M % 2 != 0) throw ConfigError("grid.M", "must be an even integer >= 4");
  if (!(c.solver.dt > 0.0)) throw ConfigError("solver.dt", "must be positive");
  if (!(c.solver.T >= c.solver.dt)) throw ConfigError("solver.T", "must be >= solver.dt");
  if (c.solver.record_stride < 1) throw ConfigError("solver.record_stride", "must be >= 1");
  if (!(c.physics.s > 0.5 && c.physics.s <= 1.0)) throw ConfigError("physics.s", "must lie in (1/2, 1]");
  if (!(c.physics.N > 0.0)) throw ConfigError("physics.N", "must be positive");
  if (!(c.physics.eps > 0.0)) throw ConfigError("physics.eps", "must be positive");
  if (!detail::is_one_of(c.data.generator, {"rough", "soliton", "zero"})) {
    throw ConfigError("data.generator", "must be one of rough, soliton, zero");
  }
  if (c.output.dir.empty()) throw ConfigError("output.dir", "must not be empty");
  if (c.output.snapshot_stride % c.solver.record_stride != 0) {
    throw ConfigError("output.snapshot_stride", "must be a multiple of solver.record_stride");
  }
  const ExperimentSpec& e = c.experiment;
  if (e.kind == "cutoff-scaling") {
    if (!detail::is_one_of(e.source, {"singular", "solver"})) {
      throw ConfigError("experiment.source", "must be singular or solver");
    }
    if (!detail::is_one_of(e.phase, {"schrodinger", "wave_plus", "wave_minus"})) {
      throw ConfigError("experiment.phase", "must be schrodinger, wave_plus or wave_minus");
    }
  }
  if (e.kind == "strichartz" || e.kind == "bilinear") {
    if (!detail::is_one_of(e.profile, {"gaussian_bump", "random_band"})) {
      throw ConfigError("experiment.profile", "must be gaussian_bump or random_band");
    }
    if (e.trials < 1) throw ConfigError("experiment.trials", "must be >= 1");
    if (e.octaves < 3) throw ConfigError("experiment.octaves", "must be >= 3");
  }
  if (e.kind == "bilinear" &&
      !detail::is_one_of(e.variant, {"ws_full", "ws_endpoint_schrodinger", "ws_endpoint_both", "ss_full",
                                     "ss_endpoint_both"})) {
    throw ConfigError("experiment.variant",
                      "must be ws_full, ws_endpoint_schrodinger, ws_endpoint_both, ss_full or ss_endpoint_both");
  }
  if (e.kind == "increment-sweep") {
    if (e.Ns.size() < 3) throw ConfigError("experiment.Ns", "need at least three values");
    if (!(e.window >= c.solver.dt)) throw ConfigError("experiment.window", "must be >= solver.dt");
    const double nyquist = static_cast<double>(c.grid.M / 2) * 2.0 * kPi / c.grid.L;
    for (double N : e.Ns) {
      if (!(N > 0.0) || !(N < nyquist / 2.0)) {
        throw ConfigError("experiment.Ns", "every N must lie in (0, Nyquist/2)");
      }
    }
  }
  if (e.kind == "window-scaling") {
    if (e.amplitudes.empty()) throw ConfigError("experiment.amplitudes", "must not be empty");
    for (double a : e.amplitudes) {
      if (!(a >= 0.0)) throw ConfigError("experiment.amplitudes", "must be non-negative");
    }
    if (!(e.c2 > 0.0)) throw ConfigError("experiment.c2", "must be positive");
  }
}

inline RunConfig parse_config(const Json& j) {
  RunConfig c;
  detail::ObjectReader root(j, "");
  {
    auto r = root.child("grid");
    r.read("L", c.grid.L);
    r.read("M", c.grid.M);
    r.finish();
  }
  {
    auto r = root.child("solver");
    r.read("dt", c.solver.dt);
    r.read("T", c.solver.T);
    r.read("record_stride", c.solver.record_stride);
    r.read("dealias", c.solver.dealias);
    r.finish();
  }
  {
    auto r = root.child("physics");
    r.read("s", c.physics.s);
    r.read("N", c.physics.N);
    r.read("eps", c.physics.eps);
    r.finish();
  }
  {
    auto r = root.child("data");
    r.read("generator", c.data.generator);
    r.read("seed", c.data.seed);
    auto p = r.child("params");
    if (c.data.generator == "rough") {
      p.read("amp", c.data.amp);
    } else if (c.data.generator == "soliton") {
      p.read("a", c.data.a);
      p.read("c", c.data.c);
      p.read("x0", c.data.x0);
    }
    p.finish();
    r.finish();
  }
  detail::read_experiment(root.child("experiment"), c.experiment);
  {
    auto r = root.child("output");
    r.read("dir", c.output.dir);
    r.read("snapshot_stride", c.output.snapshot_stride);
    r.finish();
  }
  root.finish();
  validate(c);
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("<document>", std::string("JSON syntax error: ") + e.what());
  }
  return parse_config(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<document>", "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

inline Json to_json(const RunConfig& c) {
  Json j;
  j["grid"] = {{"L", c.grid.L}, {"M", c.grid.M}};
  j["solver"] = {{"dt", c.solver.dt},
                 {"T", c.solver.T},
                 {"record_stride", c.solver.record_stride},
                 {"dealias", c.solver.dealias}};
  j["physics"] = {{"s", c.physics.s}, {"N", c.physics.N}, {"eps", c.physics.eps}};
  Json params = Json::object();
  if (c.data.generator == "rough") params["amp"] = c.data.amp;
  if (c.data.generator == "soliton") params = {{"a", c.data.a}, {"c", c.data.c}, {"x0", c.data.x0}};
  j["data"] = {{"generator", c.data.generator}, {"seed", c.data.seed}, {"params", params}};
  const ExperimentSpec& e = c.experiment;
  Json x = {{"kind", e.kind}};
  if (e.kind == "increment-sweep") {
    x["Ns"] = e.Ns;
    x["window"] = e.window;
    x["control_tolerance"] = e.control_tolerance;
    x["max_spearman"] = e.max_spearman;
    x["max_exponent"] = e.max_exponent;
    x["eps_b"] = e.eps_b;
  } else if (e.kind == "window-scaling") {
    x["amplitudes"] = e.amplitudes;
    x["c2"] = e.c2;
  } else if (e.kind == "growth") {
    x["slack"] = e.slack;
    x["max_growth"] = e.max_growth;
  } else if (e.kind == "cutoff-scaling") {
    x["source"] = e.source;
    x["phase"] = e.phase;
    x["m"] = e.m;
    x["b"] = e.b;
    x["b_prime"] = e.b_prime;
    x["deltas"] = e.deltas;
    x["center"] = e.center;
    x["sample_dt"] = e.sample_dt;
    x["alpha_margin"] = e.alpha_margin;
    x["tolerance"] = e.tolerance;
  } else if (e.kind == "strichartz" || e.kind == "bilinear") {
    if (e.kind == "strichartz") x["p"] = e.p;
    if (e.kind == "bilinear") {
      x["variant"] = e.variant;
      x["eps_m"] = e.eps_m;
      x["gaps"] = e.gaps;
      x["reflect_wave"] = e.reflect_wave;
      x["control"] = e.control;
    }
    x["trials"] = e.trials;
    x["octaves"] = e.octaves;
    x["first_octave"] = e.first_octave;
    x["window_delta"] = e.window_delta;
    x["profile"] = e.profile;
    x["eps_b"] = e.eps_b;
    x["max_slope"] = e.max_slope;
    x["max_spread"] = e.max_spread;
  }
  j["experiment"] = x;
  j["output"] = {{"dir", c.output.dir}, {"snapshot_stride", c.output.snapshot_stride}};
  return j;
}

inline std::string serialize(const RunConfig& c) { return to_json(c).dump(2); }

inline EnsembleSpec ensemble_spec(const RunConfig& c, std::size_t threads) {
  const ExperimentSpec& e = c.experiment;
  EnsembleSpec s;
  s.trials = e.trials;
  s.octaves = e.octaves;
  s.first_octave = e.first_octave;
  s.seed = c.data.seed;
  s.window_delta = e.window_delta;
  s.profile = e.profile == "random_band" ? Profile::random_band : Profile::gaussian_bump;
  s.threads = threads;
  s.eps_b = e.eps_b;
  s.eps_m = e.eps_m;
  return s;
}

}  // namespace zakharov::harness
