#pragma once

// Windowed space-time restriction norms X^{m,b}_phi, Y^m_phi and empirical
// testers for the time-cutoff scaling bound, the L^p Strichartz bound and the
// wave-Schroedinger / Schroedinger-Schroedinger bilinear estimates.
//
// Norm convention: for a field sampled at uniform times t_j, each Fourier
// mode is moved to the interaction picture g_k(t) = exp(i phi(xi_k) t) f_k(t),
// multiplied by the cutoff psi_delta, zero-padded (at least x4) and
// transformed in time. With sigma = tau + phi(xi) and measure d sigma / 2 pi,
//   ||f||_X^2 = L sum_k <xi_k>^{2m} int <sigma>^{2b} |G_k(sigma)|^2 d sigma / 2 pi
//   ||f||_Y^2 = L sum_k <xi_k>^{2m} (int <sigma>^{-1} |G_k(sigma)| d sigma / 2 pi)^2

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "zakharov/errors.hpp"
#include "zakharov/fit.hpp"
#include "zakharov/imethod.hpp"
#include "zakharov/solver.hpp"
#include "zakharov/spectral.hpp"

namespace zakharov {

enum class Phase { schrodinger, wave_plus, wave_minus };

/// phi(xi): xi^2, |xi| or -|xi|.
inline double dispersion(Phase p, double xi) {
  switch (p) {
    case Phase::schrodinger:
      return xi * xi;
    case Phase::wave_plus:
      return std::abs(xi);
    case Phase::wave_minus:
      return -std::abs(xi);
  }
  return 0.0;
}

enum class NormKind { X, Y };

struct NormSpec {
  double m = 0.0;
  double b = 0.0;  ///< unused for kind Y
  Phase phase = Phase::schrodinger;
  NormKind kind = NormKind::X;
  double eps_b = 0.1;
  double eps_m = 0.01;

  void validate() const {
    if (!(eps_b > 0.0) || !(eps_m > 0.0)) throw InvalidArgument("NormSpec: eps values must be positive");
    if (!std::isfinite(m) || !std::isfinite(b)) throw InvalidArgument("NormSpec: orders must be finite");
  }
};

// ---------------------------------------------------------------------------
// Space-time samples

/// Fourier coefficients of the active modes at uniform times, stored mode-major:
/// series[i][j] is the coefficient of grid slot slots[i] at times[j].
struct SpaceTimeField {
  GridPtr grid;
  std::vector<double> times;
  std::vector<std::size_t> slots;
  std::vector<ComplexVector> series;
};

enum class Component { u, n_plus, n_minus };

inline Component component_of(Phase p) {
  switch (p) {
    case Phase::schrodinger:
      return Component::u;
    case Phase::wave_plus:
      return Component::n_plus;
    case Phase::wave_minus:
      return Component::n_minus;
  }
  return Component::u;
}

/// All modes of one component of a recorded trajectory.
inline SpaceTimeField space_time_field(const Trajectory& traj, Component c) {
  if (traj.states.empty()) throw InvalidArgument("space_time_field: empty trajectory");
  SpaceTimeField f;
  f.grid = traj.grid;
  f.times = traj.times;
  const std::size_t M = f.grid->size();
  f.slots.resize(M);
  for (std::size_t i = 0; i < M; ++i) f.slots[i] = i;
  f.series.assign(M, ComplexVector(traj.times.size()));
  for (std::size_t j = 0; j < traj.states.size(); ++j) {
    const FirstOrderState& s = traj.states[j];
    const Field& src = c == Component::u ? s.u : (c == Component::n_plus ? s.n_plus : s.n_minus);
    const Field hat = to_spectral(src);
    for (std::size_t i = 0; i < M; ++i) f.series[i][j] = hat.values[i];
  }
  return f;
}

/// Fourier modes of a torus field kept as a sparse list of integer wave
/// indices (xi = k 2 pi / L).
struct SparseSpectrum {
  double length = 2.0 * kPi;
  std::vector<long> modes;
  ComplexVector coeffs;

  double dk() const { return 2.0 * kPi / length; }
  double xi(std::size_t i) const { return static_cast<double>(modes[i]) * dk(); }
  long max_abs_mode() const {
    long k = 0;
    for (long m : modes) k = std::max(k, std::abs(m));
    return k;
  }
  /// L^2 norm, L sum |c_k|^2.
  double l2() const {
    double s = 0.0;
    for (const auto& c : coeffs) s += std::norm(c);
    return std::sqrt(length * s);
  }
};

/// Smallest even grid holding every mode strictly below Nyquist.
inline GridPtr grid_for(const SparseSpectrum& s, long extra_modes = 0) {
  const auto M = static_cast<std::size_t>(2 * (s.max_abs_mode() + extra_modes + 1));
  return make_grid(s.length, std::max<std::size_t>(M, 4));
}

/// Real-valued temporal modulation 1 + beta sin(omega t + phase).
struct Modulation {
  double beta = 0.0;
  double omega = 0.0;
  double phase = 0.0;

  double operator()(double t) const { return 1.0 + beta * std::sin(omega * t + phase); }
};

/// Free evolution exp(-i phi(xi) t) a(t) f_k sampled at the given times.
inline SpaceTimeField free_evolution(const SparseSpectrum& data, Phase phase, std::span<const double> times,
                                     const Modulation& mod = {}) {
  SpaceTimeField f;
  f.grid = grid_for(data);
  f.times.assign(times.begin(), times.end());
  for (std::size_t i = 0; i < data.modes.size(); ++i) {
    if (data.coeffs[i] == Complex(0.0)) continue;
    const double phi = dispersion(phase, data.xi(i));
    ComplexVector s(times.size());
    for (std::size_t j = 0; j < times.size(); ++j) {
      s[j] = mod(times[j]) * std::exp(Complex(0.0, -phi * times[j])) * data.coeffs[i];
    }
    f.slots.push_back(f.grid->slot_of(data.modes[i]));
    f.series.push_back(std::move(s));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Restriction norms

namespace detail {

inline double uniform_step(std::span<const double> t) {
  if (t.size() < 2) throw InvalidArgument("restriction norm: need at least two time samples");
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  if (!(dt > 0.0)) throw InvalidArgument("restriction norm: times must increase");
  for (std::size_t j = 1; j < t.size(); ++j) {
    if (std::abs((t[j] - t[j - 1]) - dt) > 1e-9 * std::max(1.0, dt) + 1e-6 * dt) {
      throw InvalidArgument("restriction norm: time samples are not uniform");
    }
  }
  return dt;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Shared kernel: per-mode temporal spectra weighted per kind.
inline double restriction_norm(const SpaceTimeField& f, const NormSpec& spec, const CutoffWindow& window) {
  spec.validate();
  if (!f.grid) throw InvalidArgument("restriction norm: field has no grid");
  const double dt = uniform_step(f.times);
  const double lo = window.center - 2.0 * window.delta;
  const double hi = window.center + 2.0 * window.delta;
  const double tol = 1e-9 * std::max(1.0, std::abs(window.center) + window.delta);
  if (lo < f.times.front() - tol || hi > f.times.back() + tol) {
    throw InvalidArgument("restriction norm: window support exceeds the trajectory time range");
  }
  std::vector<std::size_t> idx;
  std::vector<double> psi;
  for (std::size_t j = 0; j < f.times.size(); ++j) {
    const double w = window(f.times[j]);
    if (w > 0.0) {
      idx.push_back(j);
      psi.push_back(w);
    }
  }
  if (idx.size() < 16) throw InvalidArgument("restriction norm: window under-resolved by the time samples");
  const std::size_t P = next_pow2(4 * idx.size());
  const double dsigma_over_2pi = 1.0 / (static_cast<double>(P) * dt);
  std::vector<double> weight(P);
  for (std::size_t l = 0; l < P; ++l) {
    const double ls = l < P / 2 ? static_cast<double>(l) : static_cast<double>(l) - static_cast<double>(P);
    const double sigma = 2.0 * kPi * ls * dsigma_over_2pi;
    weight[l] = spec.kind == NormKind::X ? std::pow(japanese_bracket(sigma), 2.0 * spec.b)
                                         : 1.0 / japanese_bracket(sigma);
  }
  double total = 0.0;
  ComplexVector g(P);
  for (std::size_t i = 0; i < f.slots.size(); ++i) {
    const auto& s = f.series[i];
    bool active = false;
    for (std::size_t q : idx) {
      if (s[q] != Complex(0.0)) {
        active = true;
        break;
      }
    }
    if (!active) continue;
    const double xi = f.grid->wavenumber(f.slots[i]);
    const double phi = dispersion(spec.phase, xi);
    std::fill(g.begin(), g.end(), Complex(0.0));
    for (std::size_t q = 0; q < idx.size(); ++q) {
      const double t = f.times[idx[q]];
      g[q] = psi[q] * std::exp(Complex(0.0, phi * t)) * s[idx[q]];
    }
    const ComplexVector G = dft_forward(g);
    double acc = 0.0;
    for (std::size_t l = 0; l < P; ++l) {
      const double a = dt * std::abs(G[l]);
      acc += spec.kind == NormKind::X ? weight[l] * a * a : weight[l] * a;
    }
    acc *= dsigma_over_2pi;
    const double spatial = std::pow(japanese_bracket(xi), 2.0 * spec.m);
    total += spatial * (spec.kind == NormKind::X ? acc : acc * acc);
  }
  return std::sqrt(f.grid->length() * total);
}

}  // namespace detail

/// ||psi_window f||_{X^{m,b}_phi} (windowed-extension surrogate).
inline double xsb_norm(const SpaceTimeField& f, const NormSpec& spec, const CutoffWindow& window) {
  NormSpec s = spec;
  s.kind = NormKind::X;
  return detail::restriction_norm(f, s, window);
}

/// ||psi_window f||_{Y^m_phi}: L^1 in sigma with weight <sigma>^{-1}, then L^2 in xi.
inline double y_norm(const SpaceTimeField& f, const NormSpec& spec, const CutoffWindow& window) {
  NormSpec s = spec;
  s.kind = NormKind::Y;
  return detail::restriction_norm(f, s, window);
}

/// Trajectory overloads; the component is selected by the phase.
inline double xsb_norm(const Trajectory& traj, const NormSpec& spec, const CutoffWindow& window) {
  return xsb_norm(space_time_field(traj, component_of(spec.phase)), spec, window);
}

inline double y_norm(const Trajectory& traj, const NormSpec& spec, const CutoffWindow& window) {
  return y_norm(space_time_field(traj, component_of(spec.phase)), spec, window);
}

// ---------------------------------------------------------------------------
// Cutoff scaling

struct CutoffScalingReport {
  std::vector<double> deltas;
  std::vector<double> norms;  ///< ||psi_delta f||_{X^{m,b'}}
  double reference_norm = 0.0;  ///< ||psi_{max delta} f||_{X^{m,b}}
  FitResult fit;
};

/// Fits the log-log slope of ||psi_delta f||_{X^{m,b'}} against delta for
/// windows centered at `center`. Requires 0 <= b' <= b < 1/2 and 0 < delta <= 1.
inline CutoffScalingReport cutoff_scaling(const SpaceTimeField& f, double m, double b, double b_prime,
                                          std::span<const double> deltas, Phase phase, double center = 0.0) {
  if (!(b < 0.5) || !(b_prime >= 0.0) || !(b_prime <= b)) {
    throw InvalidArgument("cutoff_scaling: requires 1/2 > b >= b' >= 0");
  }
  if (deltas.size() < 3) throw InvalidArgument("cutoff_scaling: need at least three deltas");
  CutoffScalingReport r;
  double dmax = 0.0;
  for (double d : deltas) {
    if (!(d > 0.0) || d > 1.0) throw InvalidArgument("cutoff_scaling: deltas must lie in (0, 1]");
    dmax = std::max(dmax, d);
    const CutoffWindow w = make_cutoff(d, f.times, center);
    r.deltas.push_back(d);
    r.norms.push_back(xsb_norm(f, NormSpec{m, b_prime, phase}, w));
  }
  r.reference_norm = xsb_norm(f, NormSpec{m, b, phase}, make_cutoff(dmax, f.times, center));
  r.fit = fit_power_law(r.deltas, r.norms);
  return r;
}

inline double cutoff_scaling_exponent(const SpaceTimeField& f, double m, double b, double b_prime,
                                      std::span<const double> deltas, Phase phase, double center = 0.0) {
  return cutoff_scaling(f, m, b, b_prime, deltas, phase, center).fit.exponent;
}

/// Synthetic trajectory f_k(t) = c_k exp(-i phi(xi_k) t) |t - center|^{-alpha}
/// on a few low modes, sampled at center + (j + 1/2) dt so the singular point
/// falls between samples. For alpha < 1/2 - b it lies locally in X^{m,b} and
/// is extremal for the cutoff scaling.
inline SpaceTimeField singular_profile(double alpha, double half_range, double dt, Phase phase,
                                       double center = 0.0) {
  if (!(alpha >= 0.0) || !(alpha < 0.5)) throw InvalidArgument("singular_profile: alpha must lie in [0, 1/2)");
  if (!(dt > 0.0) || !(half_range > 4.0 * dt)) throw InvalidArgument("singular_profile: bad sampling");
  SpaceTimeField f;
  f.grid = make_grid(2.0 * kPi, 8);
  const auto n = static_cast<std::size_t>(std::llround(half_range / dt));
  for (std::size_t j = 0; j < 2 * n; ++j) {
    f.times.push_back(center - static_cast<double>(n) * dt + (static_cast<double>(j) + 0.5) * dt);
  }
  for (long k : {0L, 1L, -2L}) {
    const std::size_t slot = f.grid->slot_of(k);
    const double phi = dispersion(phase, f.grid->wavenumber(slot));
    const double c = 1.0 / (1.0 + std::abs(static_cast<double>(k)));
    ComplexVector s(f.times.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double t = f.times[j];
      s[j] = c * std::exp(Complex(0.0, -phi * t)) * std::pow(std::abs(t - center), -alpha);
    }
    f.slots.push_back(slot);
    f.series.push_back(std::move(s));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Ensemble testers

enum class Profile { gaussian_bump, random_band };

struct EnsembleSpec {
  std::size_t trials = 50;
  std::size_t octaves = 6;
  int first_octave = 0;  ///< scales 2^first_octave, ..., 2^(first_octave + octaves - 1)
  std::uint64_t seed = 0;
  double window_delta = 0.25;
  Profile profile = Profile::gaussian_bump;
  std::size_t threads = 1;
  double eps_b = 0.1;
  double eps_m = 0.01;

  void validate() const {
    if (trials < 1) throw InvalidArgument("EnsembleSpec: trials must be >= 1");
    if (octaves < 1) throw InvalidArgument("EnsembleSpec: octaves must be >= 1");
    if (!(window_delta > 0.0) || window_delta > 1.0) throw InvalidArgument("EnsembleSpec: window_delta in (0, 1]");
    if (!(eps_b > 0.0) || !(eps_m > 0.0)) throw InvalidArgument("EnsembleSpec: eps values must be positive");
  }
};

struct ScaleStats {
  double scale = 0.0;
  std::vector<double> ratios;
  double median = 0.0;
  double max = 0.0;
  double max_over_median = 0.0;
};

struct RatioStats {
  std::vector<ScaleStats> scales;
  double growth_slope = 0.0;     ///< least-squares slope of log2(median) per octave
  double worst_spread = 0.0;     ///< largest per-scale max/median
};

/// Band-limited packet: coefficients psi(2 (xi - center) / half_width)
/// exp(-i xi x0), supported in |xi - center| < half_width. With `rng` set, each
/// coefficient is additionally multiplied by a complex Gaussian.
struct BandPacket {
  double center = 0.0;
  double half_width = 1.0;
  double x0 = 0.0;
};

inline SparseSpectrum band_packet(double length, const BandPacket& p, std::mt19937_64* rng = nullptr) {
  if (!(p.half_width > 0.0)) throw InvalidArgument("band_packet: half_width must be positive");
  SparseSpectrum s;
  s.length = length;
  const double dk = s.dk();
  const auto lo = static_cast<long>(std::floor((p.center - p.half_width) / dk));
  const auto hi = static_cast<long>(std::ceil((p.center + p.half_width) / dk));
  std::normal_distribution<double> normal;
  for (long k = lo; k <= hi; ++k) {
    const double xi = static_cast<double>(k) * dk;
    const double a = bump_cutoff(2.0 * (xi - p.center) / p.half_width);
    if (a == 0.0) continue;
    Complex c = a * std::exp(Complex(0.0, -xi * p.x0));
    if (rng) c *= Complex(normal(*rng), normal(*rng));
    s.modes.push_back(k);
    s.coeffs.push_back(c);
  }
  if (s.modes.empty()) throw InvalidArgument("band_packet: band contains no grid modes");
  const double n = s.l2();
  for (auto& c : s.coeffs) c /= n;
  return s;
}

/// Time nodes and weights for the left-hand sides. A sinh-mapped grid
/// t = tau0 sinh(s), uniform in s, concentrates nodes near the crossing or
/// focusing time 0; uniform_dt > 0 selects a plain uniform grid instead.
struct LhsQuadrature {
  double tau0 = 0.01;
  double ds = 0.04;
  double uniform_dt = 0.0;
};

struct TimeNodes {
  std::vector<double> t;
  std::vector<double> w;
};

inline TimeNodes time_nodes(double half_width, const LhsQuadrature& q) {
  TimeNodes n;
  if (q.uniform_dt > 0.0) {
    const auto count = static_cast<std::size_t>(std::ceil(2.0 * half_width / q.uniform_dt));
    const double dt = 2.0 * half_width / static_cast<double>(count);
    for (std::size_t j = 0; j <= count; ++j) {
      n.t.push_back(-half_width + static_cast<double>(j) * dt);
      n.w.push_back(dt);
    }
    return n;
  }
  if (!(q.tau0 > 0.0) || !(q.ds > 0.0)) throw InvalidArgument("LhsQuadrature: tau0 and ds must be positive");
  const double S = std::asinh(half_width / q.tau0);
  const auto count = static_cast<std::size_t>(std::ceil(2.0 * S / q.ds));
  const double ds = 2.0 * S / static_cast<double>(count);
  for (std::size_t j = 0; j <= count; ++j) {
    const double s = -S + static_cast<double>(j) * ds;
    n.t.push_back(q.tau0 * std::sinh(s));
    n.w.push_back(q.tau0 * std::cosh(s) * ds);
  }
  return n;
}

namespace detail {

// A free wave in a frame moving with velocity V, with its spectrum shifted by
// `shift` modes: the physical values on the small grid have the modulus of
// the lab-frame field at x = y + V t.
struct FrameField {
  std::vector<std::size_t> slots;
  std::vector<double> eta;
  std::vector<double> phi;
  ComplexVector coeffs;
};

inline FrameField frame_field(const SparseSpectrum& s, Phase phase, long shift, const SpectralGrid& small) {
  FrameField f;
  const long half = static_cast<long>(small.size()) / 2;
  for (std::size_t i = 0; i < s.modes.size(); ++i) {
    const long k = s.modes[i] - shift;
    if (std::abs(k) >= half) throw InvalidArgument("frame_field: evaluation grid too coarse for the band");
    f.slots.push_back(small.slot_of(k));
    f.eta.push_back(static_cast<double>(k) * s.dk());
    f.phi.push_back(dispersion(phase, s.xi(i)));
    f.coeffs.push_back(s.coeffs[i]);
  }
  return f;
}

inline ComplexVector frame_values(const FrameField& f, double V, double t, std::size_t M) {
  ComplexVector hat(M, Complex(0.0));
  for (std::size_t i = 0; i < f.slots.size(); ++i) {
    hat[f.slots[i]] += f.coeffs[i] * std::exp(Complex(0.0, (f.eta[i] * V - f.phi[i]) * t));
  }
  return dft_backward(hat);
}

inline long center_mode(const SparseSpectrum& s) {
  double w = 0.0, m = 0.0;
  for (std::size_t i = 0; i < s.modes.size(); ++i) {
    w += std::norm(s.coeffs[i]);
    m += std::norm(s.coeffs[i]) * static_cast<double>(s.modes[i]);
  }
  return w > 0.0 ? static_cast<long>(std::llround(m / w)) : 0;
}

inline long spread_modes(const SparseSpectrum& s, long shift) {
  long r = 0;
  for (long k : s.modes) r = std::max(r, std::abs(k - shift));
  return r;
}

inline std::size_t even_size(long half_modes) {
  return static_cast<std::size_t>(2 * std::max(2L, static_cast<long>(std::ceil(1.1 * static_cast<double>(half_modes))) + 1));
}

/// RHS time samples: uniform over the window support [-2 delta, 2 delta].
inline std::vector<double> rhs_times(double delta, std::size_t count = 129) {
  return uniform_times(-2.0 * delta, 4.0 * delta / static_cast<double>(count - 1), count);
}

inline double windowed_norm(const SparseSpectrum& s, Phase phase, const Modulation& a, double delta, double m,
                            double b) {
  const auto t = rhs_times(delta);
  return xsb_norm(free_evolution(s, phase, t, a), NormSpec{m, b, phase}, make_cutoff(delta, t));
}

inline double slope_per_octave(const std::vector<double>& scales, const std::vector<double>& values) {
  const std::size_t n = scales.size();
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log2(scales[i]);
    my += std::log2(std::max(values[i], 1e-300));
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log2(scales[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log2(std::max(values[i], 1e-300)) - my);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

inline RatioStats summarize(const std::vector<double>& scales, std::vector<std::vector<double>> ratios) {
  RatioStats r;
  std::vector<double> medians;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    ScaleStats s;
    s.scale = scales[i];
    s.ratios = std::move(ratios[i]);
    s.median = median(s.ratios);
    s.max = s.ratios.empty() ? 0.0 : *std::max_element(s.ratios.begin(), s.ratios.end());
    s.max_over_median = s.median > 0.0 ? s.max / s.median : 0.0;
    r.worst_spread = std::max(r.worst_spread, s.max_over_median);
    medians.push_back(s.median);
    r.scales.push_back(std::move(s));
  }
  r.growth_slope = slope_per_octave(scales, medians);
  return r;
}

inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint32_t tag, std::size_t scale, std::size_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag,
                    static_cast<std::uint32_t>(scale), static_cast<std::uint32_t>(trial)};
  return std::mt19937_64(seq);
}

/// Runs body(i) for i in [0, n) on up to `threads` workers; results must be
/// written to per-index slots.
template <class Body>
void parallel_for(std::size_t n, std::size_t threads, Body&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline Modulation random_modulation(std::mt19937_64& rng, double delta) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Modulation m;
  m.beta = 0.3 * unit(rng);
  m.omega = 2.0 * kPi / delta * unit(rng);
  m.phase = 2.0 * kPi * unit(rng);
  return m;
}

/// Packet in the dyadic band [K, 2K] (random sign).
inline BandPacket dyadic_packet(std::mt19937_64& rng, double K) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
  BandPacket p;
  p.center = sign * K * (1.25 + 0.5 * unit(rng));
  p.half_width = K * (0.125 + 0.125 * unit(rng));
  p.x0 = (unit(rng) - 0.5) / K;
  return p;
}

}  // namespace detail

// ---- Strichartz ------------------------------------------------------------

/// ||psi a u||_{L^p_{xt}} / ||psi a u||_{X^{0,b}}, b = (3/2)(1/2 - 1/p) + eps_b,
/// for the free Schroedinger evolution u of `data`.
inline double strichartz_trial_ratio(const SparseSpectrum& data, const Modulation& a, double p, double delta,
                                     double eps_b, const LhsQuadrature& quad) {
  if (!(p >= 2.0) || p > 6.0) throw InvalidArgument("strichartz: p must lie in [2, 6]");
  const double b = 1.5 * (0.5 - 1.0 / p) + eps_b;
  const double rhs = detail::windowed_norm(data, Phase::schrodinger, a, delta, 0.0, b);
  if (rhs == 0.0) return 0.0;

  const long shift = detail::center_mode(data);
  const auto small = make_grid(data.length, detail::even_size(detail::spread_modes(data, shift)));
  const auto ff = detail::frame_field(data, Phase::schrodinger, shift, *small);
  const double V = 2.0 * static_cast<double>(shift) * data.dk();
  const TimeNodes nodes = time_nodes(2.0 * delta, quad);
  double acc = 0.0;
  for (std::size_t q = 0; q < nodes.t.size(); ++q) {
    const double t = nodes.t[q];
    const double env = std::abs(bump_cutoff(t / delta) * a(t));
    if (env == 0.0) continue;
    const ComplexVector u = detail::frame_values(ff, V, t, small->size());
    double sx = 0.0;
    for (const auto& v : u) sx += std::pow(std::abs(v), p);
    acc += nodes.w[q] * std::pow(env, p) * sx * small->dx();
  }
  return std::pow(acc, 1.0 / p) / rhs;
}

inline RatioStats strichartz_ratio(const EnsembleSpec& e, double p) {
  e.validate();
  std::vector<double> scales;
  for (std::size_t o = 0; o < e.octaves; ++o) scales.push_back(std::ldexp(1.0, e.first_octave + static_cast<int>(o)));
  std::vector<std::vector<double>> ratios(scales.size(), std::vector<double>(e.trials));
  detail::parallel_for(scales.size() * e.trials, e.threads, [&](std::size_t job) {
    const std::size_t si = job / e.trials, trial = job % e.trials;
    const double K = scales[si];
    auto rng = detail::trial_rng(e.seed, 0x5354u, si, trial);
    const BandPacket bp = detail::dyadic_packet(rng, K);
    // Dispersal across the window must not wrap around the torus.
    const double L = 16.0 * kPi + 8.0 * bp.half_width * e.window_delta;
    const SparseSpectrum data = band_packet(L, bp, e.profile == Profile::random_band ? &rng : nullptr);
    const Modulation a = detail::random_modulation(rng, e.window_delta);
    LhsQuadrature q;
    q.tau0 = 1.0 / (4.0 * bp.half_width * bp.half_width);
    if (e.profile == Profile::random_band) q.uniform_dt = std::min(e.window_delta / 64.0, q.tau0 / 4.0);
    ratios[si][trial] = strichartz_trial_ratio(data, a, p, e.window_delta, e.eps_b, q);
  });
  return detail::summarize(scales, std::move(ratios));
}

// ---- Wave-Schroedinger bilinear ----------------------------------------------

/// Right-hand exponents: full_modulation X^{0,1/2+} x X^{0,1/2+};
/// endpoint_schrodinger X^{0+,1/2} x X^{0,1/2+}; endpoint_both X^{0+,1/2} x X^{0,1/2}.
enum class WsVariant { full_modulation, endpoint_schrodinger, endpoint_both };

/// ||(D^{1/2} psi a u) (psi c n)||_{L^2_{xt}} divided by the product of the
/// variant's right-hand norms. u evolves by the Schroedinger flow, n by the
/// wave flow with phase `wave` (wave_plus or wave_minus).
inline double bilinear_ws_trial_ratio(const SparseSpectrum& u, const SparseSpectrum& n, Phase wave,
                                      const Modulation& au, const Modulation& an, WsVariant variant, double delta,
                                      double eps_b, double eps_m, const LhsQuadrature& quad) {
  if (wave == Phase::schrodinger) throw InvalidArgument("bilinear_ws: the second factor must be a wave");
  if (u.length != n.length) throw InvalidArgument("bilinear_ws: factors on different tori");
  double bu = 0.5 + eps_b, mu = 0.0, bn = 0.5 + eps_b;
  if (variant == WsVariant::endpoint_schrodinger) {
    bu = 0.5;
    mu = eps_m;
  } else if (variant == WsVariant::endpoint_both) {
    bu = 0.5;
    mu = eps_m;
    bn = 0.5;
  }
  const double rhs = detail::windowed_norm(u, Phase::schrodinger, au, delta, mu, bu) *
                     detail::windowed_norm(n, wave, an, delta, 0.0, bn);
  if (rhs == 0.0) return 0.0;

  SparseSpectrum v = u;
  for (std::size_t i = 0; i < v.modes.size(); ++i) v.coeffs[i] *= std::sqrt(std::abs(v.xi(i)));
  const long shift = detail::center_mode(u);
  const long half = std::max(detail::spread_modes(v, shift), n.max_abs_mode());
  const auto small = make_grid(u.length, detail::even_size(half));
  const auto fv = detail::frame_field(v, Phase::schrodinger, shift, *small);
  const auto fn = detail::frame_field(n, wave, 0, *small);
  const double V = 2.0 * static_cast<double>(shift) * u.dk();
  const TimeNodes nodes = time_nodes(2.0 * delta, quad);
  double acc = 0.0;
  for (std::size_t q = 0; q < nodes.t.size(); ++q) {
    const double t = nodes.t[q];
    const double psi = bump_cutoff(t / delta);
    const double env = psi * psi * std::abs(au(t) * an(t));
    if (env == 0.0) continue;
    const ComplexVector a = detail::frame_values(fv, V, t, small->size());
    const ComplexVector b = detail::frame_values(fn, V, t, small->size());
    double sx = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) sx += std::norm(a[j]) * std::norm(b[j]);
    acc += nodes.w[q] * env * env * sx * small->dx();
  }
  return std::sqrt(acc) / rhs;
}

struct WsOptions {
  WsVariant variant = WsVariant::full_modulation;
  bool reflect_wave = false;  ///< apply xi -> -xi to the wave data
};

/// Schroedinger factor in the dyadic band at each scale, wave factor a
/// low-frequency packet; odd trials use the wave_minus phase.
inline RatioStats bilinear_ws_ratio(const EnsembleSpec& e, WsOptions opt = {}) {
  e.validate();
  std::vector<double> scales;
  for (std::size_t o = 0; o < e.octaves; ++o) scales.push_back(std::ldexp(1.0, e.first_octave + static_cast<int>(o)));
  std::vector<std::vector<double>> ratios(scales.size(), std::vector<double>(e.trials));
  detail::parallel_for(scales.size() * e.trials, e.threads, [&](std::size_t job) {
    const std::size_t si = job / e.trials, trial = job % e.trials;
    const double K = scales[si];
    auto rng = detail::trial_rng(e.seed, 0x5753u, si, trial);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const BandPacket bu = detail::dyadic_packet(rng, K);
    BandPacket bn;
    bn.center = 4.0 * unit(rng) - 2.0;
    bn.half_width = 1.0 + unit(rng);
    bn.x0 = unit(rng) - 0.5;
    if (opt.reflect_wave) {
      bn.center = -bn.center;
      bn.x0 = -bn.x0;
    }
    const double rel_speed = 2.0 * (std::abs(bu.center) + bu.half_width) + 1.0;
    const double L = 16.0 * kPi + 2.0 * rel_speed * 2.0 * e.window_delta;
    std::mt19937_64* coeff_rng = e.profile == Profile::random_band ? &rng : nullptr;
    const SparseSpectrum u = band_packet(L, bu, coeff_rng);
    const SparseSpectrum n = band_packet(L, bn, coeff_rng);
    const Modulation au = detail::random_modulation(rng, e.window_delta);
    const Modulation an = detail::random_modulation(rng, e.window_delta);
    const Phase wave = trial % 2 == 0 ? Phase::wave_plus : Phase::wave_minus;
    LhsQuadrature q;
    q.tau0 = 1.0 / (4.0 * rel_speed * bn.half_width);
    if (e.profile == Profile::random_band) {
      q.uniform_dt = std::min(e.window_delta / 64.0, 1.0 / (16.0 * bu.half_width * rel_speed));
    }
    ratios[si][trial] =
        bilinear_ws_trial_ratio(u, n, wave, au, an, opt.variant, e.window_delta, e.eps_b, e.eps_m, q);
  });
  return detail::summarize(scales, std::move(ratios));
}

// ---- Schroedinger-Schroedinger bilinear ------------------------------------

/// Right-hand exponents: full_modulation X^{0,1/2+} x X^{0,1/2+};
/// endpoint_both X^{0+,1/2} x X^{0,1/2}.
enum class SsVariant { full_modulation, endpoint_both };

/// Checks min |xi_1| >= 2 max |xi_2| and |xi_2| >= 1 on the supports, i.e.
/// dyadic bands [K2, 2 K2] and [K1, 2 K1] with K1 >= 4 K2.
inline void require_separation(const SparseSpectrum& u1, const SparseSpectrum& u2) {
  double min1 = std::numeric_limits<double>::infinity(), min2 = min1, max2 = 0.0;
  for (std::size_t i = 0; i < u1.modes.size(); ++i) {
    if (u1.coeffs[i] != Complex(0.0)) min1 = std::min(min1, std::abs(u1.xi(i)));
  }
  for (std::size_t i = 0; i < u2.modes.size(); ++i) {
    if (u2.coeffs[i] == Complex(0.0)) continue;
    min2 = std::min(min2, std::abs(u2.xi(i)));
    max2 = std::max(max2, std::abs(u2.xi(i)));
  }
  if (!(min2 >= 1.0)) throw InvalidArgument("bilinear_ss: the low factor needs |xi_2| >= 1 on its support");
  if (!(min1 >= 2.0 * max2)) throw InvalidArgument("bilinear_ss: supports need min|xi_1| >= 2 max|xi_2| (gap >= 2 octaves)");
}

/// ||(D^{1/2} psi a u1)(psi c u2)||_{L^2_{xt}} over the product of the
/// variant's right-hand norms, both factors free Schroedinger waves.
inline double bilinear_ss_trial_ratio(const SparseSpectrum& u1, const SparseSpectrum& u2, const Modulation& a1,
                                      const Modulation& a2, SsVariant variant, double delta, double eps_b,
                                      double eps_m, const LhsQuadrature& quad, bool enforce_separation = true) {
  if (u1.length != u2.length) throw InvalidArgument("bilinear_ss: factors on different tori");
  if (enforce_separation) require_separation(u1, u2);
  double m1 = 0.0, b1 = 0.5 + eps_b, b2 = 0.5 + eps_b;
  if (variant == SsVariant::endpoint_both) {
    m1 = eps_m;
    b1 = 0.5;
    b2 = 0.5;
  }
  const double rhs = detail::windowed_norm(u1, Phase::schrodinger, a1, delta, m1, b1) *
                     detail::windowed_norm(u2, Phase::schrodinger, a2, delta, 0.0, b2);
  if (rhs == 0.0) return 0.0;

  SparseSpectrum v = u1;
  for (std::size_t i = 0; i < v.modes.size(); ++i) v.coeffs[i] *= std::sqrt(std::abs(v.xi(i)));
  const long s1 = detail::center_mode(u1), s2 = detail::center_mode(u2);
  const long half = std::max(detail::spread_modes(v, s1), detail::spread_modes(u2, s2));
  const auto small = make_grid(u1.length, detail::even_size(half));
  const auto f1 = detail::frame_field(v, Phase::schrodinger, s1, *small);
  const auto f2 = detail::frame_field(u2, Phase::schrodinger, s2, *small);
  const double V = 2.0 * static_cast<double>(s1) * u1.dk();
  const TimeNodes nodes = time_nodes(2.0 * delta, quad);
  double acc = 0.0;
  for (std::size_t q = 0; q < nodes.t.size(); ++q) {
    const double t = nodes.t[q];
    const double psi = bump_cutoff(t / delta);
    const double env = psi * psi * std::abs(a1(t) * a2(t));
    if (env == 0.0) continue;
    const ComplexVector a = detail::frame_values(f1, V, t, small->size());
    const ComplexVector b = detail::frame_values(f2, V, t, small->size());
    double sx = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) sx += std::norm(a[j]) * std::norm(b[j]);
    acc += nodes.w[q] * env * env * sx * small->dx();
  }
  return std::sqrt(acc) / rhs;
}

struct SsOptions {
  SsVariant variant = SsVariant::full_modulation;
  std::vector<int> gaps = {2, 3, 4, 5, 6, 7};  ///< octave gaps between the factors
  bool control = false;  ///< run without separation (both factors in the same band)
};

/// Low factor in the band [1, 2]; high factor in [2^gap, 2^(gap+1)].
/// Scales in the report are 2^gap. With control set, both factors share the
/// high band and separation is not enforced.
inline RatioStats bilinear_ss_ratio(const EnsembleSpec& e, SsOptions opt = {}) {
  e.validate();
  std::vector<double> scales;
  for (int g : opt.gaps) {
    if (!opt.control && g < 2) throw InvalidArgument("bilinear_ss: separation gap must be >= 2 octaves");
    scales.push_back(std::ldexp(1.0, g));
  }
  if (scales.empty()) throw InvalidArgument("bilinear_ss: no gaps requested");
  std::vector<std::vector<double>> ratios(scales.size(), std::vector<double>(e.trials));
  detail::parallel_for(scales.size() * e.trials, e.threads, [&](std::size_t job) {
    const std::size_t si = job / e.trials, trial = job % e.trials;
    const double K1 = scales[si];
    auto rng = detail::trial_rng(e.seed, opt.control ? 0x5343u : 0x5353u, si, trial);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const BandPacket b1 = detail::dyadic_packet(rng, K1);
    BandPacket b2;
    if (opt.control) {
      b2 = detail::dyadic_packet(rng, K1);
    } else {
      b2.center = (unit(rng) < 0.5 ? -1.0 : 1.0) * (1.4 + 0.2 * unit(rng));
      b2.half_width = 0.3 + 0.1 * unit(rng);
      b2.x0 = unit(rng) - 0.5;
    }
    const double rel_speed = 2.0 * (std::abs(b1.center) + b1.half_width + std::abs(b2.center) + b2.half_width);
    const double L = 16.0 * kPi + 2.0 * rel_speed * 2.0 * e.window_delta;
    std::mt19937_64* coeff_rng = e.profile == Profile::random_band ? &rng : nullptr;
    const SparseSpectrum u1 = band_packet(L, b1, coeff_rng);
    const SparseSpectrum u2 = band_packet(L, b2, coeff_rng);
    const Modulation a1 = detail::random_modulation(rng, e.window_delta);
    const Modulation a2 = detail::random_modulation(rng, e.window_delta);
    LhsQuadrature q;
    q.tau0 = 1.0 / (4.0 * std::max(rel_speed, 1.0) * std::min(b2.half_width, b1.half_width));
    if (e.profile == Profile::random_band) {
      q.uniform_dt = std::min(e.window_delta / 64.0, 1.0 / (16.0 * b1.half_width * rel_speed));
    }
    ratios[si][trial] =
        bilinear_ss_trial_ratio(u1, u2, a1, a2, opt.variant, e.window_delta, e.eps_b, e.eps_m, q, !opt.control);
  });
  return detail::summarize(scales, std::move(ratios));
}

}  // namespace zakharov
