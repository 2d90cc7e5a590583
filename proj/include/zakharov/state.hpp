#pragma once

// Physical (u, n, v = A^{-1/2} n_t) and first-order (u, n+, n-) states,
// the map between them, and initial-data generators.

#include <cmath>
#include <cstdint>
#include <random>

#include "zakharov/errors.hpp"
#include "zakharov/spectral.hpp"

namespace zakharov {

struct ZakharovState {
  Field u;  ///< Schroedinger amplitude (complex)
  Field n;  ///< density fluctuation (real)
  Field v;  ///< A^{-1/2} n_t (real)
};

struct FirstOrderState {
  Field u;
  Field n_plus;
  Field n_minus;

  const GridPtr& grid() const { return u.grid; }
};

inline constexpr double kMeanTolerance = 1e-12;
inline constexpr double kConjugacyTolerance = 1e-8;

namespace detail {

inline double scale_of(const Field& f) { return std::max(1.0, max_abs(to_physical(f))); }

inline void require_real_mean_zero(const Field& f, const char* name) {
  const Field p = to_physical(f);
  const double scale = scale_of(p);
  double imag = 0.0;
  for (const auto& v : p.values) imag = std::max(imag, std::abs(v.imag()));
  if (imag > kMeanTolerance * scale) {
    throw ConstraintViolation(std::string(name) + " is not real-valued");
  }
  if (std::abs(mean(p)) > kMeanTolerance * scale) {
    throw ConstraintViolation(std::string(name) + " has nonzero mean");
  }
}

}  // namespace detail

/// Throws ConstraintViolation unless n and v are real with zero mean.
inline void check_invariants(const ZakharovState& s) {
  require_same_grid(s.u, s.n, "ZakharovState");
  require_same_grid(s.u, s.v, "ZakharovState");
  detail::require_real_mean_zero(s.n, "n");
  detail::require_real_mean_zero(s.v, "v");
}

/// max |n- - conj(n+)|, relative to max(1, max |n+|).
inline double conjugacy_defect(const FirstOrderState& f) {
  const Field p = to_physical(f.n_plus);
  const Field m = to_physical(f.n_minus);
  double worst = 0.0;
  for (std::size_t j = 0; j < p.values.size(); ++j) {
    worst = std::max(worst, std::abs(m.values[j] - std::conj(p.values[j])));
  }
  return worst / detail::scale_of(p);
}

inline void require_conjugacy(const FirstOrderState& f, const char* where) {
  require_same_grid(f.u, f.n_plus, where);
  require_same_grid(f.u, f.n_minus, where);
  if (conjugacy_defect(f) > kConjugacyTolerance) {
    throw InconsistentState(std::string(where) + ": n_minus is not conj(n_plus)");
  }
}

/// n+- = n +- i v
inline FirstOrderState to_first_order(const ZakharovState& s) {
  check_invariants(s);
  const Field n = to_physical(s.n);
  const Field v = to_physical(s.v);
  Field plus = Field::zeros(n.grid);
  Field minus = Field::zeros(n.grid);
  for (std::size_t j = 0; j < n.values.size(); ++j) {
    plus.values[j] = Complex(n.values[j].real(), v.values[j].real());
    minus.values[j] = std::conj(plus.values[j]);
  }
  return FirstOrderState{to_physical(s.u), std::move(plus), std::move(minus)};
}

/// n = Re n+, v = Im n+
inline ZakharovState from_first_order(const FirstOrderState& f) {
  require_conjugacy(f, "from_first_order");
  const Field plus = to_physical(f.n_plus);
  return ZakharovState{to_physical(f.u), real_part(plus), imag_part(plus)};
}

// ---------------------------------------------------------------------------
// Rough random data

struct RoughDataParams {
  double s = 0.9;      ///< target regularity, 1/2 < s < 1
  double eps = 0.01;   ///< decay margin
  double amp = 1.0;
  std::uint64_t seed = 0;
};

namespace detail {

// One standard complex Gaussian per (seed, stream, mode), so that refining the
// grid keeps every coarse-grid coefficient.
inline Complex mode_gaussian(std::uint64_t seed, std::uint32_t stream, long k) {
  const auto uk = static_cast<std::uint64_t>(k);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream,
                    static_cast<std::uint32_t>(uk), static_cast<std::uint32_t>(uk >> 32)};
  std::mt19937_64 gen(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double re = normal(gen);
  const double im = normal(gen);
  return Complex(re, im) / std::sqrt(2.0);
}

inline Field rough_complex(const GridPtr& g, double exponent, double amp, std::uint64_t seed, std::uint32_t stream) {
  Field hat = Field::zeros(g, Domain::spectral);
  for (std::size_t i = 1; i < g->size(); ++i) {
    if (g->is_nyquist(i)) continue;
    const double w = amp * std::pow(japanese_bracket(g->wavenumber(i)), -exponent);
    hat.values[i] = w * mode_gaussian(seed, stream, g->mode_index(i));
  }
  return to_physical(hat);
}

inline Field rough_real(const GridPtr& g, double exponent, double amp, std::uint64_t seed, std::uint32_t stream) {
  Field hat = Field::zeros(g, Domain::spectral);
  for (std::size_t i = 1; i < g->size() / 2; ++i) {
    const double w = amp * std::pow(japanese_bracket(g->wavenumber(i)), -exponent);
    const Complex c = w * mode_gaussian(seed, stream, g->mode_index(i));
    hat.values[i] = c;
    hat.values[g->slot_of(-g->mode_index(i))] = std::conj(c);
  }
  return real_part(to_physical(hat));
}

}  // namespace detail

/// Random data with |u^(xi)| ~ <xi>^{-(s+1/2+eps)} and n^, v^ ~ <xi>^{-(s-1/2+eps)},
/// zero mean and zero Nyquist mode, deterministic per seed.
inline ZakharovState sample_rough_data(const GridPtr& g, const RoughDataParams& p) {
  if (!(p.s > 0.5 && p.s < 1.0)) throw InvalidArgument("sample_rough_data: s must lie in (1/2, 1)");
  if (!(p.eps > 0.0)) throw InvalidArgument("sample_rough_data: eps must be positive");
  return ZakharovState{
      detail::rough_complex(g, p.s + 0.5 + p.eps, p.amp, p.seed, 0),
      detail::rough_real(g, p.s - 0.5 + p.eps, p.amp, p.seed, 1),
      detail::rough_real(g, p.s - 0.5 + p.eps, p.amp, p.seed, 2),
  };
}

// ---------------------------------------------------------------------------
// Traveling-wave oracle

struct SolitonParams {
  double a = 1.0;   ///< inverse width
  double c = 0.0;   ///< speed, |c| < 1
  double x0 = 0.0;  ///< center at t = 0
};

/// Traveling wave on the torus,
///   u = sqrt(2(1-c^2)) a sech(a(x - x0 - ct)) exp(i(cx/2 + theta t)),
///   n = -|u|^2/(1-c^2) - mean,
/// where removing the O(1/L) mean of n shifts theta = a^2 - c^2/4 + mean.
/// The carrier exp(icx/2) must be L-periodic, i.e. c/2 a grid wavenumber.
inline ZakharovState soliton_exact(const GridPtr& g, const SolitonParams& p, double t) {
  if (!(std::abs(p.c) < 1.0)) throw InvalidArgument("soliton: |c| must be < 1 (subsonic)");
  if (!(p.a > 0.0)) throw InvalidArgument("soliton: width parameter must be positive");
  const double carrier = 0.5 * p.c / g->dk();
  if (std::abs(carrier - std::round(carrier)) > 1e-9) {
    throw InvalidArgument("soliton: carrier c/2 is not a grid wavenumber, exp(icx/2) would not be periodic");
  }
  const double L = g->length();
  const double tail = std::cosh(0.5 * p.a * L);
  if (!(tail > 1e12)) throw InvalidArgument("soliton: a*L too small, sech tails exceed 1e-12 at the boundary");

  const double gamma = 1.0 - p.c * p.c;
  const double amp = std::sqrt(2.0 * gamma) * p.a;
  auto envelope = [&](double x) {
    const double d = std::remainder(x - p.x0 - p.c * t, L);
    return amp / std::cosh(p.a * d);
  };
  Field n = Field::from_function(g, [&](double x) {
    const double e = envelope(x);
    return -e * e / gamma;
  });
  const double n_mean = mean(n).real();
  for (auto& v : n.values) v = Complex(v.real() - n_mean, 0.0);
  const double theta = p.a * p.a - 0.25 * p.c * p.c + n_mean;

  Field u = Field::from_function(g, [&](double x) {
    return envelope(x) * std::exp(Complex(0.0, 0.5 * p.c * x + theta * t));
  });

  // v = A^{-1/2} n_t with n_t = -c n_x: v^ = -c i sign(xi) n^
  Field v = real_part(apply_symbol(n, [&](double k, std::size_t i) {
    if (k == 0.0 || g->is_nyquist(i)) return Complex(0.0);
    return Complex(0.0, -p.c * (k > 0.0 ? 1.0 : -1.0));
  }));
  return ZakharovState{std::move(u), std::move(n), std::move(v)};
}

inline ZakharovState soliton_state(const GridPtr& g, const SolitonParams& p) { return soliton_exact(g, p, 0.0); }

/// Phase frequency theta of the torus soliton (see soliton_exact).
inline double soliton_frequency(const GridPtr& g, const SolitonParams& p) {
  const ZakharovState s = soliton_exact(g, p, 0.0);
  const double gamma = 1.0 - p.c * p.c;
  // The subtracted mean is recovered from any point: n + |u|^2/(1-c^2) = -mean.
  const double n_mean = -(s.n.values[0].real() + std::norm(s.u.values[0]) / gamma);
  return p.a * p.a - 0.25 * p.c * p.c + n_mean;
}

}  // namespace zakharov
