#pragma once

// The smoothing multiplier I_N and the smooth time cutoff psi_delta.

#include <cmath>
#include <span>
#include <vector>

#include "zakharov/errors.hpp"
#include "zakharov/spectral.hpp"

namespace zakharov {

/// m_N(xi): 1 for |xi| <= N, (N/|xi|)^{1-s} for |xi| >= 2N, and on [N, 2N]
/// the exponent is blended with the C^1 smoothstep in r = log2(|xi|/N):
///   m = (N/|xi|)^{(1-s) (3r^2 - 2r^3)}.
class Multiplier {
 public:
  Multiplier(GridPtr grid, double N, double s) : grid_(std::move(grid)), N_(N), s_(s) {
    if (!(N > 0.0) || !std::isfinite(N)) throw InvalidArgument("make_multiplier: N must be positive");
    if (!(s > 0.5 && s <= 1.0)) throw InvalidArgument("make_multiplier: s must lie in (1/2, 1]");
    symbol_.resize(grid_->size());
    for (std::size_t i = 0; i < symbol_.size(); ++i) symbol_[i] = (*this)(grid_->wavenumber(i));
  }

  double operator()(double xi) const {
    const double a = std::abs(xi);
    if (a <= N_) return 1.0;
    const double r = std::log2(a / N_);
    const double blend = r >= 1.0 ? 1.0 : r * r * (3.0 - 2.0 * r);
    return std::exp(-(1.0 - s_) * blend * std::log(a / N_));
  }

  double N() const noexcept { return N_; }
  double s() const noexcept { return s_; }
  const GridPtr& grid() const noexcept { return grid_; }
  /// m_N(xi_k) in FFT storage order.
  std::span<const double> symbol() const noexcept { return symbol_; }

  /// True when m = 1 on every grid wavenumber.
  bool is_identity() const noexcept { return N_ >= grid_->nyquist(); }

 private:
  GridPtr grid_;
  double N_;
  double s_;
  std::vector<double> symbol_;
};

inline Multiplier make_multiplier(GridPtr grid, double N, double s) { return Multiplier(std::move(grid), N, s); }

/// (I f)^ = m_N fhat
inline Field apply_I(const Field& f, const Multiplier& m) {
  if (!f.grid || !(*f.grid == *m.grid())) throw InvalidArgument("apply_I: grid mismatch");
  const auto sym = m.symbol();
  return apply_symbol(f, [&](double, std::size_t i) { return Complex(sym[i]); });
}

// ---------------------------------------------------------------------------

/// psi(t): 1 on [-1, 1], 0 outside (-2, 2), even, C^infinity. The transition
/// on 1 < |t| < 2 is h(2-|t|) / (h(2-|t|) + h(|t|-1)) with h(x) = exp(-1/x).
inline double bump_cutoff(double t) {
  const double a = std::abs(t);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  auto h = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
  const double up = h(2.0 - a);
  const double down = h(a - 1.0);
  return up / (up + down);
}

struct CutoffWindow {
  double delta = 1.0;
  double center = 0.0;
  std::vector<double> times;
  std::vector<double> samples;  ///< psi((t - center)/delta)

  double operator()(double t) const { return bump_cutoff((t - center) / delta); }
};

/// Samples psi_delta(t - center) on t_grid. The grid must carry at least 16
/// samples inside (center - 2 delta, center + 2 delta).
inline CutoffWindow make_cutoff(double delta, std::span<const double> t_grid, double center = 0.0) {
  if (!(delta > 0.0)) throw InvalidArgument("make_cutoff: delta must be positive");
  CutoffWindow w{delta, center, std::vector<double>(t_grid.begin(), t_grid.end()), {}};
  w.samples.reserve(t_grid.size());
  std::size_t inside = 0;
  for (double t : t_grid) {
    w.samples.push_back(w(t));
    if (std::abs(t - center) < 2.0 * delta) ++inside;
  }
  if (inside < 16) throw InvalidArgument("make_cutoff: time grid under-resolves [-2 delta, 2 delta]");
  return w;
}

/// Uniform grid t_j = t0 + j dt, j = 0..count-1.
inline std::vector<double> uniform_times(double t0, double dt, std::size_t count) {
  std::vector<double> t(count);
  for (std::size_t j = 0; j < count; ++j) t[j] = t0 + static_cast<double>(j) * dt;
  return t;
}

}  // namespace zakharov
