#pragma once

// Periodic spectral grid, FFT transforms, Fourier multipliers and Sobolev
// norms on the torus [0, L).
//
// Conventions:
//   xs[j]  = j L / M,                      j = 0..M-1
//   ks[i]  = 2 pi k_i / L, k_i in {-M/2, ..., M/2-1}, stored in FFT order
//            (k = 0, 1, ..., M/2-1, -M/2, ..., -1)
//   fhat_k = (1/M) sum_j f_j exp(-i xi_k x_j)
//   f_j    = sum_k fhat_k exp(i xi_k x_j)
//   int_0^L |f|^2 dx = L sum_k |fhat_k|^2
//
// The Nyquist mode k = -M/2 is treated as a cosine mode: even symbols act on
// it with |xi|, odd symbols (first derivative) annihilate it.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "zakharov/errors.hpp"

namespace zakharov {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

inline constexpr double kPi = std::numbers::pi;

/// <lambda> = (1 + lambda^2)^(1/2)
inline double japanese_bracket(double lambda) { return std::sqrt(1.0 + lambda * lambda); }

class SpectralGrid {
 public:
  SpectralGrid(double length, std::size_t points) : length_(length), points_(points) {
    if (!(length > 0.0) || !std::isfinite(length)) {
      throw InvalidArgument("SpectralGrid: length must be positive and finite");
    }
    if (points < 4 || points % 2 != 0) {
      throw InvalidArgument("SpectralGrid: point count must be even and >= 4");
    }
    xs_.resize(points);
    ks_.resize(points);
    const double dx = length / static_cast<double>(points);
    const double dk = 2.0 * kPi / length;
    for (std::size_t j = 0; j < points; ++j) {
      xs_[j] = static_cast<double>(j) * dx;
      ks_[j] = static_cast<double>(mode_index(j)) * dk;
    }
  }

  double length() const noexcept { return length_; }
  std::size_t size() const noexcept { return points_; }
  double dx() const noexcept { return length_ / static_cast<double>(points_); }
  double dk() const noexcept { return 2.0 * kPi / length_; }
  /// |xi| of the Nyquist mode, pi M / L.
  double nyquist() const noexcept { return kPi * static_cast<double>(points_) / length_; }

  std::span<const double> points() const noexcept { return xs_; }
  /// Wavenumbers in FFT storage order.
  std::span<const double> wavenumbers() const noexcept { return ks_; }
  double wavenumber(std::size_t i) const { return ks_[i]; }

  /// Signed integer mode number of storage slot i.
  long mode_index(std::size_t i) const noexcept {
    const long m = static_cast<long>(points_);
    const long k = static_cast<long>(i);
    return k < m / 2 ? k : k - m;
  }

  /// Storage slot of signed mode k (k taken modulo M).
  std::size_t slot_of(long k) const noexcept {
    const long m = static_cast<long>(points_);
    long r = k % m;
    if (r < 0) r += m;
    return static_cast<std::size_t>(r);
  }

  bool is_nyquist(std::size_t i) const noexcept { return i == points_ / 2; }

  /// Wavenumbers in ascending order, xi_{-M/2} .. xi_{M/2-1}.
  std::vector<double> sorted_wavenumbers() const {
    std::vector<double> out(ks_);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Largest retained |k| under the 2/3 rule.
  long dealias_cutoff() const noexcept { return static_cast<long>(points_) / 3; }

  bool operator==(const SpectralGrid& other) const noexcept {
    return length_ == other.length_ && points_ == other.points_;
  }

 private:
  double length_;
  std::size_t points_;
  std::vector<double> xs_;
  std::vector<double> ks_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

inline GridPtr make_grid(double length, std::size_t points) {
  return std::make_shared<const SpectralGrid>(length, points);
}

enum class Domain { physical, spectral };
enum class Direction { forward, inverse };
enum class ZeroModeRule { zero, keep };

/// Samples of a complex field on a grid, either at collocation points
/// (physical) or as Fourier coefficients (spectral).
struct Field {
  GridPtr grid;
  ComplexVector values;
  Domain kind = Domain::physical;

  static Field zeros(GridPtr g, Domain kind = Domain::physical) {
    const std::size_t n = g->size();
    return Field{std::move(g), ComplexVector(n), kind};
  }

  template <class Fn>
  static Field from_function(GridPtr g, Fn&& fn) {
    Field f = zeros(g);
    const auto xs = g->points();
    for (std::size_t j = 0; j < xs.size(); ++j) f.values[j] = Complex(fn(xs[j]));
    return f;
  }

  std::size_t size() const noexcept { return values.size(); }
};

inline void require_same_grid(const Field& a, const Field& b, const char* where) {
  if (!a.grid || !b.grid || !(*a.grid == *b.grid)) {
    throw InvalidArgument(std::string(where) + ": grid mismatch");
  }
}

namespace detail {

// Cached FFTW plans keyed on (size, sign). Planning is serialized; executing a
// plan on caller-owned buffers through the new-array interface is thread-safe.
class FftPlanCache {
 public:
  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  fftw_plan plan(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    ComplexVector in(n), out(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                   reinterpret_cast<fftw_complex*>(out.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

 private:
  FftPlanCache() = default;
  ~FftPlanCache() {
    for (auto& [key, p] : plans_) fftw_destroy_plan(p);
  }

  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

/// Unnormalized DFT with exp(sign * 2 pi i jk/n).
inline ComplexVector dft(std::span<const Complex> in, int sign) {
  ComplexVector out(in.size());
  if (in.empty()) return out;
  fftw_plan p = FftPlanCache::instance().plan(in.size(), sign);
  ComplexVector scratch(in.begin(), in.end());
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(scratch.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace detail

/// Forward DFT of a raw sequence with exp(-2 pi i jk/n), unnormalized.
inline ComplexVector dft_forward(std::span<const Complex> in) { return detail::dft(in, FFTW_FORWARD); }
/// Inverse DFT with exp(+2 pi i jk/n), unnormalized.
inline ComplexVector dft_backward(std::span<const Complex> in) { return detail::dft(in, FFTW_BACKWARD); }

inline Field transform(const Field& f, Direction direction) {
  if (!f.grid || f.values.size() != f.grid->size()) {
    throw InvalidArgument("transform: field size does not match its grid");
  }
  if (direction == Direction::forward) {
    if (f.kind != Domain::physical) throw InvalidArgument("transform: forward expects a physical field");
    ComplexVector out = dft_forward(f.values);
    const double scale = 1.0 / static_cast<double>(out.size());
    for (auto& c : out) c *= scale;
    return Field{f.grid, std::move(out), Domain::spectral};
  }
  if (f.kind != Domain::spectral) throw InvalidArgument("transform: inverse expects a spectral field");
  return Field{f.grid, dft_backward(f.values), Domain::physical};
}

inline Field to_spectral(const Field& f) {
  return f.kind == Domain::spectral ? f : transform(f, Direction::forward);
}

inline Field to_physical(const Field& f) {
  return f.kind == Domain::physical ? f : transform(f, Direction::inverse);
}

/// Multiplies the spectrum by symbol(xi_k, slot) and returns a field in the
/// same domain as the input.
template <class Symbol>
Field apply_symbol(const Field& f, Symbol&& symbol) {
  Field hat = to_spectral(f);
  const auto ks = hat.grid->wavenumbers();
  for (std::size_t i = 0; i < hat.values.size(); ++i) hat.values[i] *= symbol(ks[i], i);
  return f.kind == Domain::physical ? to_physical(hat) : hat;
}

/// |xi|^a applied spectrally. For a < 0 the zero mode must be dropped unless
/// it already vanishes.
inline Field fractional_op(const Field& f, double a, ZeroModeRule zero_mode) {
  Field hat = to_spectral(f);
  if (a < 0.0 && zero_mode == ZeroModeRule::keep && std::abs(hat.values[0]) > 1e-12) {
    throw SingularZeroMode("fractional_op: negative order with nonzero mean and rule 'keep'");
  }
  const auto ks = hat.grid->wavenumbers();
  for (std::size_t i = 1; i < hat.values.size(); ++i) hat.values[i] *= std::pow(std::abs(ks[i]), a);
  if (zero_mode == ZeroModeRule::zero) {
    hat.values[0] = 0.0;
  } else if (a > 0.0) {
    hat.values[0] = 0.0;  // |0|^a = 0
  }
  return f.kind == Domain::physical ? to_physical(hat) : hat;
}

/// d/dx spectrally; the Nyquist mode is annihilated.
inline Field derivative(const Field& f) {
  Field hat = to_spectral(f);
  const auto ks = hat.grid->wavenumbers();
  for (std::size_t i = 0; i < hat.values.size(); ++i) {
    hat.values[i] *= hat.grid->is_nyquist(i) ? Complex(0.0) : Complex(0.0, ks[i]);
  }
  return f.kind == Domain::physical ? to_physical(hat) : hat;
}

/// d^2/dx^2 spectrally (-xi^2, including Nyquist).
inline Field second_derivative(const Field& f) {
  return apply_symbol(f, [](double k, std::size_t) { return Complex(-k * k); });
}

/// 2/3-rule truncation: zero every mode with |k| > M/3.
inline Field dealias(const Field& f) {
  const long cutoff = f.grid->dealias_cutoff();
  const SpectralGrid& g = *f.grid;
  return apply_symbol(f, [&](double, std::size_t i) {
    return std::labs(g.mode_index(i)) > cutoff || g.is_nyquist(i) ? 0.0 : 1.0;
  });
}

inline double sobolev_norm(const Field& f, double m) {
  const Field hat = to_spectral(f);
  const auto ks = hat.grid->wavenumbers();
  double acc = 0.0;
  for (std::size_t i = 0; i < hat.values.size(); ++i) {
    const double w = m == 0.0 ? 1.0 : std::pow(1.0 + ks[i] * ks[i], m);
    acc += w * std::norm(hat.values[i]);
  }
  return std::sqrt(hat.grid->length() * acc);
}

inline double l2_norm(const Field& f) { return sobolev_norm(f, 0.0); }

/// Quadrature inner product (L/M) sum_j a_j conj(b_j) of physical fields.
inline Complex inner(const Field& a, const Field& b) {
  require_same_grid(a, b, "inner");
  const Field pa = to_physical(a);
  const Field pb = to_physical(b);
  Complex acc = 0.0;
  for (std::size_t j = 0; j < pa.values.size(); ++j) acc += pa.values[j] * std::conj(pb.values[j]);
  return acc * pa.grid->dx();
}

/// (L/M) sum_j f_j
inline Complex integral(const Field& f) {
  const Field p = to_physical(f);
  Complex acc = 0.0;
  for (const auto& v : p.values) acc += v;
  return acc * p.grid->dx();
}

inline Complex mean(const Field& f) { return integral(f) / f.grid->length(); }

/// Largest violation of fhat(-xi) = conj(fhat(xi)), relative to max |fhat|.
inline double hermitian_defect(const Field& f) {
  const Field hat = to_spectral(f);
  const SpectralGrid& g = *hat.grid;
  double scale = 0.0;
  for (const auto& c : hat.values) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < hat.values.size(); ++i) {
    const std::size_t j = g.slot_of(-g.mode_index(i));
    worst = std::max(worst, std::abs(hat.values[j] - std::conj(hat.values[i])));
  }
  return worst / scale;
}

// Pointwise algebra on physical fields.

template <class Op>
Field pointwise(const Field& a, const Field& b, Op&& op, const char* where = "pointwise") {
  require_same_grid(a, b, where);
  const Field pa = to_physical(a);
  const Field pb = to_physical(b);
  Field out = Field::zeros(pa.grid);
  for (std::size_t j = 0; j < out.values.size(); ++j) out.values[j] = op(pa.values[j], pb.values[j]);
  return out;
}

template <class Op>
Field map_values(const Field& a, Op&& op) {
  Field out = to_physical(a);
  for (auto& v : out.values) v = op(v);
  return out;
}

inline Field operator+(const Field& a, const Field& b) {
  if (a.kind == Domain::spectral && b.kind == Domain::spectral) {
    require_same_grid(a, b, "operator+");
    Field out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
    return out;
  }
  return pointwise(a, b, std::plus<>{}, "operator+");
}

inline Field operator-(const Field& a, const Field& b) {
  if (a.kind == Domain::spectral && b.kind == Domain::spectral) {
    require_same_grid(a, b, "operator-");
    Field out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
    return out;
  }
  return pointwise(a, b, std::minus<>{}, "operator-");
}

/// Pointwise product in physical space (no dealiasing).
inline Field operator*(const Field& a, const Field& b) { return pointwise(a, b, std::multiplies<>{}, "operator*"); }

inline Field operator*(Complex s, const Field& a) {
  Field out = a;
  for (auto& v : out.values) v *= s;
  return out;
}

inline Field conj(const Field& a) {
  return map_values(a, [](Complex v) { return std::conj(v); });
}

inline Field abs2(const Field& a) {
  return map_values(a, [](Complex v) { return Complex(std::norm(v)); });
}

inline Field real_part(const Field& a) {
  return map_values(a, [](Complex v) { return Complex(v.real()); });
}

inline Field imag_part(const Field& a) {
  return map_values(a, [](Complex v) { return Complex(v.imag()); });
}

inline double max_abs(const Field& a) {
  double m = 0.0;
  for (const auto& v : a.values) m = std::max(m, std::abs(v));
  return m;
}

/// max_j |a_j - b_j| in physical space.
inline double max_abs_diff(const Field& a, const Field& b) {
  require_same_grid(a, b, "max_abs_diff");
  const Field pa = to_physical(a);
  const Field pb = to_physical(b);
  double m = 0.0;
  for (std::size_t j = 0; j < pa.values.size(); ++j) m = std::max(m, std::abs(pa.values[j] - pb.values[j]));
  return m;
}

}  // namespace zakharov
