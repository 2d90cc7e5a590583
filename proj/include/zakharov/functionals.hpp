#pragma once

// Conserved quantities, the modified energy E(Iu, In+), its time derivative
// and the split of that derivative into the three commutator terms.

#include <array>
#include <cmath>

#include "zakharov/errors.hpp"
#include "zakharov/imethod.hpp"
#include "zakharov/spectral.hpp"
#include "zakharov/state.hpp"

namespace zakharov {

struct EnergyReport {
  double mass = 0.0;
  double kinetic = 0.0;   ///< ||u_x||^2
  double wave = 0.0;      ///< (||n||^2 + ||v||^2) / 2
  double coupling = 0.0;  ///< int n |u|^2 dx
  double total = 0.0;
};

/// ||u||_{L^2}
inline double mass(const Field& u) { return l2_norm(u); }

/// ||f_x||^2 = L sum xi^2 |fhat|^2
inline double kinetic_energy(const Field& f) {
  const Field hat = to_spectral(f);
  const auto ks = hat.grid->wavenumbers();
  double acc = 0.0;
  for (std::size_t i = 0; i < hat.values.size(); ++i) acc += ks[i] * ks[i] * std::norm(hat.values[i]);
  return hat.grid->length() * acc;
}

inline EnergyReport energy(const ZakharovState& s) {
  EnergyReport r;
  r.mass = mass(s.u);
  r.kinetic = kinetic_energy(s.u);
  const double nn = l2_norm(s.n);
  const double vv = l2_norm(s.v);
  r.wave = 0.5 * (nn * nn + vv * vv);
  r.coupling = inner(real_part(s.n), abs2(s.u)).real();
  r.total = r.kinetic + r.wave + r.coupling;
  return r;
}

/// E(u, n+) = ||A^{1/2} u||^2 + ||n+||^2 / 2 + (1/2) int (n+ + conj n+) |u|^2 dx
inline double energy_plus(const Field& u, const Field& n_plus) {
  require_same_grid(u, n_plus, "energy_plus");
  const double np = l2_norm(n_plus);
  const Field twice_n = n_plus + conj(n_plus);
  return kinetic_energy(u) + 0.5 * np * np + 0.5 * inner(twice_n, abs2(u)).real();
}

/// E(Iu, In+) = ||(Iu)_x||^2 + ||In+||^2 / 2 + (1/2) int I(n+ + conj n+) |Iu|^2 dx.
/// The coupling density is |Iu|^2, not I(|u|^2).
inline double modified_energy(const FirstOrderState& f, const Multiplier& m) {
  const Field Iu = apply_I(f.u, m);
  const Field In_plus = apply_I(f.n_plus, m);
  const Field I_twice_n = apply_I(f.n_plus + conj(f.n_plus), m);
  const double np = l2_norm(In_plus);
  return kinetic_energy(Iu) + 0.5 * np * np + 0.5 * inner(I_twice_n, abs2(Iu)).real();
}

/// How quadratic densities are formed. With dealiasing on, |u|^2-type
/// densities are truncated by the 2/3 rule; n*u is always the collocation
/// product, matching the exact phase rotation used by the solver.
struct ProductRule {
  bool dealias = true;

  Field density(const Field& u) const { return dealias ? zakharov::dealias(abs2(u)) : abs2(u); }
};

namespace detail {

// Shared pieces of the flux: In+, (Iu), I(nu), D = I(nu) - In Iu, and
// W = A^{1/2}(|Iu|^2 - I|u|^2) with densities formed per the product rule.
struct FluxTerms {
  Field In_plus;
  Field Iu;
  Field Inu;
  Field D;
  Field W;
};

inline FluxTerms flux_terms(const FirstOrderState& f, const Multiplier& m, ProductRule rule) {
  require_same_grid(f.u, f.n_plus, "flux");
  const Field n = real_part(f.n_plus);  // (n+ + conj n+)/2
  const Field u = to_physical(f.u);
  FluxTerms t;
  t.In_plus = apply_I(to_physical(f.n_plus), m);
  t.Iu = apply_I(u, m);
  t.Inu = apply_I(n * u, m);
  t.D = t.Inu - apply_I(n, m) * t.Iu;
  t.W = fractional_op(rule.density(t.Iu) - apply_I(rule.density(u), m), 1.0, ZeroModeRule::zero);
  return t;
}

}  // namespace detail

/// d/dt E(Iu, In+) along the flow, with Iu_t taken from the I-filtered
/// Schroedinger equation, Iu_t = i (Iu)_xx - i I(nu):
///   Re< I(n+ + conj n+) Iu - I((n+ + conj n+) u), Iu_t >
/// + Re< In+, i A^{1/2}(|Iu|^2 - I|u|^2) >.
inline double modified_energy_flux(const FirstOrderState& f, const Multiplier& m, ProductRule rule = {}) {
  const auto t = detail::flux_terms(f, m, rule);
  const Field Iu_t = Complex(0.0, 1.0) * second_derivative(t.Iu) - Complex(0.0, 1.0) * t.Inu;
  const Complex I2(2.0);
  const double commutator = inner(I2 * (t.Iu * apply_I(real_part(f.n_plus), m)) - I2 * t.Inu, Iu_t).real();
  const double wave = inner(t.In_plus, Complex(0.0, 1.0) * t.W).real();
  return commutator + wave;
}

/// Signed contributions of the three commutator integrals to the flux, so that
/// their sum equals modified_energy_flux:
///   [0] Im int In+ A^{1/2}(|Iu|^2 - I|u|^2) dx
///   [1] 2 Im int (Iu)_xx conj(I(nu) - In Iu) dx
///   [2] -2 Im int I(nu) conj(I(nu) - In Iu) dx
inline std::array<double, 3> flux_components(const FirstOrderState& f, const Multiplier& m, ProductRule rule = {}) {
  const auto t = detail::flux_terms(f, m, rule);
  const Complex c18 = integral(t.In_plus * t.W);
  const Complex c19 = integral(second_derivative(t.Iu) * conj(t.D));
  const Complex c20 = integral(t.Inu * conj(t.D));
  return {c18.imag(), 2.0 * c19.imag(), -2.0 * c20.imag()};
}

/// ||u||_{L^4}^4 / (||u_x|| ||u||^3 + L^{-1} ||u||^4), the Gagliardo-Nirenberg
/// ratio with the additive torus term that makes constants admissible.
inline double gn_ratio(const Field& u) {
  const double m = mass(u);
  if (!(m > 0.0)) throw InvalidArgument("gn_ratio: zero field");
  const Field p = to_physical(u);
  double l4 = 0.0;
  for (const auto& v : p.values) l4 += std::norm(v) * std::norm(v);
  l4 *= p.grid->dx();
  const double ux = std::sqrt(kinetic_energy(u));
  return l4 / (ux * m * m * m + m * m * m * m / p.grid->length());
}

}  // namespace zakharov
