#include "zakharov/estimates.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"

namespace zakharov {
namespace {

SparseSpectrum random_sparse(std::mt19937_64& rng, double L, long kmax) {
  std::normal_distribution<double> normal;
  SparseSpectrum s;
  s.length = L;
  for (long k = -kmax; k <= kmax; ++k) {
    s.modes.push_back(k);
    s.coeffs.push_back(Complex(normal(rng), normal(rng)) * std::exp(-0.1 * std::abs(static_cast<double>(k))));
  }
  return s;
}

double sobolev(const SparseSpectrum& s, double m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.modes.size(); ++i) acc += std::pow(japanese_bracket(s.xi(i)), 2 * m) * std::norm(s.coeffs[i]);
  return std::sqrt(s.length * acc);
}

const std::vector<double> kTimes = uniform_times(-1.0, 1.0 / 256, 513);

TEST(XsbNorm, FactorizesOnFreeSolutions) {
  std::mt19937_64 rng(1);
  const CutoffWindow w = make_cutoff(0.4, kTimes);
  for (Phase phase : {Phase::schrodinger, Phase::wave_plus, Phase::wave_minus}) {
    for (double m : {0.0, 1.0}) {
      double lo = 1e300, hi = 0.0;
      for (int trial = 0; trial < 20; ++trial) {
        const SparseSpectrum f = random_sparse(rng, 2 * kPi, 12);
        const double r = xsb_norm(free_evolution(f, phase, kTimes), NormSpec{m, 0.7, phase}, w) / sobolev(f, m);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      EXPECT_LT((hi - lo) / hi, 1e-6);
    }
  }
}

TEST(YNorm, FactorizesOnFreeSolutions) {
  std::mt19937_64 rng(2);
  const CutoffWindow w = make_cutoff(0.3, kTimes);
  double lo = 1e300, hi = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const SparseSpectrum f = random_sparse(rng, 6.0, 10);
    const double r = y_norm(free_evolution(f, Phase::schrodinger, kTimes), NormSpec{0.5, 0.0}, w) / sobolev(f, 0.5);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  EXPECT_LT((hi - lo) / hi, 1e-6);
}

// With m = b = 0 the norm is the space-time L^2 norm of psi f.
TEST(XsbNorm, ParsevalAtZeroOrder) {
  std::mt19937_64 rng(3);
  const SparseSpectrum f = random_sparse(rng, 5.0, 8);
  const Modulation a{0.3, 11.0, 0.2};
  const SpaceTimeField st = free_evolution(f, Phase::schrodinger, kTimes, a);
  const CutoffWindow w = make_cutoff(0.45, kTimes);
  double direct = 0.0;
  for (std::size_t j = 0; j < kTimes.size(); ++j) {
    const double env = w(kTimes[j]) * a(kTimes[j]);
    direct += env * env * (1.0 / 256) * f.l2() * f.l2();
  }
  const double norm = xsb_norm(st, NormSpec{0.0, 0.0, Phase::schrodinger}, w);
  EXPECT_LT(std::abs(norm - std::sqrt(direct)) / norm, 0.02);
  EXPECT_LT(std::abs(norm - std::sqrt(direct)) / norm, 1e-10);
}

TEST(XsbNorm, PhaseMismatchIsPenalized) {
  SparseSpectrum f;
  f.length = 2 * kPi;
  f.modes = {8};
  f.coeffs = {Complex(1.0)};
  const auto t = uniform_times(-1.0, 1.0 / 1024, 2049);
  const CutoffWindow w = make_cutoff(0.4, t);
  const SpaceTimeField wave = free_evolution(f, Phase::wave_plus, t);
  const double matched = xsb_norm(wave, NormSpec{0.0, 0.6, Phase::wave_plus}, w);
  const double mismatched = xsb_norm(wave, NormSpec{0.0, 0.6, Phase::schrodinger}, w);
  EXPECT_GT(mismatched / matched, 1.5);
}

TEST(XsbNorm, RejectsWindowOutsideRange) {
  std::mt19937_64 rng(4);
  const SpaceTimeField st = free_evolution(random_sparse(rng, 2 * kPi, 4), Phase::schrodinger, kTimes);
  EXPECT_THROW(xsb_norm(st, NormSpec{}, make_cutoff(0.6, kTimes)), InvalidArgument);
  EXPECT_THROW(xsb_norm(st, NormSpec{}, make_cutoff(0.3, kTimes, 0.5)), InvalidArgument);
  EXPECT_NO_THROW(xsb_norm(st, NormSpec{}, make_cutoff(0.5, kTimes)));
}

TEST(YNorm, ZeroTrajectory) {
  SparseSpectrum z;
  z.modes = {0, 1};
  z.coeffs = {Complex(0.0), Complex(0.0)};
  const SpaceTimeField st = free_evolution(z, Phase::schrodinger, kTimes);
  EXPECT_EQ(y_norm(st, NormSpec{}, make_cutoff(0.3, kTimes)), 0.0);
  EXPECT_EQ(xsb_norm(st, NormSpec{0.0, 0.6}, make_cutoff(0.3, kTimes)), 0.0);
}

// Generic space-time fields: each mode a random sum of temporal exponentials.
SpaceTimeField random_space_time(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SpaceTimeField f;
  f.grid = make_grid(2 * kPi, 16);
  f.times = kTimes;
  for (long k = -5; k <= 5; ++k) {
    ComplexVector s(kTimes.size());
    for (int r = 0; r < 3; ++r) {
      const Complex c(normal(rng), normal(rng));
      const double omega = 120.0 * (unit(rng) - 0.5);
      for (std::size_t j = 0; j < s.size(); ++j) s[j] += c * std::exp(Complex(0.0, -omega * kTimes[j]));
    }
    f.slots.push_back(f.grid->slot_of(k));
    f.series.push_back(std::move(s));
  }
  return f;
}

// Y^m <= C X^{m,1/2+}: C fitted (with a 25% margin) on 50 samples, then
// asserted on 50 fresh ones.
TEST(YNorm, BoundedByXHalfPlus) {
  std::mt19937_64 rng(5);
  const CutoffWindow w = make_cutoff(0.4, kTimes);
  auto ratio = [&] {
    const SpaceTimeField f = random_space_time(rng);
    return y_norm(f, NormSpec{0.0, 0.0}, w) / xsb_norm(f, NormSpec{0.0, 0.6}, w);
  };
  double fitted = 0.0;
  for (int i = 0; i < 50; ++i) fitted = std::max(fitted, ratio());
  const double C = 1.25 * fitted;
  for (int i = 0; i < 50; ++i) EXPECT_LE(ratio(), C);
}

TEST(XsbNorm, TrajectoryOverloadMatchesSpaceTimeField) {
  std::mt19937_64 rng(6);
  const auto g = make_grid(4 * kPi, 32);
  const FirstOrderState f0 = to_first_order(testing::random_state(g, rng, 6));
  const Trajectory tr = solve(f0, SolverConfig{1.0 / 128, 2.0, 1, true});
  const CutoffWindow w = make_cutoff(0.4, tr.times, 1.0);
  for (Phase p : {Phase::schrodinger, Phase::wave_plus, Phase::wave_minus}) {
    const NormSpec spec{0.5, 0.6, p};
    EXPECT_EQ(xsb_norm(tr, spec, w), xsb_norm(space_time_field(tr, component_of(p)), spec, w));
  }
}

// ---------------------------------------------------------------------------

std::vector<double> dyadic_deltas() {
  std::vector<double> d;
  for (int i = 0; i <= 5; ++i) d.push_back(std::ldexp(1.0, -i));
  return d;
}

TEST(CutoffScaling, ExtremalProfileRecoversExponentGap) {
  const double b = 0.4, bp = 0.2;
  const SpaceTimeField f = singular_profile(0.5 - b - 0.02, 4.5, std::ldexp(1.0, -12), Phase::schrodinger);
  const auto d = dyadic_deltas();
  EXPECT_NEAR(cutoff_scaling_exponent(f, 0.0, b, bp, d, Phase::schrodinger), b - bp, 0.15);
  EXPECT_NEAR(cutoff_scaling_exponent(f, 0.0, b, b, d, Phase::schrodinger), 0.0, 0.15);
}

// For a smooth solver trajectory the norms decay at least like delta^{b-b'}.
TEST(CutoffScaling, SolverTrajectoryRespectsBound) {
  const auto g = make_grid(8 * kPi, 64);
  const FirstOrderState f0 = to_first_order(sample_rough_data(g, RoughDataParams{0.9, 0.01, 0.5, 3}));
  const Trajectory tr = solve(f0, SolverConfig{1.0 / 1024, 4.25, 1, true});
  const SpaceTimeField st = space_time_field(tr, Component::u);
  const double slope = cutoff_scaling_exponent(st, 0.0, 0.4, 0.2, dyadic_deltas(), Phase::schrodinger, 2.125);
  EXPECT_GE(slope, 0.2 - 0.15);
}

TEST(CutoffScaling, RejectsViolatedHypotheses) {
  const SpaceTimeField f = singular_profile(0.05, 4.5, 1.0 / 256, Phase::schrodinger);
  const auto d = dyadic_deltas();
  EXPECT_THROW(cutoff_scaling_exponent(f, 0.0, 0.2, 0.3, d, Phase::schrodinger), InvalidArgument);
  EXPECT_THROW(cutoff_scaling_exponent(f, 0.0, 0.5, 0.2, d, Phase::schrodinger), InvalidArgument);
  EXPECT_THROW(cutoff_scaling_exponent(f, 0.0, 0.4, -0.1, d, Phase::schrodinger), InvalidArgument);
  const std::vector<double> bad{2.0, 1.0, 0.5};
  EXPECT_THROW(cutoff_scaling_exponent(f, 0.0, 0.4, 0.2, bad, Phase::schrodinger), InvalidArgument);
}

// ---------------------------------------------------------------------------

TEST(Strichartz, QuadraticCaseIsBelowOne) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const BandPacket bp{8.0 + trial, 2.0, 0.1 * trial};
    const SparseSpectrum data = band_packet(16 * kPi, bp);
    const double r = strichartz_trial_ratio(data, Modulation{0.2, 3.0, 0.5}, 2.0, 0.25, 0.1, LhsQuadrature{0.05});
    EXPECT_LE(r, 1.0 + 1e-3);
    EXPECT_GT(r, 0.5);
  }
}

// Spatially constant data: the ratio reduces to temporal factors,
// L^{1/p - 1/2} ||psi||_{L^p_t} / ||psi||_{H^b_t}, with the temporal Sobolev
// norm evaluated here by direct quadrature of the Fourier integral.
TEST(Strichartz, ConstantModeMatchesTemporalFactors) {
  const double L = 2 * kPi, delta = 0.25, p = 6.0, b = 0.6;
  SparseSpectrum c;
  c.length = L;
  c.modes = {0};
  c.coeffs = {Complex(1.0)};
  const double r = strichartz_trial_ratio(c, Modulation{}, p, delta, 0.1, LhsQuadrature{0.0, 0.0, 1.0 / 4096});

  const double h = 1.0 / 8192;
  std::vector<double> t, psi;
  for (double s = -2 * delta; s <= 2 * delta; s += h) {
    t.push_back(s);
    psi.push_back(bump_cutoff(s / delta));
  }
  double lp = 0.0;
  for (double v : psi) lp += std::pow(v, p) * h;
  double hb = 0.0;
  const double dsig = 0.05;
  for (double sigma = -600.0; sigma <= 600.0; sigma += dsig) {
    Complex ft = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) ft += psi[j] * std::exp(Complex(0.0, -sigma * t[j])) * h;
    hb += std::pow(japanese_bracket(sigma), 2 * b) * std::norm(ft) * dsig / (2 * kPi);
  }
  const double expected = std::pow(L, 1.0 / p - 0.5) * std::pow(lp, 1.0 / p) / std::sqrt(hb);
  EXPECT_NEAR(r, expected, 1e-3 * expected);
}

TEST(Strichartz, EnsembleIsDeterministicAndThreadIndependent) {
  EnsembleSpec e;
  e.trials = 6;
  e.octaves = 2;
  e.first_octave = 3;
  e.seed = 11;
  const RatioStats a = strichartz_ratio(e, 6.0);
  e.threads = 3;
  const RatioStats b = strichartz_ratio(e, 6.0);
  ASSERT_EQ(a.scales.size(), 2u);
  for (std::size_t i = 0; i < a.scales.size(); ++i) EXPECT_EQ(a.scales[i].ratios, b.scales[i].ratios);
  EXPECT_EQ(a.growth_slope, b.growth_slope);
  EXPECT_LT(a.worst_spread, 4.0);
  EXPECT_THROW(strichartz_trial_ratio(band_packet(10.0, BandPacket{}), {}, 7.0, 0.25, 0.1, {}), InvalidArgument);
}

// ---------------------------------------------------------------------------

TEST(BilinearWS, ZeroFrequencySchroedingerFactorGivesZero) {
  SparseSpectrum u;
  u.length = 16 * kPi;
  u.modes = {0};
  u.coeffs = {Complex(1.0)};
  const SparseSpectrum n = band_packet(16 * kPi, BandPacket{1.0, 1.0, 0.0});
  EXPECT_EQ(bilinear_ws_trial_ratio(u, n, Phase::wave_plus, {}, {}, WsVariant::full_modulation, 0.25, 0.1, 0.01,
                                    LhsQuadrature{0.01}),
            0.0);
  EXPECT_THROW(bilinear_ws_trial_ratio(u, n, Phase::schrodinger, {}, {}, WsVariant::full_modulation, 0.25, 0.1, 0.01, {}),
               InvalidArgument);
}

TEST(BilinearWS, ReflectedWaveFactorGivesSameStatistics) {
  EnsembleSpec e;
  e.trials = 20;
  e.octaves = 2;
  e.first_octave = 3;
  e.seed = 5;
  const RatioStats a = bilinear_ws_ratio(e);
  const RatioStats b = bilinear_ws_ratio(e, WsOptions{WsVariant::full_modulation, true});
  for (std::size_t i = 0; i < a.scales.size(); ++i) {
    EXPECT_NEAR(b.scales[i].median / a.scales[i].median, 1.0, 0.25);
  }
}

TEST(BilinearWS, VariantsAreFinite) {
  EnsembleSpec e;
  e.trials = 4;
  e.octaves = 2;
  e.first_octave = 2;
  for (WsVariant v : {WsVariant::full_modulation, WsVariant::endpoint_schrodinger, WsVariant::endpoint_both}) {
    const RatioStats r = bilinear_ws_ratio(e, WsOptions{v, false});
    for (const auto& s : r.scales) {
      EXPECT_GT(s.median, 0.0);
      EXPECT_TRUE(std::isfinite(s.max));
    }
  }
}

TEST(BilinearSS, RejectsViolatedSeparation) {
  SparseSpectrum low;
  low.length = 16 * kPi;
  low.modes = {0};
  low.coeffs = {Complex(1.0)};
  const SparseSpectrum high = band_packet(16 * kPi, BandPacket{20.0, 4.0, 0.0});
  EXPECT_THROW(bilinear_ss_trial_ratio(high, low, {}, {}, SsVariant::full_modulation, 0.25, 0.1, 0.01, {}),
               InvalidArgument);
  const SparseSpectrum near = band_packet(16 * kPi, BandPacket{12.0, 4.0, 0.0});
  EXPECT_THROW(bilinear_ss_trial_ratio(high, near, {}, {}, SsVariant::full_modulation, 0.25, 0.1, 0.01, {}),
               InvalidArgument);
  EnsembleSpec e;
  e.trials = 1;
  EXPECT_THROW(bilinear_ss_ratio(e, SsOptions{SsVariant::full_modulation, {1, 2, 3}, false}), InvalidArgument);
}

TEST(BilinearSS, ControlRunIsReported) {
  EnsembleSpec e;
  e.trials = 4;
  const RatioStats r = bilinear_ss_ratio(e, SsOptions{SsVariant::endpoint_both, {2, 3}, true});
  ASSERT_EQ(r.scales.size(), 2u);
  for (const auto& s : r.scales) EXPECT_GT(s.median, 0.0);
}

TEST(Ensemble, RejectsDegenerateSpecs) {
  EnsembleSpec e;
  e.trials = 0;
  EXPECT_THROW(strichartz_ratio(e, 6.0), InvalidArgument);
  e.trials = 1;
  e.octaves = 0;
  EXPECT_THROW(bilinear_ws_ratio(e), InvalidArgument);
}

}  // namespace
}  // namespace zakharov
