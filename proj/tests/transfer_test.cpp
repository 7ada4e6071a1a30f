#include "tunnel1d/transfer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "tunnel1d/pauli.hpp"
#include "tunnel1d/potential.hpp"

using namespace tunnel1d;

namespace {

constexpr double kTol = 1e-12;

void expect_pauli_close(const PauliVector& a, const PauliVector& b, double tol) {
  const double scale = std::max(a.max_abs(), b.max_abs());
  EXPECT_LE(std::abs(a.c0 - b.c0), tol * scale);
  EXPECT_LE(std::abs(a.c1 - b.c1), tol * scale);
  EXPECT_LE(std::abs(a.c2 - b.c2), tol * scale);
  EXPECT_LE(std::abs(a.c3 - b.c3), tol * scale);
}

void expect_mat_close(const Mat2& a, const Mat2& b, double tol) {
  const double scale = std::max(a.max_abs(), b.max_abs());
  EXPECT_LE(std::abs(a.m00 - b.m00), tol * scale);
  EXPECT_LE(std::abs(a.m01 - b.m01), tol * scale);
  EXPECT_LE(std::abs(a.m10 - b.m10), tol * scale);
  EXPECT_LE(std::abs(a.m11 - b.m11), tol * scale);
}

// displayed even/odd matrices of the uniform array, built entrywise as the
// independent construction path
Mat2 even_display(const WaveNumberPair& w, int n, double delta, double tau) {
  const double x = (n / 2) * (delta + tau);
  return oracles::display_matrix(w.kappa, w.gamma, x);
}

Mat2 odd_display(const WaveNumberPair& w, int m, double delta, double tau) {
  const double x = ((m + 1) / 2) * delta + ((m - 1) / 2) * tau;
  return oracles::display_matrix(w.gamma, w.kappa, x);
}

}  // namespace

TEST(WaveNumbers, BarrierTopHasVanishingGammaAndDeterminant) {
  const WaveNumberPair w = wave_numbers(40.0, 40.0);
  EXPECT_EQ(w.gamma, cdouble(0.0, 0.0));
  EXPECT_EQ(w.delta_det, cdouble(0.0, 0.0));
}

TEST(WaveNumbers, FreeLevelGivesEqualWaveNumbers) {
  const WaveNumberPair w = wave_numbers(40.0, 0.0);
  EXPECT_NEAR(w.kappa.real(), 6.3245553203367586, 1e-14);
  EXPECT_EQ(w.kappa, w.gamma);
}

TEST(WaveNumbers, EvanescentBranchHasPositiveImaginaryPart) {
  const WaveNumberPair w = wave_numbers(10.0, 40.0);
  EXPECT_EQ(w.gamma.real(), 0.0);
  EXPECT_NEAR(w.gamma.imag(), std::sqrt(30.0), 1e-14);
}

TEST(WaveNumbers, RejectsNonScatteringEnergies) {
  EXPECT_THROW(wave_numbers(0.0, 1.0), std::domain_error);
  EXPECT_THROW(wave_numbers(-3.0, 1.0), std::domain_error);
}

TEST(WaveNumbers, DeterminantIdentityHolds) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> e_dist(0.1, 120.0), v_dist(-20.0, 100.0);
  for (int it = 0; it < 200; ++it) {
    const WaveNumberPair w = wave_numbers(e_dist(rng), v_dist(rng), 1.0);
    const cdouble lhs = w.alpha * w.alpha - w.beta * w.beta;
    EXPECT_LE(std::abs(lhs - w.delta_det), kTol * std::max(1.0, std::abs(w.delta_det)));
  }
}

TEST(EvenOddMatrices, TraceDecompositionOfDisplaysMatchesCoefficientFormulas) {
  // the two independent construction paths of the same boundary matrix:
  // coefficient formulas vs half-trace projection of the entrywise display
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> e_dist(0.5, 90.0), v_dist(1.0, 80.0);
  std::uniform_real_distribution<double> w_dist(0.2, 2.0);
  std::uniform_int_distribution<int> n_dist(0, 6);
  for (int it = 0; it < 300; ++it) {
    const double delta = w_dist(rng), tau = w_dist(rng);
    const WaveNumberPair w = wave_numbers(e_dist(rng), v_dist(rng), 1.0);
    const int n = 2 * n_dist(rng);
    const int m = 2 * n_dist(rng) + 1;
    expect_pauli_close(even_matrix(w, n, delta, tau),
                       decompose(even_display(w, n, delta, tau)), kTol);
    expect_pauli_close(odd_matrix(w, m, delta, tau),
                       decompose(odd_display(w, m, delta, tau)), kTol);
  }
}

TEST(EvenOddMatrices, FirstBoundaryCollapsesToAlphaBeta) {
  const WaveNumberPair w = wave_numbers(9.0, 40.0);
  const PauliVector c = even_matrix(w, 0, 1.0, 1.0);
  EXPECT_LE(std::abs(c.c0 - w.alpha), kTol * std::abs(w.alpha));
  EXPECT_LE(std::abs(c.c1 - w.beta), kTol * std::abs(w.beta));
  EXPECT_LE(std::abs(c.c2), kTol);
  EXPECT_LE(std::abs(c.c3), kTol);
}

TEST(EvenOddMatrices, SingleBarrierOddCoefficients) {
  // m = 1: c = (alpha cos(beta d), -beta cos(alpha d), -beta sin(alpha d),
  //             i alpha sin(beta d))
  const double delta = 1.0;
  const WaveNumberPair w = wave_numbers(50.0, 40.0);
  const PauliVector c = odd_matrix(w, 1, delta, 1.0);
  const cdouble i(0.0, 1.0);
  const double scale = c.max_abs();
  EXPECT_LE(std::abs(c.c0 - w.alpha * std::cos(w.beta * delta)), kTol * scale);
  EXPECT_LE(std::abs(c.c1 + w.beta * std::cos(w.alpha * delta)), kTol * scale);
  EXPECT_LE(std::abs(c.c2 + w.beta * std::sin(w.alpha * delta)), kTol * scale);
  EXPECT_LE(std::abs(c.c3 - i * w.alpha * std::sin(w.beta * delta)), kTol * scale);
}

TEST(EvenOddMatrices, DeterminantEqualsFourKappaGamma) {
  // wide random sweep through the entrywise displays, where the determinant
  // products pair exactly at any position; the Pauli round trip below covers
  // the coefficient route at splits the representation can resolve
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> e_dist(0.5, 90.0), v_dist(1.0, 80.0);
  std::uniform_real_distribution<double> w_dist(0.2, 2.0);
  std::uniform_int_distribution<int> n_dist(0, 6);
  for (int it = 0; it < 200; ++it) {
    const double delta = w_dist(rng), tau = w_dist(rng);
    const WaveNumberPair w = wave_numbers(e_dist(rng), v_dist(rng), 1.0);
    const cdouble de = even_display(w, 2 * n_dist(rng), delta, tau).det();
    const cdouble dm = odd_display(w, 2 * n_dist(rng) + 1, delta, tau).det();
    EXPECT_LE(std::abs(de - w.delta_det), kTol * std::abs(w.delta_det));
    EXPECT_LE(std::abs(dm - w.delta_det), kTol * std::abs(w.delta_det));
  }
  // Pauli-coefficient route at first-period boundaries (moderate phase split)
  for (int it = 0; it < 100; ++it) {
    const WaveNumberPair w = wave_numbers(e_dist(rng), v_dist(rng), 1.0);
    const cdouble de = compose(even_matrix(w, 0, 0.7, 0.4)).det();
    const cdouble dm = compose(odd_matrix(w, 1, 0.3, 0.4)).det();
    EXPECT_LE(std::abs(de - w.delta_det), kTol * std::abs(w.delta_det));
    EXPECT_LE(std::abs(dm - w.delta_det), 1e-11 * std::abs(w.delta_det));
  }
}

TEST(EvenOddMatrices, NoStepMeansDiagonalPhaseOnly) {
  const WaveNumberPair w = wave_numbers(25.0, 0.0);  // kappa == gamma
  EXPECT_EQ(w.beta, cdouble(0.0, 0.0));
  const Mat2 m = compose(even_matrix(w, 2, 1.0, 1.0));
  EXPECT_LE(std::abs(m.m01), kTol);
  EXPECT_LE(std::abs(m.m10), kTol);
}

TEST(EvenOddMatrices, ParityIsEnforced) {
  const WaveNumberPair w = wave_numbers(9.0, 40.0);
  EXPECT_THROW(even_matrix(w, 1, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(even_matrix(w, -2, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(odd_matrix(w, 2, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(odd_matrix(w, -1, 1.0, 1.0), std::invalid_argument);
}

TEST(EvenOddMatrices, NonsingularAwayFromTheLevel) {
  std::mt19937 rng(43);
  std::uniform_real_distribution<double> e_dist(0.5, 90.0), v_dist(1.0, 80.0);
  for (int it = 0; it < 100; ++it) {
    double e = e_dist(rng), v = v_dist(rng);
    if (std::abs(e - v) < 1e-3) continue;
    const WaveNumberPair w = wave_numbers(e, v, 1.0);
    EXPECT_GT(std::abs(compose(even_matrix(w, 0, 1.0, 1.0)).det()), 0.0);
  }
}

TEST(GeneralMatrix, EqualWaveNumbersGiveDiagonalPhases) {
  const cdouble k(2.5, 0.0);
  const GeneralTransfer t = general_matrix(k, k, 0.8);
  const Mat2 m = compose(t.matrix);
  EXPECT_LE(std::abs(m.m01), kTol);
  EXPECT_LE(std::abs(m.m10), kTol);
  EXPECT_LE(std::abs(m.m00 - 2.0 * k), kTol * std::abs(2.0 * k));  // alpha, zero phase diff
  EXPECT_LE(std::abs(t.prefactor - 0.5 / k), kTol);
}

TEST(GeneralMatrix, DeterminantIsFourKappaProduct) {
  std::mt19937 rng(47);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int it = 0; it < 200; ++it) {
    cdouble kl(u(rng), 0.0), kr(u(rng), 0.0);
    if (std::abs(kl) < 0.1 || std::abs(kr) < 0.1) continue;
    if (u(rng) > 0) kl = cdouble(0.0, std::abs(kl.real()));
    if (u(rng) > 0) kr = cdouble(0.0, std::abs(kr.real()));
    const double x = u(rng) * 0.2;
    const cdouble expected = 4.0 * kl * kr;
    // entrywise display at any position
    EXPECT_LE(std::abs(oracles::display_matrix(kl, kr, x).det() - expected),
              kTol * std::abs(expected));
    // Pauli route where the position split stays resolvable
    const double split = 2.0 * std::max(std::abs(kl.imag()), std::abs(kr.imag())) *
                         std::abs(x);
    if (split < 5.0) {
      const GeneralTransfer t = general_matrix(kl, kr, x);
      EXPECT_LE(std::abs(compose(t.matrix).det() - expected), kTol * std::abs(expected));
    }
  }
}

TEST(GeneralMatrix, SpecializesToTheUniformEvenOddFamily) {
  // the four boundaries of a double-barrier array, general vs even/odd
  const UniformBarrierSpec spec{2, 1.0, 1.0, 40.0, 1.0};
  const PiecewisePotential pot = build_uniform(spec);
  const double energy = 9.0;
  const WaveNumberPair w = wave_numbers(energy, spec.height, 1.0);

  const PauliVector via_even_odd[4] = {
      even_matrix(w, 0, 1.0, 1.0), odd_matrix(w, 1, 1.0, 1.0),
      even_matrix(w, 2, 1.0, 1.0), odd_matrix(w, 3, 1.0, 1.0)};
  for (int i = 0; i < 4; ++i) {
    const cdouble kl = (i % 2 == 0) ? w.kappa : w.gamma;
    const cdouble kr = (i % 2 == 0) ? w.gamma : w.kappa;
    const GeneralTransfer t = general_matrix(kl, kr, pot.boundaries[i]);
    expect_pauli_close(t.matrix, via_even_odd[i], kTol);
  }
}

TEST(GeneralMatrix, ZeroLeftWaveNumberIsRedirected) {
  EXPECT_THROW(general_matrix(cdouble{}, cdouble(1.0, 0.0), 0.0), std::domain_error);
}

TEST(DegenerateMatrices, ZeroWidthRegionIsTransparent) {
  const cdouble k(2.0, 0.0);
  for (double x : {0.0, 0.7, -1.3}) {
    const Mat2 prod = degenerate_matrix(DegenerateSide::enter_flat, k, x) *
                      degenerate_matrix(DegenerateSide::exit_flat, k, x);
    expect_mat_close(prod, Mat2::identity(), 1e-13);
  }
}

TEST(DegenerateMatrices, WidthFormMatchesPositionFormAtOrigin) {
  // with the left region referenced at the boundary the two conventions agree
  const cdouble k(3.1, 0.0);
  expect_mat_close(degenerate_enter_width(k, 0.0).unit,
                   degenerate_matrix(DegenerateSide::enter_flat, k, 0.0), 1e-14);
}

TEST(DegenerateMatrices, SingleBarrierAtTheTopMatchesHandDerivedForm) {
  // barrier on [0, delta] with E = V0: chain enter*exit with A_right = 1
  // reproduces T = 1 / (1 + kappa^2 delta^2 / 4)
  const double v0 = 40.0, delta = 1.0;
  const double kappa = std::sqrt(v0);
  const cdouble k(kappa, 0.0);
  const Mat2 total = degenerate_matrix(DegenerateSide::enter_flat, k, 0.0) *
                     degenerate_matrix(DegenerateSide::exit_flat, k, delta);
  const Vec2 v0_amp = total * Vec2{1.0, 0.0};
  const double t = 1.0 / std::norm(v0_amp.a);
  EXPECT_NEAR(t, 1.0 / (1.0 + kappa * kappa * delta * delta / 4.0), 1e-12);
}

TEST(DegenerateMatrices, MatchTheTwoSidedEnergyLimit) {
  // |T(V0 +- eps) - T_degenerate(V0)| shrinks with eps (Richardson-style)
  const double v0 = 40.0, delta = 1.0;
  const double kappa = std::sqrt(v0);
  const double t_deg = 1.0 / (1.0 + kappa * kappa * delta * delta / 4.0);
  double prev_gap = 1.0;
  for (double eps : {1e-4, 1e-5, 1e-6}) {
    for (double sign : {-1.0, 1.0}) {
      const double energy = v0 + sign * eps;
      const auto chain = oracles::raw_chain(
          tunnel1d::build_uniform({1, delta, 1.0, v0, 1.0}), energy);
      const Vec2 left = (chain.prefactor * chain.product) * Vec2{1.0, 0.0};
      const double t = 1.0 / std::norm(left.a);
      EXPECT_LT(std::abs(t - t_deg), prev_gap);
    }
    prev_gap = std::abs(eps) * 10.0;  // gap shrinks linearly in eps
  }
}

TEST(ScaledConstruction, InflatedFormsAgreeWithPlainOnes) {
  const cdouble kl(1.5, 0.0), kr(0.0, 4.0);
  const double x = 3.0;
  const ScaledPauli sp = boundary_pauli_scaled(kl, kr, x);
  const double s = std::exp(sp.log_scale);
  const PauliVector plain = decompose(oracles::display_matrix(kl, kr, x));
  expect_pauli_close({s * sp.unit.c0, s * sp.unit.c1, s * sp.unit.c2, s * sp.unit.c3},
                     plain, 1e-13);
}

TEST(ScaledConstruction, StaysFiniteWhereThePlainFormOverflows) {
  // deep inside a long array: |Im alpha| x ~ 12600, e^{that} overflows by
  // thousands of orders of magnitude
  const cdouble kl(0.05, 0.0), kr(0.0, 6.32);
  const double x = 1999.0;
  const ScaledPauli sp = boundary_pauli_scaled(kl, kr, x);
  EXPECT_TRUE(std::isfinite(sp.log_scale));
  EXPECT_GT(sp.log_scale, 1e4);
  EXPECT_TRUE(std::isfinite(sp.unit.max_abs()));
  const ScaledMat2 sm = boundary_mat2_width_scaled(kr, kl, 1.0);
  EXPECT_TRUE(std::isfinite(sm.log_scale));
  EXPECT_TRUE(std::isfinite(sm.unit.max_abs()));
}
