#pragma once

#include <cmath>
#include <stdexcept>

#include "tunnel1d/mat2.hpp"
#include "tunnel1d/pauli.hpp"

namespace tunnel1d {

/// Wave numbers of the well/barrier pair of a uniform array, plus the
/// derived combinations used by every transfer matrix. delta_det = 4 kappa
/// gamma is also the determinant of each boundary matrix; it vanishes only
/// at E = V where the degenerate (linear-solution) matching takes over.
struct WaveNumberPair {
  cdouble kappa{};      // in the wells, V = 0
  cdouble gamma{};      // inside the barriers
  cdouble alpha{};      // kappa + gamma
  cdouble beta{};       // kappa - gamma
  cdouble delta_det{};  // alpha^2 - beta^2 = 4 kappa gamma
};

/// Principal branch wave number sqrt(unit_factor * (E - V)): real >= 0 when
/// propagating, +i|.| when evanescent so e^{i k x} decays to the right.
inline cdouble complex_wave_number(double energy, double level, double unit_factor) {
  const double w2 = unit_factor * (energy - level);
  if (w2 >= 0.0) return {std::sqrt(w2), 0.0};
  return {0.0, std::sqrt(-w2)};
}

inline WaveNumberPair wave_numbers(double energy, double level, double unit_factor = 1.0) {
  if (!(energy > 0.0))
    throw std::domain_error("wave_numbers: no scattering state, energy must be > 0");
  if (!(unit_factor > 0.0))
    throw std::invalid_argument("wave_numbers: unit_factor must be > 0");
  WaveNumberPair w;
  w.kappa = complex_wave_number(energy, 0.0, unit_factor);
  w.gamma = complex_wave_number(energy, level, unit_factor);
  w.alpha = w.kappa + w.gamma;
  w.beta = w.kappa - w.gamma;
  w.delta_det = 4.0 * w.kappa * w.gamma;
  return w;
}

/// Boundary matrix with its overall magnitude factored out:
/// matrix = exp(log_scale) * compose(unit). Needed because the raw entries
/// carry e^{|Im k| * x} position factors that overflow long before the
/// physical chain product does.
struct ScaledPauli {
  PauliVector unit{};
  double log_scale = 0.0;
};

struct ScaledMat2 {
  Mat2 unit{};
  double log_scale = 0.0;
};

namespace detail {

/// The four phase factors of one boundary at position x between wave
/// numbers kl (left) and kr (right), all scaled by exp(-s) with
/// s = max real exponent, so every entry magnitude stays <= O(|k|).
struct BoundaryPhases {
  cdouble e_beta_m, e_beta_p;    // e^{-i beta x - s}, e^{+i beta x - s}
  cdouble e_alpha_m, e_alpha_p;  // e^{-i alpha x - s}, e^{+i alpha x - s}
  double s;
};

inline cdouble exp_shifted(cdouble w, double s) {
  // exp(w - s) with w.real() - s <= 0 by construction of s
  const double mag = std::exp(w.real() - s);
  return {mag * std::cos(w.imag()), mag * std::sin(w.imag())};
}

inline BoundaryPhases boundary_phases(cdouble alpha, cdouble beta, double x) {
  const cdouble i(0.0, 1.0);
  const cdouble wbm = -i * beta * x, wbp = i * beta * x;
  const cdouble wam = -i * alpha * x, wap = i * alpha * x;
  const double s = std::max(std::max(wbm.real(), wbp.real()),
                            std::max(wam.real(), wap.real()));
  return {exp_shifted(wbm, s), exp_shifted(wbp, s),
          exp_shifted(wam, s), exp_shifted(wap, s), s};
}

}  // namespace detail

/// Pauli coefficients of the boundary matrix at position x joining wave
/// number kl (left region) to kr (right region), scaled form. The full
/// matrix, including the 1/(2 kl) prefactor applied by the caller, maps the
/// right region's amplitude pair to the left one's.
inline ScaledPauli boundary_pauli_scaled(cdouble kl, cdouble kr, double x) {
  const cdouble alpha = kl + kr;
  const cdouble beta = kl - kr;
  const auto ph = detail::boundary_phases(alpha, beta, x);
  const cdouble i(0.0, 1.0);
  PauliVector v;
  v.c0 = 0.5 * alpha * (ph.e_beta_m + ph.e_beta_p);
  v.c1 = 0.5 * beta * (ph.e_alpha_m + ph.e_alpha_p);
  v.c2 = 0.5 * i * beta * (ph.e_alpha_m - ph.e_alpha_p);
  v.c3 = 0.5 * alpha * (ph.e_beta_m - ph.e_beta_p);
  return {v, ph.s};
}

/// Same boundary matrix built entrywise from the displayed form
/// (alpha e^{-i beta x}, beta e^{-i alpha x}; beta e^{i alpha x}, alpha e^{i beta x}).
/// This is the reference-engine construction path, independent of the Pauli
/// coefficient formulas above.
inline ScaledMat2 boundary_mat2_scaled(cdouble kl, cdouble kr, double x) {
  const cdouble alpha = kl + kr;
  const cdouble beta = kl - kr;
  const auto ph = detail::boundary_phases(alpha, beta, x);
  Mat2 m{alpha * ph.e_beta_m, beta * ph.e_alpha_m,
         beta * ph.e_alpha_p, alpha * ph.e_beta_p};
  return {m, ph.s};
}

/// Transfer matrix for the boundary between well n (even region) and the
/// barrier to its right, Pauli form. n counts regions of the uniform array
/// from zero; the boundary sits at x = (n/2)(delta + tau).
inline PauliVector even_matrix(const WaveNumberPair& w, int n, double delta, double tau) {
  if (n < 0 || n % 2 != 0)
    throw std::invalid_argument("even_matrix: region index must be even and >= 0");
  const double x = (n / 2) * (delta + tau);
  const ScaledPauli sp = boundary_pauli_scaled(w.kappa, w.gamma, x);
  const double s = std::exp(sp.log_scale);
  return {s * sp.unit.c0, s * sp.unit.c1, s * sp.unit.c2, s * sp.unit.c3};
}

/// Transfer matrix for the boundary between barrier m (odd region) and the
/// well to its right, at x = ((m+1)/2) delta + ((m-1)/2) tau.
inline PauliVector odd_matrix(const WaveNumberPair& w, int m, double delta, double tau) {
  if (m < 1 || m % 2 != 1)
    throw std::invalid_argument("odd_matrix: region index must be odd and >= 1");
  const double x = ((m + 1) / 2) * delta + ((m - 1) / 2) * tau;
  const ScaledPauli sp = boundary_pauli_scaled(w.gamma, w.kappa, x);
  const double s = std::exp(sp.log_scale);
  return {s * sp.unit.c0, s * sp.unit.c1, s * sp.unit.c2, s * sp.unit.c3};
}

/// Boundary matrix for arbitrary neighboring levels. The amplitude relation
/// is |V_left> = prefactor * matrix * |V_right> with prefactor = 1/(2 k_left).
struct GeneralTransfer {
  PauliVector matrix{};
  cdouble prefactor{};
};

inline GeneralTransfer general_matrix(cdouble kappa_left, cdouble kappa_right,
                                      double boundary_x) {
  if (kappa_left == cdouble{})
    throw std::domain_error(
        "general_matrix: left wave number is zero (energy equals the level); "
        "use the degenerate matching matrices");
  const ScaledPauli sp = boundary_pauli_scaled(kappa_left, kappa_right, boundary_x);
  const double s = std::exp(sp.log_scale);
  return {{s * sp.unit.c0, s * sp.unit.c1, s * sp.unit.c2, s * sp.unit.c3},
          1.0 / (2.0 * kappa_left)};
}

/// Matching matrices for a region where E equals the level exactly, so the
/// solution there is linear, psi = a x + b, instead of a plane-wave pair.
///
///   enter_flat: (A, B) of the plane-wave region on the LEFT of boundary x
///               from the flat region's (a, b); includes its own 1/2 factor.
///   exit_flat:  (a, b) of the flat region on the LEFT of boundary x from
///               the plane-wave region's (A, B) on the right.
///
/// Chaining enter * exit across a flat region of any width is finite and
/// tends to the identity as the width goes to zero.
enum class DegenerateSide { enter_flat, exit_flat };

inline Mat2 degenerate_matrix(DegenerateSide side, cdouble k, double boundary_x) {
  if (k == cdouble{})
    throw std::domain_error("degenerate_matrix: the neighboring wave number must be nonzero");
  const cdouble i(0.0, 1.0);
  const double x = boundary_x;
  const cdouble em = std::exp(-i * k * x);  // e^{-ikx}
  const cdouble ep = std::exp(i * k * x);   // e^{+ikx}
  if (side == DegenerateSide::enter_flat) {
    return {0.5 * em * (x - i / k), 0.5 * em,
            0.5 * ep * (x + i / k), 0.5 * ep};
  }
  return {i * k * ep, -i * k * em,
          (1.0 - i * k * x) * ep, (1.0 + i * k * x) * em};
}

/// Scaled variant of degenerate_matrix for chain assembly at large |Im k| x.
inline ScaledMat2 degenerate_matrix_scaled(DegenerateSide side, cdouble k,
                                           double boundary_x) {
  const double s = std::abs(k.imag() * boundary_x);
  const cdouble i(0.0, 1.0);
  const double x = boundary_x;
  const cdouble em = detail::exp_shifted(-i * k * x, s);
  const cdouble ep = detail::exp_shifted(i * k * x, s);
  if (side == DegenerateSide::enter_flat) {
    return {{0.5 * em * (x - i / k), 0.5 * em,
             0.5 * ep * (x + i / k), 0.5 * ep},
            s};
  }
  return {{i * k * ep, -i * k * em,
           (1.0 - i * k * x) * ep, (1.0 + i * k * x) * em},
          s};
}

// ---------------------------------------------------------------------------
// Width-referenced factors.
//
// The displayed matrices above carry phases e^{+-i k x} of the absolute
// boundary positions. Folding them directly is ill-conditioned: inside a
// barrier the running product splits by e^{2 |Im k| x}, and once that ratio
// passes 1/eps the Pauli coefficients (half sums of opposite entries)
// silently lose the decaying component, which the next barrier would have
// re-amplified into the result. Referencing each region's amplitudes to its
// own left edge is an exact diagonal-phase conjugation of the same chain:
// T and R are untouched, the factors depend only on region widths, and
// every partial product stays balanced. The solver folds these.
// ---------------------------------------------------------------------------

/// Plane-plane boundary factor in the width convention, without the
/// 1/(2 k_left) prefactor: diag(e^{-i k d}, e^{+i k d}) * (alpha, beta; beta, alpha)
/// with d the width of the left region (0 for the leftmost region).
inline ScaledPauli boundary_pauli_width_scaled(cdouble k_left, cdouble k_right,
                                               double left_width) {
  const cdouble alpha = k_left + k_right;
  const cdouble beta = k_left - k_right;
  const cdouble i(0.0, 1.0);
  const cdouble wm = -i * k_left * left_width;
  const cdouble wp = i * k_left * left_width;
  const double s = std::max(wm.real(), wp.real());
  const cdouble em = detail::exp_shifted(wm, s);
  const cdouble ep = detail::exp_shifted(wp, s);
  // decomposition of (alpha em, beta em; beta ep, alpha ep)
  PauliVector v;
  v.c0 = 0.5 * alpha * (em + ep);
  v.c1 = 0.5 * beta * (em + ep);
  v.c2 = 0.5 * i * beta * (em - ep);
  v.c3 = 0.5 * alpha * (em - ep);
  return {v, s};
}

inline ScaledMat2 boundary_mat2_width_scaled(cdouble k_left, cdouble k_right,
                                             double left_width) {
  const cdouble alpha = k_left + k_right;
  const cdouble beta = k_left - k_right;
  const cdouble i(0.0, 1.0);
  const cdouble wm = -i * k_left * left_width;
  const cdouble wp = i * k_left * left_width;
  const double s = std::max(wm.real(), wp.real());
  const cdouble em = detail::exp_shifted(wm, s);
  const cdouble ep = detail::exp_shifted(wp, s);
  return {{alpha * em, beta * em, beta * ep, alpha * ep}, s};
}

/// Plane region (left, width d) into a flat region; includes its own 1/2.
inline ScaledMat2 degenerate_enter_width(cdouble k_left, double left_width) {
  const cdouble i(0.0, 1.0);
  const cdouble wm = -i * k_left * left_width;
  const cdouble wp = i * k_left * left_width;
  const double s = std::max(wm.real(), wp.real());
  const cdouble em = detail::exp_shifted(wm, s);
  const cdouble ep = detail::exp_shifted(wp, s);
  return {{-0.5 * i * em / k_left, 0.5 * em,
           0.5 * i * ep / k_left, 0.5 * ep},
          s};
}

/// Flat region (left, width w) into a plane region; bounded entries.
inline Mat2 degenerate_exit_width(cdouble k_right, double flat_width) {
  const cdouble i(0.0, 1.0);
  return {i * k_right, -i * k_right,
          1.0 - i * k_right * flat_width, 1.0 + i * k_right * flat_width};
}

/// Two adjacent flat regions (levels both equal to E): the linear pieces
/// share the slope and shift the intercept by it.
inline Mat2 degenerate_shear(double flat_width) {
  return {1.0, 0.0, -flat_width, 1.0};
}

}  // namespace tunnel1d
