#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tunnel1d/mat2.hpp"
#include "tunnel1d/pauli.hpp"
#include "tunnel1d/potential.hpp"
#include "tunnel1d/transfer.hpp"

namespace tunnel1d {

/// Which chain representation computes the scattering coefficients.
/// `pauli` folds Pauli coefficients through the basis product table;
/// `direct` multiplies the boundary matrices entrywise. Beyond the wave
/// numbers (and the shared degenerate matching matrices) the two routes
/// have no algebra in common, so their agreement cross-checks both.
enum class Engine { pauli, direct };

/// T, R and their natural logs at one energy. ln_t / ln_r are authoritative:
/// transmission/reflection are exp() renditions clamped to [0, 1] and
/// underflow to zero once the logs pass about -745.
struct ScatteringResult {
  double transmission = 0.0;
  double reflection = 0.0;
  double ln_t = -std::numeric_limits<double>::infinity();
  double ln_r = -std::numeric_limits<double>::infinity();
  double energy = 0.0;
  double kappa = 0.0;  // incident wave number
};

/// Forward/backward amplitude pairs (A_j, B_j) for every region, rightmost
/// normalized to `normalization` with B_last = 0. In a region whose level
/// equals the energy the pair holds the linear-solution coefficients
/// (slope, intercept) instead of plane-wave amplitudes.
struct RegionAmplitudes {
  std::vector<std::pair<cdouble, cdouble>> amplitudes;
  cdouble normalization{1.0, 0.0};
  double energy = 0.0;
};

namespace detail {

constexpr double kDegenerateRelTol = 1e-12;
constexpr double kUnitarityTol = 1e-8;

inline bool is_degenerate_level(double energy, double level) {
  return std::abs(energy - level) <=
         kDegenerateRelTol * std::max(std::abs(energy), std::abs(level));
}

/// 2x2 chain with running magnitude renormalization (direct engine).
struct Mat2Chain {
  Mat2 unit = Mat2::identity();
  double log_scale = 0.0;

  void append(const Mat2& m, double extra_log) {
    unit = unit * m;
    log_scale += extra_log;
    const double mx = unit.max_abs();
    if (mx > 0.0 && std::isfinite(mx)) {
      const cdouble inv(1.0 / mx, 0.0);
      unit = inv * unit;
      log_scale += std::log(mx);
    }
  }
};

struct SolverContext {
  std::vector<cdouble> ks;  // per-region wave numbers
  std::vector<bool> degenerate;
  bool any_interior_degenerate = false;
};

inline SolverContext prepare(const PiecewisePotential& pot, double energy) {
  pot.validate();
  if (!(energy > 0.0) || !std::isfinite(energy))
    throw std::domain_error("scatter: no scattering state, energy must be > 0 and finite");
  SolverContext ctx;
  const std::size_t n = pot.levels.size();
  ctx.ks.resize(n);
  ctx.degenerate.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    ctx.degenerate[j] = is_degenerate_level(energy, pot.levels[j]);
    ctx.ks[j] = ctx.degenerate[j]
                    ? cdouble{}
                    : complex_wave_number(energy, pot.levels[j], pot.unit_factor);
    if (ctx.degenerate[j] && j > 0 && j + 1 < n) ctx.any_interior_degenerate = true;
  }
  if (ctx.degenerate.front() || energy < pot.levels.front())
    throw std::domain_error(
        "scatter: energy does not admit a propagating incident wave "
        "(energy must exceed the incident asymptotic level)");
  if (ctx.degenerate.back())
    throw std::domain_error("scatter: energy equals the final asymptotic level");
  return ctx;
}

struct ChainCoefficients {
  double log_prefactors = 0.0;  // sum of ln|2 k_left| over plane-wave boundaries
  double log_scale = 0.0;       // magnitude factored out of the ordered product
  cdouble a_coef{};             // <+| product |+>
  cdouble b_coef{};             // <-| product |+>
};

/// Fold the per-boundary factors left to right in the width-referenced
/// convention (see transfer.hpp). The represented relation is
/// |V_first> = exp(log_scale - log_prefactors) * U * |V_last> with U the
/// normalized product; T and R only need the magnitudes of U's first column.
inline ChainCoefficients run_chain(const PiecewisePotential& pot, const SolverContext& ctx,
                                   Engine engine) {
  ChainCoefficients out;
  ScaledChain pchain = ScaledChain::from(PauliVector{1.0, 0.0, 0.0, 0.0});
  Mat2Chain mchain;
  auto fold_mat = [&](const Mat2& m, double extra_log) {
    if (engine == Engine::pauli)
      pchain.append(decompose(m), extra_log);
    else
      mchain.append(m, extra_log);
  };
  for (std::size_t i = 0; i < pot.boundaries.size(); ++i) {
    // width of the left region; the leftmost region is referenced at this
    // first boundary, so its offset is zero
    const double d = i == 0 ? 0.0 : pot.boundaries[i] - pot.boundaries[i - 1];
    const bool left_flat = ctx.degenerate[i];
    const bool right_flat = ctx.degenerate[i + 1];

    if (!left_flat && !right_flat) {
      out.log_prefactors += std::log(2.0 * std::abs(ctx.ks[i]));
      if (engine == Engine::pauli) {
        const ScaledPauli sp = boundary_pauli_width_scaled(ctx.ks[i], ctx.ks[i + 1], d);
        pchain.append(sp.unit, sp.log_scale);
      } else {
        const ScaledMat2 sm = boundary_mat2_width_scaled(ctx.ks[i], ctx.ks[i + 1], d);
        mchain.append(sm.unit, sm.log_scale);
      }
    } else if (left_flat && right_flat) {
      fold_mat(degenerate_shear(d), 0.0);
    } else if (right_flat) {
      const ScaledMat2 sm = degenerate_enter_width(ctx.ks[i], d);
      fold_mat(sm.unit, sm.log_scale);
    } else {
      fold_mat(degenerate_exit_width(ctx.ks[i + 1], d), 0.0);
    }
  }
  if (engine == Engine::pauli) {
    out.log_scale = pchain.log_scale;
    out.a_coef = pchain.unit.c0 + pchain.unit.c3;
    const cdouble i(0.0, 1.0);
    out.b_coef = pchain.unit.c1 + i * pchain.unit.c2;
  } else {
    out.log_scale = mchain.log_scale;
    out.a_coef = mchain.unit.m00;
    out.b_coef = mchain.unit.m10;
  }
  return out;
}

inline ScatteringResult assemble_result(double energy, double kappa_in, double ln_t,
                                        double ln_r) {
  ScatteringResult r;
  r.energy = energy;
  r.kappa = kappa_in;
  r.ln_t = std::min(ln_t, 0.0);
  r.ln_r = std::min(ln_r, 0.0);
  r.transmission = std::clamp(std::exp(r.ln_t), 0.0, 1.0);
  r.reflection = std::clamp(std::exp(r.ln_r), 0.0, 1.0);
  return r;
}

inline void check_unitarity(const ScatteringResult& r) {
  const double defect = std::abs(r.transmission + r.reflection - 1.0);
  if (!(defect <= kUnitarityTol)) {
    std::ostringstream os;
    os << "scatter: T + R deviates from 1 by " << defect << " at E = " << r.energy
       << " (T = " << r.transmission << ", R = " << r.reflection << ")";
    throw std::runtime_error(os.str());
  }
}

inline ScatteringResult scatter_impl(const PiecewisePotential& pot, double energy,
                                     Engine engine) {
  const SolverContext ctx = prepare(pot, energy);
  const double kappa_in = ctx.ks.front().real();
  if (pot.boundaries.empty()) {
    ScatteringResult r = assemble_result(energy, kappa_in, 0.0,
                                         -std::numeric_limits<double>::infinity());
    return r;
  }
  const ChainCoefficients c = run_chain(pot, ctx, engine);
  const double k_out = ctx.ks.back().real();
  const double ln_flux = std::log(k_out) - std::log(kappa_in);
  const double log_a = std::log(std::abs(c.a_coef));
  const double ln_t = ln_flux + 2.0 * (c.log_prefactors - c.log_scale - log_a);
  const double ln_r = 2.0 * (std::log(std::abs(c.b_coef)) - log_a);
  ScatteringResult r = assemble_result(energy, kappa_in, ln_t, ln_r);
  check_unitarity(r);
  return r;
}

}  // namespace detail

/// Transmission and reflection through the potential at the given energy.
/// Energies that collide with an interior level (relative 1e-12) are routed
/// through the degenerate matching automatically. All magnitude bookkeeping
/// is done in log space, so ln_t stays finite far below double underflow.
inline ScatteringResult scatter(const PiecewisePotential& pot, double energy,
                                Engine engine = Engine::pauli) {
  return detail::scatter_impl(pot, energy, engine);
}

/// scatter for an energy that coincides with at least one interior level.
inline ScatteringResult scatter_degenerate(const PiecewisePotential& pot, double energy,
                                           Engine engine = Engine::pauli) {
  const detail::SolverContext ctx = detail::prepare(pot, energy);
  if (!ctx.any_interior_degenerate)
    throw std::invalid_argument(
        "scatter_degenerate: energy does not coincide with any interior level");
  return detail::scatter_impl(pot, energy, engine);
}

/// Walk the boundary relations right to left with A_last = normalization and
/// B_last = 0, producing every region's amplitude pair. Uses plain (unscaled)
/// matrices: fine for the plotting-scale structures this is meant for, but
/// deep multi-barrier suppression can overflow the leftmost amplitudes.
inline RegionAmplitudes recover_amplitudes(const PiecewisePotential& pot, double energy,
                                           cdouble normalization = cdouble{1.0, 0.0}) {
  const detail::SolverContext ctx = detail::prepare(pot, energy);
  RegionAmplitudes out;
  out.normalization = normalization;
  out.energy = energy;
  const std::size_t n = pot.levels.size();
  out.amplitudes.assign(n, {cdouble{}, cdouble{}});
  out.amplitudes.back() = {normalization, cdouble{}};
  for (std::size_t i = pot.boundaries.size(); i-- > 0;) {
    const double x = pot.boundaries[i];
    const Vec2 right{out.amplitudes[i + 1].first, out.amplitudes[i + 1].second};
    const bool left_flat = ctx.degenerate[i];
    const bool right_flat = ctx.degenerate[i + 1];
    Vec2 left;
    if (!left_flat && !right_flat) {
      const ScaledMat2 sm = boundary_mat2_scaled(ctx.ks[i], ctx.ks[i + 1], x);
      const cdouble pref =
          std::exp(sm.log_scale) / (2.0 * ctx.ks[i]);
      left = (pref * sm.unit) * right;
    } else if (left_flat && right_flat) {
      left = right;
    } else if (right_flat) {
      left = degenerate_matrix(DegenerateSide::enter_flat, ctx.ks[i], x) * right;
    } else {
      left = degenerate_matrix(DegenerateSide::exit_flat, ctx.ks[i + 1], x) * right;
    }
    out.amplitudes[i] = {left.a, left.b};
  }
  return out;
}

/// psi(x) from recovered amplitudes: plane waves in regular regions, the
/// linear solution where the level equals the energy.
inline cdouble evaluate_wavefunction(const RegionAmplitudes& amps,
                                     const PiecewisePotential& pot, double x) {
  if (amps.amplitudes.size() != pot.levels.size())
    throw std::invalid_argument("evaluate_wavefunction: amplitudes do not match potential");
  const std::size_t j = pot.region_of(x);
  const auto& [a, b] = amps.amplitudes[j];
  if (detail::is_degenerate_level(amps.energy, pot.levels[j])) return a * x + b;
  const cdouble i(0.0, 1.0);
  const cdouble k = complex_wave_number(amps.energy, pot.levels[j], pot.unit_factor);
  return a * std::exp(i * k * x) + b * std::exp(-i * k * x);
}

/// Closed form for a single potential step of height v0 at the origin:
/// T = 4 kappa gamma / |kappa + gamma|^2, R = |(kappa - gamma)/(kappa + gamma)|^2.
/// Below the step (E <= v0) the transmitted channel is closed and T = 0.
inline ScatteringResult closed_form_step(double energy, double v0,
                                         double unit_factor = 1.0) {
  if (!(energy > 0.0))
    throw std::domain_error("closed_form_step: energy must be > 0");
  const double kappa = std::sqrt(unit_factor * energy);
  ScatteringResult r;
  r.energy = energy;
  r.kappa = kappa;
  if (energy <= v0) {
    r.transmission = 0.0;
    r.reflection = 1.0;
    r.ln_t = -std::numeric_limits<double>::infinity();
    r.ln_r = 0.0;
    return r;
  }
  const double gamma = std::sqrt(unit_factor * (energy - v0));
  const double ln_t = std::log(4.0 * kappa * gamma) - 2.0 * std::log(kappa + gamma);
  const double ln_r =
      2.0 * (std::log(std::abs(kappa - gamma)) - std::log(kappa + gamma));
  return detail::assemble_result(energy, kappa, ln_t, ln_r);
}

/// Closed form for one rectangular barrier of height v0 and width delta:
/// T = |Delta / (alpha^2 e^{i beta delta} - beta^2 e^{i alpha delta})|^2,
/// valid through the evanescent regime via the complex gamma branch. At
/// E = v0 this continues into the linear-solution limit
/// T = 1 / (1 + kappa^2 delta^2 / 4).
inline ScatteringResult closed_form_single(double energy, double v0, double delta,
                                           double unit_factor = 1.0) {
  if (!(energy > 0.0))
    throw std::domain_error("closed_form_single: energy must be > 0");
  if (!(delta > 0.0))
    throw std::invalid_argument("closed_form_single: delta must be > 0");
  const double kappa = std::sqrt(unit_factor * energy);
  if (detail::is_degenerate_level(energy, v0)) {
    const double kd = kappa * delta;
    const double denom = 4.0 + kd * kd;
    const double ln_t = std::log(4.0) - std::log(denom);
    const double ln_r = 2.0 * std::log(std::abs(kd)) - std::log(denom);
    return detail::assemble_result(energy, kappa, ln_t, ln_r);
  }
  const WaveNumberPair w = wave_numbers(energy, v0, unit_factor);
  const cdouble i(0.0, 1.0);
  // scale both exponentials by exp(-s) to stay finite at large |Im gamma| delta
  const cdouble wb = i * w.beta * delta;
  const cdouble wa = i * w.alpha * delta;
  const double s = std::max(wb.real(), wa.real());
  const cdouble eb = detail::exp_shifted(wb, s);
  const cdouble ea = detail::exp_shifted(wa, s);
  const cdouble denom = w.alpha * w.alpha * eb - w.beta * w.beta * ea;
  const double log_denom = s + std::log(std::abs(denom));
  const double ln_t = 2.0 * (std::log(std::abs(w.delta_det)) - log_denom);
  const cdouble refl_num = w.alpha * w.beta * (eb - ea);
  const double ln_r = 2.0 * (s + std::log(std::abs(refl_num)) - log_denom);
  return detail::assemble_result(energy, kappa, ln_t, ln_r);
}

}  // namespace tunnel1d
