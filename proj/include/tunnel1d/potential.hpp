#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tunnel1d {

/// Symmetric array of n identical rectangular barriers: width delta, height
/// V0, separated by wells of width tau at potential zero. The array starts
/// at x = 0; both asymptotic regions sit at potential zero. unit_factor is
/// the 2m/hbar^2 scale relating energy to squared wave number.
struct UniformBarrierSpec {
  int n_barriers = 1;
  double barrier_width = 1.0;
  double well_width = 1.0;
  double height = 0.0;
  double unit_factor = 1.0;

  void validate() const {
    if (n_barriers < 1)
      throw std::invalid_argument("UniformBarrierSpec: n_barriers must be >= 1");
    if (!(barrier_width > 0.0) || !std::isfinite(barrier_width))
      throw std::invalid_argument("UniformBarrierSpec: barrier_width must be > 0 and finite");
    if (!(well_width >= 0.0) || !std::isfinite(well_width))
      throw std::invalid_argument("UniformBarrierSpec: well_width must be >= 0 and finite");
    if (n_barriers >= 2 && well_width == 0.0)
      throw std::invalid_argument(
          "UniformBarrierSpec: well_width must be > 0 when n_barriers >= 2 "
          "(zero-width wells would merge the barriers)");
    if (!std::isfinite(height))
      throw std::invalid_argument("UniformBarrierSpec: height must be finite");
    if (!(unit_factor > 0.0) || !std::isfinite(unit_factor))
      throw std::invalid_argument("UniformBarrierSpec: unit_factor must be > 0 and finite");
  }
};

/// Piecewise-constant potential. levels[j] applies between boundaries[j-1]
/// and boundaries[j]; levels.front() extends to -infinity, levels.back() to
/// +infinity. Immutable by convention once built; share freely.
struct PiecewisePotential {
  std::vector<double> boundaries;
  std::vector<double> levels;
  double unit_factor = 1.0;

  std::size_t region_count() const { return levels.size(); }

  void validate() const {
    if (levels.size() != boundaries.size() + 1)
      throw std::invalid_argument(
          "PiecewisePotential: levels must have exactly one more entry than boundaries");
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
      if (!std::isfinite(boundaries[i]))
        throw std::invalid_argument("PiecewisePotential: boundaries must be finite");
      if (i > 0 && !(boundaries[i - 1] < boundaries[i]))
        throw std::invalid_argument(
            "PiecewisePotential: boundaries must be strictly increasing");
    }
    for (double v : levels)
      if (!std::isfinite(v))
        throw std::invalid_argument("PiecewisePotential: levels must be finite");
    if (!(unit_factor > 0.0) || !std::isfinite(unit_factor))
      throw std::invalid_argument("PiecewisePotential: unit_factor must be > 0 and finite");
  }

  /// Index of the region containing x; boundary points go to the right region.
  std::size_t region_of(double x) const {
    return static_cast<std::size_t>(
        std::upper_bound(boundaries.begin(), boundaries.end(), x) - boundaries.begin());
  }

  double value_at(double x) const { return levels[region_of(x)]; }

  double extent() const {
    return boundaries.empty() ? 0.0 : boundaries.back() - boundaries.front();
  }

  /// Same structure traversed from the other side, kept on the same interval.
  PiecewisePotential reversed() const {
    PiecewisePotential r;
    r.unit_factor = unit_factor;
    r.levels.assign(levels.rbegin(), levels.rend());
    if (!boundaries.empty()) {
      const double c = boundaries.front() + boundaries.back();
      r.boundaries.reserve(boundaries.size());
      for (auto it = boundaries.rbegin(); it != boundaries.rend(); ++it)
        r.boundaries.push_back(c - *it);
    }
    return r;
  }
};

/// Expand a uniform spec into its 2N+1 regions. Boundary positions are
/// computed from whole-period offsets, not running sums, so equal inputs
/// give bit-identical geometry.
inline PiecewisePotential build_uniform(const UniformBarrierSpec& spec) {
  spec.validate();
  const int n = spec.n_barriers;
  const double period = spec.barrier_width + spec.well_width;
  PiecewisePotential pot;
  pot.unit_factor = spec.unit_factor;
  pot.boundaries.reserve(static_cast<std::size_t>(2 * n));
  pot.levels.reserve(static_cast<std::size_t>(2 * n + 1));
  pot.levels.push_back(0.0);
  for (int k = 0; k < n; ++k) {
    pot.boundaries.push_back(k * period);
    pot.boundaries.push_back(k * period + spec.barrier_width);
    pot.levels.push_back(spec.height);
    pot.levels.push_back(0.0);
  }
  pot.validate();
  return pot;
}

/// Recognize the output pattern of build_uniform and recover the spec; the
/// round trip is exact whenever the widths are exactly representable.
inline std::optional<UniformBarrierSpec> as_uniform(const PiecewisePotential& pot) {
  const std::size_t m = pot.boundaries.size();
  if (m < 2 || m % 2 != 0) return std::nullopt;
  const int n = static_cast<int>(m / 2);
  if (pot.boundaries.front() != 0.0) return std::nullopt;
  UniformBarrierSpec spec;
  spec.n_barriers = n;
  spec.barrier_width = pot.boundaries[1] - pot.boundaries[0];
  spec.well_width = n >= 2 ? pot.boundaries[2] - pot.boundaries[1] : 0.0;
  spec.height = pot.levels[1];
  spec.unit_factor = pot.unit_factor;
  if (spec.barrier_width <= 0.0 || (n >= 2 && spec.well_width <= 0.0)) return std::nullopt;
  const double period = spec.barrier_width + spec.well_width;
  for (int k = 0; k < n; ++k) {
    if (pot.boundaries[2 * k] != k * period) return std::nullopt;
    if (pot.boundaries[2 * k + 1] != k * period + spec.barrier_width) return std::nullopt;
    if (pot.levels[2 * k] != 0.0) return std::nullopt;
    if (pot.levels[2 * k + 1] != spec.height) return std::nullopt;
  }
  if (pot.levels.back() != 0.0) return std::nullopt;
  return spec;  // for n == 1 the well width is not encoded; it stays 0
}

/// Step approximation of a smooth potential: n_steps equal segments on
/// [x_min, x_max], each at the midpoint value. Midpoint sampling is second
/// order and keeps symmetric potentials symmetric (to rounding). The
/// asymptotic levels are forced to zero; a value above
/// asymptotic_rel_tol * max|v| immediately outside the window means the
/// window does not reach the scattering asymptotics and is rejected. The
/// probe sits just outside, so a window cut exactly at a discontinuity of v
/// is fine; v must therefore be evaluable in a small neighborhood of the
/// window.
inline PiecewisePotential sample_smooth(const std::function<double(double)>& v,
                                        double x_min, double x_max, int n_steps,
                                        double asymptotic_rel_tol = 1e-9,
                                        double unit_factor = 1.0) {
  if (n_steps < 1) throw std::invalid_argument("sample_smooth: n_steps must be >= 1");
  if (!(x_min < x_max)) throw std::invalid_argument("sample_smooth: x_min must be < x_max");
  const double h = (x_max - x_min) / n_steps;
  PiecewisePotential pot;
  pot.unit_factor = unit_factor;
  pot.boundaries.resize(static_cast<std::size_t>(n_steps) + 1);
  for (int k = 0; k <= n_steps; ++k) pot.boundaries[static_cast<std::size_t>(k)] = x_min + k * h;
  pot.boundaries.back() = x_max;

  pot.levels.reserve(static_cast<std::size_t>(n_steps) + 2);
  pot.levels.push_back(0.0);
  double max_abs = 0.0;
  for (int k = 0; k < n_steps; ++k) {
    const double x = x_min + (k + 0.5) * h;
    const double val = v(x);
    if (!std::isfinite(val)) {
      std::ostringstream os;
      os << "sample_smooth: potential is not finite at x = " << x;
      throw std::invalid_argument(os.str());
    }
    max_abs = std::max(max_abs, std::abs(val));
    pot.levels.push_back(val);
  }
  pot.levels.push_back(0.0);

  const double tol = asymptotic_rel_tol * std::max(max_abs, 1e-300);
  const double probe_off = 1e-6 * h;
  for (double xe : {x_min - probe_off, x_max + probe_off}) {
    const double ve = v(xe);
    if (!std::isfinite(ve)) {
      std::ostringstream os;
      os << "sample_smooth: potential is not finite at x = " << xe;
      throw std::invalid_argument(os.str());
    }
    if (std::abs(ve) > tol) {
      std::ostringstream os;
      os << "sample_smooth: |v(" << xe << ")| = " << std::abs(ve)
         << " exceeds the asymptotic tolerance " << tol
         << "; widen the window or raise asymptotic_rel_tol";
      throw std::invalid_argument(os.str());
    }
  }
  pot.validate();
  return pot;
}

}  // namespace tunnel1d
