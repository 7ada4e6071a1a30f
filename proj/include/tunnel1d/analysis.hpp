#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tunnel1d/potential.hpp"
#include "tunnel1d/solver.hpp"
#include "tunnel1d/transfer.hpp"

namespace tunnel1d {

/// ln T (and ln R) over a uniform kappa grid. Failed grid points are kept as
/// NaN entries plus a gap record instead of aborting the sweep.
struct SweepResult {
  std::vector<double> kappa_grid;
  std::vector<double> ln_t;
  std::vector<double> ln_r;
  std::string spec_digest;

  struct Gap {
    std::size_t index;
    std::string message;
  };
  std::vector<Gap> gaps;
};

inline std::string describe_potential(const PiecewisePotential& pot) {
  if (auto u = as_uniform(pot)) {
    std::string s = "uniform{n=" + std::to_string(u->n_barriers) +
                    ", delta=" + std::to_string(u->barrier_width);
    if (u->n_barriers >= 2) s += ", tau=" + std::to_string(u->well_width);
    s += ", v0=" + std::to_string(u->height) + "}";
    return s;
  }
  return "piecewise{regions=" + std::to_string(pot.region_count()) + "}";
}

/// Evaluate scatter at E = kappa^2 / unit_factor over n_points equally
/// spaced kappas. Independent points are distributed over threads; the
/// output ordering (and therefore every byte downstream) does not depend on
/// the thread count.
inline SweepResult sweep(const PiecewisePotential& pot, double kappa_min, double kappa_max,
                         int n_points, Engine engine = Engine::pauli, int n_threads = 0) {
  if (!(kappa_min > 0.0) || !(kappa_min < kappa_max))
    throw std::invalid_argument("sweep: need 0 < kappa_min < kappa_max");
  if (n_points < 2) throw std::invalid_argument("sweep: n_points must be >= 2");
  pot.validate();

  SweepResult out;
  out.spec_digest = describe_potential(pot);
  const std::size_t n = static_cast<std::size_t>(n_points);
  out.kappa_grid.resize(n);
  const double h = (kappa_max - kappa_min) / (n_points - 1);
  for (std::size_t i = 0; i < n; ++i) out.kappa_grid[i] = kappa_min + static_cast<double>(i) * h;
  out.kappa_grid.back() = kappa_max;
  out.ln_t.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.ln_r.assign(n, std::numeric_limits<double>::quiet_NaN());

  std::mutex gap_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      const double kappa = out.kappa_grid[i];
      try {
        const ScatteringResult r = scatter(pot, kappa * kappa / pot.unit_factor, engine);
        out.ln_t[i] = r.ln_t;
        out.ln_r[i] = r.ln_r;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(gap_mutex);
        out.gaps.push_back({i, e.what()});
      }
    }
  };

  unsigned workers = n_threads > 0 ? static_cast<unsigned>(n_threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::sort(out.gaps.begin(), out.gaps.end(),
            [](const SweepResult::Gap& a, const SweepResult::Gap& b) { return a.index < b.index; });
  return out;
}

struct ResonancePeak {
  double kappa_refined = 0.0;
  double t_peak = 0.0;
  double width = 0.0;  // full width at half of t_peak
  int cluster_id = 0;
};

struct LadderPrediction {
  int l = 0;
  double kappa = 0.0;
  bool matched = false;
};

struct ResonanceOptions {
  double threshold = 0.5;     // keep peaks whose refined T reaches this
  double cluster_gap = 0.02;  // join peaks closer than this into one cluster
  double ladder_tol = 0.15;   // match window around l pi / tau
  // minimal rise of ln T over both grid neighbors for a maximum to count;
  // separates real spikes (whose tails rise by orders of magnitude) from a
  // plateau of T = 1 that only wiggles at rounding level
  double min_prominence = 1e-9;
  std::optional<double> well_width;  // enables the l pi / tau ladder
  Engine engine = Engine::pauli;
};

/// Refined transmission maxima. `undersampled` is set when the grid was too
/// coarse to bracket any maximum even though the well ladder predicts
/// resonances inside the swept range.
struct ResonanceReport {
  std::vector<ResonancePeak> peaks;
  std::vector<LadderPrediction> predicted;
  bool undersampled = false;
};

namespace detail {

/// Golden-section maximization of f on [lo, hi], assuming one interior
/// maximum; stops when the bracket is narrower than tol.
template <typename F>
inline double golden_section_max(F&& f, double lo, double hi, double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  return 0.5 * (lo + hi);
}

/// Bisect for f(x) = target between a (f(a) >= target) and b (f(b) < target).
template <typename F>
inline double bisect_down_to(F&& f, double a, double b, double target) {
  for (int it = 0; it < 80 && std::abs(b - a) > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
    const double mid = 0.5 * (a + b);
    if (f(mid) >= target)
      a = mid;
    else
      b = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// Locate and refine transmission resonances. Grid-local maxima of ln T are
/// polished by golden-section search on the continuous scatter function
/// (bracket 1e-8); the threshold applies to the refined height, so a spike
/// the grid undersampled to a tiny value is still recovered as long as the
/// grid bracketed it.
inline ResonanceReport find_resonances(const SweepResult& sw, const PiecewisePotential& pot,
                                       const ResonanceOptions& opt = {}) {
  const std::size_t n = sw.kappa_grid.size();
  if (n != sw.ln_t.size())
    throw std::invalid_argument("find_resonances: malformed sweep");
  ResonanceReport report;

  auto ln_t_at = [&](double kappa) {
    try {
      return scatter(pot, kappa * kappa / pot.unit_factor, opt.engine).ln_t;
    } catch (const std::exception&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  auto value = [&](std::size_t i) {
    const double v = sw.ln_t[i];
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };

  std::vector<ResonancePeak> peaks;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(value(i) > value(i - 1) + opt.min_prominence &&
          value(i) > value(i + 1) + opt.min_prominence))
      continue;
    const double lo = sw.kappa_grid[i - 1];
    const double hi = sw.kappa_grid[i + 1];
    const double k_star = detail::golden_section_max(ln_t_at, lo, hi, 1e-8);
    const double lt = ln_t_at(k_star);
    const double t_peak = std::min(1.0, std::exp(lt));
    if (!(t_peak >= opt.threshold)) continue;
    if (!peaks.empty() && std::abs(peaks.back().kappa_refined - k_star) < 1e-9)
      continue;  // the same spike bracketed twice

    const double half = lt + std::log(0.5);
    auto above_half = [&](double kappa) { return ln_t_at(kappa) >= half; };
    double wl = k_star, wr = k_star;
    if (!above_half(lo))
      wl = detail::bisect_down_to([&](double k) { return ln_t_at(k); }, k_star, lo, half);
    else
      wl = lo;
    if (!above_half(hi))
      wr = detail::bisect_down_to([&](double k) { return ln_t_at(k); }, k_star, hi, half);
    else
      wr = hi;
    peaks.push_back({k_star, t_peak, wr - wl, 0});
  }

  // clusters: consecutive refined peaks joined while the gap stays small
  int cluster = 0;
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    if (i > 0 && peaks[i].kappa_refined - peaks[i - 1].kappa_refined > opt.cluster_gap)
      ++cluster;
    peaks[i].cluster_id = cluster;
  }
  report.peaks = std::move(peaks);

  if (opt.well_width && *opt.well_width > 0.0) {
    const double tau = *opt.well_width;
    const double pi = 3.14159265358979323846;
    for (int l = 1; l * pi / tau <= sw.kappa_grid.back() + opt.ladder_tol; ++l) {
      LadderPrediction p;
      p.l = l;
      p.kappa = l * pi / tau;
      for (const auto& pk : report.peaks)
        if (std::abs(pk.kappa_refined - p.kappa) <= opt.ladder_tol) p.matched = true;
      report.predicted.push_back(p);
    }
  }

  if (report.peaks.empty() && !report.predicted.empty()) {
    bool ladder_in_range = false;
    for (const auto& p : report.predicted)
      if (p.kappa >= sw.kappa_grid.front() && p.kappa <= sw.kappa_grid.back())
        ladder_in_range = true;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isnan(sw.ln_t[i])) continue;
      lo = std::min(lo, sw.ln_t[i]);
      hi = std::max(hi, sw.ln_t[i]);
    }
    report.undersampled = ladder_in_range && (hi - lo > 1e-6);
  }
  return report;
}

struct WellInterval {
  double kappa_lo = 0.0;
  double kappa_hi = 0.0;
  double ln_t_floor = 0.0;
};

struct WellReport {
  std::vector<WellInterval> wells;
};

/// Maximal grid intervals above kappa_0 where ln T sits below the threshold:
/// the forbidden-band "probability wells" of the finite array.
inline WellReport find_wells(const SweepResult& sw, double kappa_0,
                             double depth_threshold = -5.0) {
  WellReport report;
  const std::size_t n = sw.kappa_grid.size();
  std::optional<WellInterval> open;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = sw.kappa_grid[i];
    const double v = sw.ln_t[i];
    const bool in_well = k >= kappa_0 && !std::isnan(v) && v < depth_threshold;
    if (in_well) {
      if (!open) open = WellInterval{k, k, v};
      open->kappa_hi = k;
      open->ln_t_floor = std::min(open->ln_t_floor, v);
    } else if (open) {
      report.wells.push_back(*open);
      open.reset();
    }
  }
  if (open) report.wells.push_back(*open);
  return report;
}

/// Classical step transmission: 0 below the barrier top, 1 at and above it.
inline double classical_baseline(double kappa, double v0, double unit_factor = 1.0) {
  if (kappa < 0.0) throw std::invalid_argument("classical_baseline: kappa must be >= 0");
  const double kappa_0 = std::sqrt(std::max(0.0, unit_factor * v0));
  return kappa >= kappa_0 ? 1.0 : 0.0;
}

struct BandInterval {
  double kappa_lo = 0.0;
  double kappa_hi = 0.0;
};

/// Half trace of the one-period (psi, psi') propagator of the infinite
/// lattice with this barrier/well unit cell. |half trace| <= 1 marks an
/// allowed band. Built from position-space propagators, independent of the
/// amplitude-space transfer chain, so it can arbitrate against it.
inline double kronig_penney_half_trace(const UniformBarrierSpec& spec, double kappa) {
  spec.validate();
  if (!(kappa > 0.0))
    throw std::invalid_argument("kronig_penney_half_trace: kappa must be > 0");
  const double energy = kappa * kappa / spec.unit_factor;
  const cdouble k_well = complex_wave_number(energy, 0.0, spec.unit_factor);
  const cdouble k_bar = complex_wave_number(energy, spec.height, spec.unit_factor);

  // propagator across width w at wave number k:
  //   [cos(k w), sin(k w)/k; -k sin(k w), cos(k w)], smooth through k -> 0
  auto propagator = [](cdouble k, double w) {
    const cdouble z = k * w;
    cdouble sinc;  // sin(z)/z
    if (std::abs(z) < 1e-6) {
      const cdouble z2 = z * z;
      sinc = 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
    } else {
      sinc = std::sin(z) / z;
    }
    const cdouble c = std::cos(z);
    return Mat2{c, w * sinc, -k * k * w * sinc, c};
  };

  const Mat2 period = propagator(k_well, spec.well_width) *
                      propagator(k_bar, spec.barrier_width);
  return 0.5 * (period.m00 + period.m11).real();
}

/// Allowed-band intervals of the infinite periodic extension, on the given
/// grid with band edges refined by bisection. Finite-array resonances must
/// land inside these intervals.
inline std::vector<BandInterval> kronig_penney_bands(const UniformBarrierSpec& spec,
                                                     std::span<const double> kappa_grid) {
  spec.validate();
  if (spec.n_barriers < 2)
    throw std::invalid_argument("kronig_penney_bands: need a periodic array (n_barriers >= 2)");
  if (kappa_grid.size() < 2)
    throw std::invalid_argument("kronig_penney_bands: need at least two grid points");

  auto allowed = [&](double k) { return std::abs(kronig_penney_half_trace(spec, k)) <= 1.0; };
  auto edge_between = [&](double k_in, double k_out) {
    double a = k_in, b = k_out;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (a + b);
      if (allowed(mid))
        a = mid;
      else
        b = mid;
    }
    return 0.5 * (a + b);
  };

  std::vector<BandInterval> bands;
  std::optional<BandInterval> open;
  for (std::size_t i = 0; i < kappa_grid.size(); ++i) {
    const double k = kappa_grid[i];
    if (allowed(k)) {
      if (!open) {
        double lo = k;
        if (i > 0) lo = edge_between(k, kappa_grid[i - 1]);
        open = BandInterval{lo, k};
      }
      open->kappa_hi = k;
    } else if (open) {
      open->kappa_hi = edge_between(open->kappa_hi, k);
      bands.push_back(*open);
      open.reset();
    }
  }
  if (open) bands.push_back(*open);
  return bands;
}

}  // namespace tunnel1d
