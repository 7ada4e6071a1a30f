#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "tunnel1d/analysis.hpp"
#include "tunnel1d/potential.hpp"

namespace tunnel1d {

using json = nlohmann::json;

/// Shortest text that reads back to the same double (17 significant digits).
inline std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// A potential plus, when it came from the uniform form, the original spec.
/// `source` preserves the exact JSON the input arrived as (reports echo it
/// verbatim); `uniform` is also set for piecewise input that matches the
/// uniform pattern, since the ladder and band analyses need the widths.
struct PotentialInput {
  PiecewisePotential potential;
  std::optional<UniformBarrierSpec> uniform;
  std::string digest;
  json source;
};

inline json to_json(const UniformBarrierSpec& spec) {
  json u{{"n", spec.n_barriers},
         {"delta", spec.barrier_width},
         {"tau", spec.well_width},
         {"v0", spec.height}};
  if (spec.unit_factor != 1.0) u["unit_factor"] = spec.unit_factor;
  return json{{"uniform", u}};
}

inline json to_json(const PiecewisePotential& pot) {
  json p{{"boundaries", pot.boundaries}, {"levels", pot.levels}};
  if (pot.unit_factor != 1.0) p["unit_factor"] = pot.unit_factor;
  return json{{"piecewise", p}};
}

inline json to_json(const PotentialInput& input) {
  if (!input.source.is_null()) return input.source;
  return input.uniform ? to_json(*input.uniform) : to_json(input.potential);
}

/// Accepts {"uniform": {"n", "delta", "tau", "v0"}} or
/// {"piecewise": {"boundaries", "levels"}}, each with an optional
/// "unit_factor".
inline PotentialInput potential_from_json(const json& j) {
  PotentialInput input;
  if (j.contains("uniform") == j.contains("piecewise"))
    throw std::invalid_argument(
        "potential JSON must contain exactly one of \"uniform\" or \"piecewise\"");
  if (j.contains("uniform")) {
    const json& u = j.at("uniform");
    UniformBarrierSpec spec;
    spec.n_barriers = u.at("n").get<int>();
    spec.barrier_width = u.at("delta").get<double>();
    spec.well_width = u.at("tau").get<double>();
    spec.height = u.at("v0").get<double>();
    spec.unit_factor = u.value("unit_factor", 1.0);
    spec.validate();
    input.uniform = spec;
    input.potential = build_uniform(spec);
  } else {
    const json& p = j.at("piecewise");
    PiecewisePotential pot;
    pot.boundaries = p.at("boundaries").get<std::vector<double>>();
    pot.levels = p.at("levels").get<std::vector<double>>();
    pot.unit_factor = p.value("unit_factor", 1.0);
    pot.validate();
    input.potential = std::move(pot);
    input.uniform = as_uniform(input.potential);
  }
  input.source = j;
  input.digest = describe_potential(input.potential);
  return input;
}

inline json to_json(const ResonanceReport& report) {
  json peaks = json::array();
  int n_clusters = 0;
  for (const auto& p : report.peaks) {
    peaks.push_back({{"kappa", p.kappa_refined},
                     {"t_peak", p.t_peak},
                     {"width", p.width},
                     {"cluster_id", p.cluster_id}});
    n_clusters = std::max(n_clusters, p.cluster_id + 1);
  }
  json clusters = json::array();
  for (int c = 0; c < n_clusters; ++c) {
    double lo = 0.0, hi = 0.0;
    int count = 0;
    for (const auto& p : report.peaks) {
      if (p.cluster_id != c) continue;
      if (count == 0) lo = p.kappa_refined;
      hi = p.kappa_refined;
      ++count;
    }
    clusters.push_back(
        {{"id", c}, {"multiplicity", count}, {"kappa_lo", lo}, {"kappa_hi", hi}});
  }
  json predicted = json::array();
  for (const auto& p : report.predicted)
    predicted.push_back({{"l", p.l}, {"kappa", p.kappa}, {"matched", p.matched}});
  return {{"peaks", peaks},
          {"clusters", clusters},
          {"predicted", predicted},
          {"undersampled", report.undersampled}};
}

inline json to_json(const WellReport& report) {
  json wells = json::array();
  for (const auto& w : report.wells)
    wells.push_back(
        {{"kappa_lo", w.kappa_lo}, {"kappa_hi", w.kappa_hi}, {"ln_t_floor", w.ln_t_floor}});
  return {{"wells", wells}};
}

inline json bands_to_json(const std::vector<BandInterval>& bands) {
  json arr = json::array();
  for (const auto& b : bands)
    arr.push_back({{"kappa_lo", b.kappa_lo}, {"kappa_hi", b.kappa_hi}});
  return {{"bands", arr}};
}

/// Common envelope for every JSON report the CLI emits.
inline json report_envelope(const PotentialInput& input, Engine engine, double kappa_min,
                            double kappa_max, int n_points, json results,
                            json warnings = json::array()) {
  return {{"schema_version", 1},
          {"spec", to_json(input)},
          {"engine", engine == Engine::pauli ? "pauli" : "direct"},
          {"grid", {{"kappa_min", kappa_min}, {"kappa_max", kappa_max}, {"points", n_points}}},
          {"results", std::move(results)},
          {"warnings", std::move(warnings)}};
}

/// Sweep table: one row per grid point, 17-significant-digit floats.
/// classical_v0 sets the threshold of the reference step curve.
inline void write_sweep_csv(std::ostream& os, const SweepResult& sw, double classical_v0,
                            double unit_factor) {
  os << "kappa,E,ln_t,ln_r,t,r,classical_t\n";
  for (std::size_t i = 0; i < sw.kappa_grid.size(); ++i) {
    const double kappa = sw.kappa_grid[i];
    const double energy = kappa * kappa / unit_factor;
    const double lt = sw.ln_t[i];
    const double lr = sw.ln_r[i];
    const double t = std::isnan(lt) ? std::numeric_limits<double>::quiet_NaN()
                                    : std::clamp(std::exp(lt), 0.0, 1.0);
    const double r = std::isnan(lr) ? std::numeric_limits<double>::quiet_NaN()
                                    : std::clamp(std::exp(lr), 0.0, 1.0);
    os << format_float(kappa) << ',' << format_float(energy) << ',' << format_float(lt)
       << ',' << format_float(lr) << ',' << format_float(t) << ',' << format_float(r)
       << ',' << format_float(classical_baseline(kappa, classical_v0, unit_factor))
       << '\n';
  }
}

inline json sweep_to_json(const SweepResult& sw, double classical_v0, double unit_factor) {
  json rows = json::array();
  for (std::size_t i = 0; i < sw.kappa_grid.size(); ++i) {
    const double kappa = sw.kappa_grid[i];
    rows.push_back({{"kappa", kappa},
                    {"E", kappa * kappa / unit_factor},
                    {"ln_t", sw.ln_t[i]},
                    {"ln_r", sw.ln_r[i]},
                    {"classical_t", classical_baseline(kappa, classical_v0, unit_factor)}});
  }
  return {{"rows", rows}};
}

}  // namespace tunnel1d
