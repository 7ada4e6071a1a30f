// Command-line front end: energy sweeps, resonance/well/band reports,
// wavefunction dumps and engine comparison over piecewise-constant
// potentials, as CSV/JSON for external plotting. All numeric output is
// deterministic for a given invocation; timings go to stderr only.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tunnel1d/analysis.hpp"
#include "tunnel1d/potential.hpp"
#include "tunnel1d/serialize.hpp"
#include "tunnel1d/solver.hpp"

namespace {

using tunnel1d::Engine;
using tunnel1d::json;
using tunnel1d::PotentialInput;

struct KappaRange {
  double min = 0.0;
  double max = 0.0;
  int points = 0;
};

KappaRange parse_range(const std::string& text) {
  KappaRange r;
  char c1 = 0, c2 = 0;
  std::istringstream is(text);
  if (!(is >> r.min >> c1 >> r.max >> c2 >> r.points) || c1 != ':' || c2 != ':' ||
      !is.eof())
    throw std::invalid_argument("range must be min:max:points, got '" + text + "'");
  return r;
}

tunnel1d::UniformBarrierSpec parse_uniform_arg(const std::string& text) {
  tunnel1d::UniformBarrierSpec spec;
  spec.height = std::numeric_limits<double>::quiet_NaN();  // must be set
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("uniform spec items must look like key=value: '" + item + "'");
    const std::string key = item.substr(0, eq);
    const double value = std::stod(item.substr(eq + 1));
    if (key == "n")
      spec.n_barriers = static_cast<int>(value);
    else if (key == "delta")
      spec.barrier_width = value;
    else if (key == "tau")
      spec.well_width = value;
    else if (key == "v0")
      spec.height = value;
    else if (key == "unit_factor")
      spec.unit_factor = value;
    else
      throw std::invalid_argument("unknown uniform spec key '" + key + "'");
  }
  if (std::isnan(spec.height))
    throw std::invalid_argument("uniform spec needs v0=<height>");
  spec.validate();
  return spec;
}

struct CommonOpts {
  std::string uniform_arg;
  std::string spec_path;
  std::string kappa_range;
  std::string engine_name = "pauli";
  std::string output = "-";
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_kappa = true) {
  cmd->add_option("--uniform", opts.uniform_arg,
                  "inline uniform array, n=<int>,delta=<w>,tau=<w>,v0=<h>[,unit_factor=<u>]");
  cmd->add_option("--spec", opts.spec_path, "potential spec JSON file");
  if (needs_kappa)
    cmd->add_option("--kappa", opts.kappa_range, "wave number grid, min:max:points")
        ->required();
  cmd->add_option("--engine", opts.engine_name, "pauli (default) or direct")
      ->check(CLI::IsMember({"pauli", "direct"}));
  cmd->add_option("--output", opts.output, "output path, '-' for stdout (default)");
  cmd->add_option("--threads", opts.threads, "worker threads for sweeps (0 = auto)");
}

PotentialInput load_potential(const CommonOpts& opts) {
  if (opts.uniform_arg.empty() == opts.spec_path.empty())
    throw std::invalid_argument("provide exactly one potential source: --uniform or --spec");
  if (!opts.uniform_arg.empty()) {
    PotentialInput input;
    input.uniform = parse_uniform_arg(opts.uniform_arg);
    input.potential = tunnel1d::build_uniform(*input.uniform);
    input.digest = tunnel1d::describe_potential(input.potential);
    return input;
  }
  std::ifstream in(opts.spec_path);
  if (!in) throw std::invalid_argument("cannot open spec file '" + opts.spec_path + "'");
  json j;
  in >> j;
  return tunnel1d::potential_from_json(j);
}

Engine parse_engine(const std::string& name) {
  return name == "direct" ? Engine::direct : Engine::pauli;
}

class OutputStream {
 public:
  explicit OutputStream(const std::string& path) {
    if (path != "-") {
      file_.open(path);
      if (!file_) throw std::invalid_argument("cannot open output file '" + path + "'");
    }
  }
  std::ostream& get() { return file_.is_open() ? file_ : std::cout; }
  bool is_stdout() const { return !file_.is_open(); }

 private:
  std::ofstream file_;
};

double classical_height(const tunnel1d::PiecewisePotential& pot) {
  double v = 0.0;
  for (double level : pot.levels) v = std::max(v, level);
  return v;
}

json gap_warnings(const tunnel1d::SweepResult& sw) {
  json warnings = json::array();
  for (const auto& g : sw.gaps)
    warnings.push_back("grid point " + std::to_string(g.index) + ": " + g.message);
  return warnings;
}

int cmd_sweep(const CommonOpts& opts, const std::string& format) {
  const PotentialInput input = load_potential(opts);
  const KappaRange range = parse_range(opts.kappa_range);
  const Engine engine = parse_engine(opts.engine_name);

  const auto t0 = std::chrono::steady_clock::now();
  const tunnel1d::SweepResult sw =
      tunnel1d::sweep(input.potential, range.min, range.max, range.points, engine,
                      opts.threads);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;
  std::cerr << "sweep: " << range.points << " points in " << elapsed.count() << " s\n";

  OutputStream out(opts.output);
  const double v0 = classical_height(input.potential);
  if (format == "json") {
    json env = tunnel1d::report_envelope(
        input, engine, range.min, range.max, range.points,
        tunnel1d::sweep_to_json(sw, v0, input.potential.unit_factor), gap_warnings(sw));
    out.get() << env.dump(2) << '\n';
  } else {
    tunnel1d::write_sweep_csv(out.get(), sw, v0, input.potential.unit_factor);
  }
  return 0;
}

int cmd_resonances(const CommonOpts& opts, const tunnel1d::ResonanceOptions& ropt_in) {
  const PotentialInput input = load_potential(opts);
  const KappaRange range = parse_range(opts.kappa_range);
  const Engine engine = parse_engine(opts.engine_name);

  const tunnel1d::SweepResult sw = tunnel1d::sweep(input.potential, range.min, range.max,
                                                   range.points, engine, opts.threads);
  tunnel1d::ResonanceOptions ropt = ropt_in;
  ropt.engine = engine;
  if (!ropt.well_width && input.uniform && input.uniform->n_barriers >= 2)
    ropt.well_width = input.uniform->well_width;
  const tunnel1d::ResonanceReport report = tunnel1d::find_resonances(sw, input.potential, ropt);

  json warnings = gap_warnings(sw);
  if (report.undersampled) {
    warnings.push_back(
        "undersampled: the grid bracketed no maximum although the well ladder predicts "
        "resonances in range; refine --kappa");
    std::cerr << "warning: sweep looks undersampled\n";
  }

  OutputStream out(opts.output);
  out.get() << tunnel1d::report_envelope(input, engine, range.min, range.max, range.points,
                                         tunnel1d::to_json(report), warnings)
                   .dump(2)
            << '\n';
  return 0;
}

int cmd_wells(const CommonOpts& opts, double depth) {
  const PotentialInput input = load_potential(opts);
  const KappaRange range = parse_range(opts.kappa_range);
  const Engine engine = parse_engine(opts.engine_name);

  const tunnel1d::SweepResult sw = tunnel1d::sweep(input.potential, range.min, range.max,
                                                   range.points, engine, opts.threads);
  const double kappa_0 =
      std::sqrt(input.potential.unit_factor * classical_height(input.potential));
  json results = tunnel1d::to_json(tunnel1d::find_wells(sw, kappa_0, depth));
  results["kappa_0"] = kappa_0;
  results["depth_threshold"] = depth;

  OutputStream out(opts.output);
  out.get() << tunnel1d::report_envelope(input, engine, range.min, range.max, range.points,
                                         std::move(results), gap_warnings(sw))
                   .dump(2)
            << '\n';
  return 0;
}

int cmd_bands(const CommonOpts& opts) {
  const PotentialInput input = load_potential(opts);
  if (!input.uniform)
    throw std::invalid_argument("bands needs a uniform array spec (the dispersion "
                                "condition is defined per period)");
  const KappaRange range = parse_range(opts.kappa_range);
  if (range.points < 2) throw std::invalid_argument("bands: need at least 2 grid points");

  std::vector<double> grid(static_cast<std::size_t>(range.points));
  const double h = (range.max - range.min) / (range.points - 1);
  for (int i = 0; i < range.points; ++i)
    grid[static_cast<std::size_t>(i)] = range.min + i * h;
  grid.back() = range.max;

  const auto bands = tunnel1d::kronig_penney_bands(*input.uniform, grid);
  OutputStream out(opts.output);
  out.get() << tunnel1d::report_envelope(input, parse_engine(opts.engine_name), range.min,
                                         range.max, range.points,
                                         tunnel1d::bands_to_json(bands))
                   .dump(2)
            << '\n';
  return 0;
}

int cmd_wavefunction(const CommonOpts& opts, double energy, const std::string& x_range) {
  const PotentialInput input = load_potential(opts);
  const tunnel1d::PiecewisePotential& pot = input.potential;

  KappaRange xr;
  if (!x_range.empty()) {
    xr = parse_range(x_range);
  } else {
    const double lo = pot.boundaries.empty() ? -1.0 : pot.boundaries.front();
    const double hi = pot.boundaries.empty() ? 1.0 : pot.boundaries.back();
    const double margin = std::max(0.25 * (hi - lo), 1.0);
    xr = {lo - margin, hi + margin, 1001};
  }
  if (xr.points < 2) throw std::invalid_argument("wavefunction: need at least 2 x points");

  const tunnel1d::RegionAmplitudes amps = tunnel1d::recover_amplitudes(pot, energy);

  OutputStream out(opts.output);
  std::ostream& os = out.get();
  os << "x,re_psi,im_psi,abs2_psi\n";
  const double h = (xr.max - xr.min) / (xr.points - 1);
  for (int i = 0; i < xr.points; ++i) {
    const double x = i + 1 == xr.points ? xr.max : xr.min + i * h;
    const tunnel1d::cdouble psi = tunnel1d::evaluate_wavefunction(amps, pot, x);
    os << tunnel1d::format_float(x) << ',' << tunnel1d::format_float(psi.real()) << ','
       << tunnel1d::format_float(psi.imag()) << ','
       << tunnel1d::format_float(std::norm(psi)) << '\n';
  }

  // amplitude table; kept apart from the psi grid so both stay plain CSV
  std::ostream& amp_os = out.is_stdout() ? std::cerr : std::cout;
  amp_os << "region,level,re_a,im_a,re_b,im_b\n";
  for (std::size_t j = 0; j < amps.amplitudes.size(); ++j) {
    const auto& [a, b] = amps.amplitudes[j];
    amp_os << j << ',' << tunnel1d::format_float(pot.levels[j]) << ','
           << tunnel1d::format_float(a.real()) << ',' << tunnel1d::format_float(a.imag())
           << ',' << tunnel1d::format_float(b.real()) << ','
           << tunnel1d::format_float(b.imag()) << '\n';
  }
  return 0;
}

int cmd_compare(const CommonOpts& opts, double tolerance) {
  const PotentialInput input = load_potential(opts);
  const KappaRange range = parse_range(opts.kappa_range);
  if (range.points < 1) throw std::invalid_argument("compare: need at least 1 point");

  std::vector<double> grid(static_cast<std::size_t>(range.points));
  if (range.points == 1) {
    grid[0] = range.min;
  } else {
    const double h = (range.max - range.min) / (range.points - 1);
    for (int i = 0; i < range.points; ++i)
      grid[static_cast<std::size_t>(i)] = range.min + i * h;
    grid.back() = range.max;
  }

  OutputStream out(opts.output);
  std::ostream& os = out.get();
  os << "kappa,ln_t_pauli,ln_t_direct,abs_diff_ln_t,status\n";

  double max_disc = 0.0;
  double pauli_seconds = 0.0, direct_seconds = 0.0;
  int failures = 0;
  for (double kappa : grid) {
    const double energy = kappa * kappa / input.potential.unit_factor;
    std::string status = "ok";
    double lt_p = std::numeric_limits<double>::quiet_NaN();
    double lt_d = std::numeric_limits<double>::quiet_NaN();
    double disc = std::numeric_limits<double>::quiet_NaN();
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const auto rp = tunnel1d::scatter(input.potential, energy, Engine::pauli);
      const auto t1 = std::chrono::steady_clock::now();
      const auto rd = tunnel1d::scatter(input.potential, energy, Engine::direct);
      const auto t2 = std::chrono::steady_clock::now();
      pauli_seconds += std::chrono::duration<double>(t1 - t0).count();
      direct_seconds += std::chrono::duration<double>(t2 - t1).count();
      lt_p = rp.ln_t;
      lt_d = rd.ln_t;
      // both -inf means both engines see a closed channel: no discrepancy
      const double dln = lt_p == lt_d
                             ? 0.0
                             : std::abs(lt_p - lt_d) / std::max(1.0, std::abs(lt_p));
      disc = std::max({std::abs(rp.transmission - rd.transmission),
                       std::abs(rp.reflection - rd.reflection), dln});
      if (!(disc <= tolerance)) {
        status = "discrepancy";
        ++failures;
      }
      max_disc = std::max(max_disc, disc);
    } catch (const std::exception&) {
      status = "gap";
    }
    os << tunnel1d::format_float(kappa) << ',' << tunnel1d::format_float(lt_p) << ','
       << tunnel1d::format_float(lt_d) << ',' << tunnel1d::format_float(disc) << ','
       << status << '\n';
  }
  std::cerr << "compare: max relative discrepancy " << max_disc << " (tolerance "
            << tolerance << "), pauli " << pauli_seconds << " s, direct "
            << direct_seconds << " s over " << range.points << " points\n";
  return failures == 0 ? 0 : 3;
}

/// --config mode: the whole invocation comes from a JSON file of the form
/// {"command": "sweep", "options": {"uniform": "...", "kappa": "..."}}.
std::vector<std::string> args_from_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  json j;
  in >> j;
  std::vector<std::string> args;
  args.push_back(j.at("command").get<std::string>());
  if (j.contains("options")) {
    for (const auto& [key, value] : j.at("options").items()) {
      args.push_back("--" + key);
      if (value.is_string())
        args.push_back(value.get<std::string>());
      else
        args.push_back(value.dump());
    }
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact 1D multibarrier tunneling solver"};
  app.require_subcommand(1);

  CommonOpts sweep_opts, res_opts, wells_opts, bands_opts, wave_opts, cmp_opts;
  std::string sweep_format = "csv";
  tunnel1d::ResonanceOptions ropt;
  double wells_depth = -5.0;
  double wave_energy = 0.0;
  std::string wave_x;
  double cmp_tolerance = 1e-9;

  CLI::App* sweep = app.add_subcommand("sweep", "ln T over a kappa grid (CSV or JSON)");
  add_common(sweep, sweep_opts);
  sweep->add_option("--format", sweep_format, "csv (default) or json")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI::App* resonances =
      app.add_subcommand("resonances", "refined transmission peaks, clusters, ladder (JSON)");
  add_common(resonances, res_opts);
  resonances->add_option("--threshold", ropt.threshold, "refined-T acceptance threshold");
  resonances->add_option("--cluster-gap", ropt.cluster_gap, "max kappa gap inside a cluster");
  resonances->add_option("--ladder-tol", ropt.ladder_tol, "match window around l pi/tau");

  CLI::App* wells = app.add_subcommand("wells", "deep-suppression intervals above kappa_0 (JSON)");
  add_common(wells, wells_opts);
  wells->add_option("--depth", wells_depth, "ln T threshold defining a well");

  CLI::App* bands = app.add_subcommand("bands", "allowed bands of the periodic extension (JSON)");
  add_common(bands, bands_opts);

  CLI::App* wavefunction =
      app.add_subcommand("wavefunction", "psi(x) grid and amplitude table at one energy (CSV)");
  add_common(wavefunction, wave_opts, /*needs_kappa=*/false);
  wavefunction->add_option("--energy", wave_energy, "scattering energy")->required();
  wavefunction->add_option("--x", wave_x, "x grid, min:max:points (default: structure + margin)");

  CLI::App* compare =
      app.add_subcommand("compare", "pauli vs direct engine discrepancy and timing (CSV)");
  add_common(compare, cmp_opts);
  compare->add_option("--tolerance", cmp_tolerance, "max allowed relative discrepancy");

  // pure-config mode: tunnel1d --config run.json
  std::vector<std::string> config_args;
  if (argc == 3 && std::string(argv[1]) == "--config") {
    try {
      config_args = args_from_config(argv[2]);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  } else if (argc > 1 && std::string(argv[1]) == "--config") {
    std::cerr << "error: --config takes one file and no other arguments\n";
    return 1;
  }

  try {
    if (!config_args.empty()) {
      std::vector<const char*> cargv;
      cargv.push_back(argv[0]);
      for (const auto& a : config_args) cargv.push_back(a.c_str());
      app.parse(static_cast<int>(cargv.size()), const_cast<char**>(cargv.data()));
    } else {
      app.parse(argc, argv);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sweep->parsed()) return cmd_sweep(sweep_opts, sweep_format);
    if (resonances->parsed()) return cmd_resonances(res_opts, ropt);
    if (wells->parsed()) return cmd_wells(wells_opts, wells_depth);
    if (bands->parsed()) return cmd_bands(bands_opts);
    if (wavefunction->parsed()) return cmd_wavefunction(wave_opts, wave_energy, wave_x);
    if (compare->parsed()) return cmd_compare(cmp_opts, cmp_tolerance);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
