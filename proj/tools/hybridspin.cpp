// hybridspin command-line front end.

#include <CLI11.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "hybridspin/deer_sim.hpp"
#include "hybridspin/dipolar_bath.hpp"
#include "hybridspin/error.hpp"
#include "hybridspin/io.hpp"
#include "hybridspin/odmr.hpp"
#include "hybridspin/random.hpp"
#include "hybridspin/relaxometry.hpp"
#include "hybridspin/spin_core.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hybridspin;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kConfig = 3, kNumerical = 4, kInputData = 5 };

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return kUsage;
    case ErrorKind::ConfigError: return kConfig;
    case ErrorKind::NotHermitian:
    case ErrorKind::AmbiguousLabeling:
    case ErrorKind::FitDiverged:
    case ErrorKind::NoDecay:
    case ErrorKind::GridMismatch: return kNumerical;
    case ErrorKind::ParseError:
    case ErrorKind::DegenerateData:
    case ErrorKind::NonFiniteInput:
    case ErrorKind::ZeroShape:
    case ErrorKind::NonMonotoneDepth:
    case ErrorKind::NegativeDensity: return kInputData;
  }
  return 1;
}

fs::path config_dir() {
  if (const char* env = std::getenv("HYBRIDSPIN_CONFIG_DIR"); env && *env) return env;
  return HYBRIDSPIN_DEFAULT_CONFIG_DIR;
}

struct LoadedSpecies {
  SpinSpecies species;
  std::string text;
};

// A name resolves to <config dir>/species/<name>.json; anything that looks
// like a path is read directly.
LoadedSpecies load_species(const std::string& name_or_path) {
  fs::path path = name_or_path;
  if (!fs::exists(path) || path.extension() != ".json") path = config_dir() / "species" / (name_or_path + ".json");
  if (!fs::exists(path)) throw Error(ErrorKind::ConfigError, "unknown species '" + name_or_path + "' (looked for " + path.string() + ")");
  LoadedSpecies out;
  out.text = io::read_text_file(path);
  out.species = io::load_species_file(path);
  return out;
}

std::vector<double> linear_grid(double start, double end, int steps) {
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "grid needs at least one step");
  if (steps > 1 && !(end > start)) throw Error(ErrorKind::InvalidArgument, "grid end must exceed its start");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) grid.push_back(steps == 1 ? start : start + (end - start) * i / (steps - 1));
  return grid;
}

json grid_json(double start, double end, int steps) { return {{"start", start}, {"end", end}, {"steps", steps}}; }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Options shared by every command.
struct Common {
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--out-dir", common.out_dir, "Directory for outputs and the run manifest")->capture_default_str();
}

// ---------------------------------------------------------------- mixing-scan

struct MixingArgs {
  Common common;
  std::string species = "nv";
  double angle_deg = 54.7;
  double b_start = 0.0;
  double b_end = 150.0;
  int b_steps = 151;
  std::string manifold = "gs";
  std::string output = "mixing_scan.csv";
};

int run_mixing_scan(const MixingArgs& a) {
  const LoadedSpecies sp = load_species(a.species);
  const Manifold manifold = manifold_from_string(a.manifold);
  const auto grid = linear_grid(a.b_start, a.b_end, a.b_steps);
  cli::RunManifest run("mixing-scan", a.common.out_dir);
  run.set_config({{"species", io::to_json(sp.species)},
                  {"angle_deg", a.angle_deg},
                  {"b_grid_mt", grid_json(a.b_start, a.b_end, a.b_steps)},
                  {"manifold", to_string(manifold)}});
  run.add_input("species", sp.text);
  run.write_output(a.output, io::mixing_csv(mixing_scan(sp.species, a.angle_deg, grid, manifold)));
  run.finish();
  return kOk;
}

// --------------------------------------------------------------------- fit-t1

struct FitArgs {
  Common common;
  std::string input;
  std::vector<double> report_at;
  std::string output = "fit_t1.json";
};

int run_fit_t1(const FitArgs& a) {
  const std::string text = io::read_text_file(a.input);
  const auto points = io::parse_relaxometry_csv(text);
  cli::RunManifest run("fit-t1", a.common.out_dir);
  run.set_config({{"report_at_f_plus_mhz", a.report_at}});
  run.add_input("relaxometry", text);

  const RelaxFit fit = fit_relaxometry(points);
  if (!fit.strong_dephasing) {
    std::cerr << "warning: fitted b/Gamma is not << 1; the Lorentzian law may not hold\n";
  }
  json out = io::to_json(fit);
  json t1 = json::array();
  for (double f : a.report_at) t1.push_back({{"f_plus_mhz", f}, {"t1_ms", 1.0 / relaxation_rate(fit.model, f)}});
  out["t1_at"] = t1;
  run.write_output(a.output, dump(out));
  run.finish();
  return kOk;
}

// ------------------------------------------------------------ estimate-density

struct DensityArgs {
  Common common;
  double b_khz = 0.0;
  double b_sigma_khz = 0.0;
  std::string profile;
  double standoff_nm = 0.0;
  std::string output = "density.json";
};

int run_estimate_density(const DensityArgs& a) {
  const std::string text = io::read_text_file(a.profile);
  const LayeredProfile shape = load_depth_profile(text).normalized();
  cli::RunManifest run("estimate-density", a.common.out_dir);
  run.set_config({{"b_khz", a.b_khz}, {"b_sigma_khz", a.b_sigma_khz}, {"standoff_nm", a.standoff_nm}});
  run.add_input("profile", text);
  const DensityEstimate est = estimate_density(a.b_khz, a.b_sigma_khz, shape, a.standoff_nm);
  run.write_output(a.output, dump({{"rho_total_nm2", est.rho_total_nm2},
                                   {"rho_sigma_nm2", est.rho_sigma_nm2},
                                   {"b_rms_mt", est.b_rms_mt},
                                   {"b_khz", est.b_khz}}));
  run.finish();
  return kOk;
}

// ------------------------------------------------------------ forward-coupling

struct ForwardArgs {
  Common common;
  std::string profile;
  std::optional<double> rho_nm2;
  double standoff_nm = 0.0;
  std::string output = "coupling.json";
};

int run_forward_coupling(const ForwardArgs& a) {
  const std::string text = io::read_text_file(a.profile);
  LayeredProfile profile = load_depth_profile(text);
  if (a.rho_nm2) profile = profile.normalized().scaled(*a.rho_nm2);
  cli::RunManifest run("forward-coupling", a.common.out_dir);
  run.set_config({{"rho_nm2", a.rho_nm2 ? json(*a.rho_nm2) : json(nullptr)}, {"standoff_nm", a.standoff_nm}});
  run.add_input("profile", text);
  const CouplingEstimate est = coupling_from_profile(profile.shifted(a.standoff_nm));
  run.write_output(a.output, dump({{"rho_total_nm2", profile.total_density()},
                                   {"b_khz", est.b_khz},
                                   {"b_rms_mt", est.b_rms_mt}}));
  run.finish();
  return kOk;
}

// -------------------------------------------------------------- simulate-deer

struct DeerArgs {
  Common common;
  std::string profile;
  double depth_nm = 1.0;
  double rho_nm2 = 0.01;
  double standoff_nm = 8.0;
  double polarization = 0.0;
  double eta = 1.0;
  double cutoff_nm = 0.0;
  double tau_start = 0.0;
  double tau_end = 3.0;
  int tau_steps = 61;
  double t2_us = 2.6;
  double stretch_n = 1.0;
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  std::string sequence = "deer";
  std::size_t threads = 0;
  std::string sweep_axis;
  std::vector<double> values;
};

json signal_summary(const DeerSignal& s) {
  json j{{"oscillation_frequency_mhz", oscillation_frequency(s)}};
  const auto zero = first_zero_crossing(s);
  j["first_zero_crossing_us"] = zero ? json(*zero) : json(nullptr);
  const auto faded = magnitude_decay_time(s, 0.1);
  j["magnitude_below_0.1_us"] = faded ? json(*faded) : json(nullptr);
  try {
    j["decay_rate_per_us"] = deer_decay_rate(s);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoDecay) throw;
    j["decay_rate_per_us"] = nullptr;
  }
  return j;
}

std::string value_label(double v) {
  std::string s = io::format_fixed(v, 6);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

int run_simulate_deer(const DeerArgs& a) {
  cli::RunManifest run("simulate-deer", a.common.out_dir);
  BathSpec spec;
  json profile_json;
  if (!a.profile.empty()) {
    const std::string text = io::read_text_file(a.profile);
    spec.profile = load_depth_profile(text);
    run.add_input("profile", text);
    profile_json = "file";
  } else {
    spec.profile = LayeredProfile({{a.depth_nm, a.rho_nm2}});
    profile_json = {{"depth_nm", a.depth_nm}, {"rho_nm2", a.rho_nm2}};
  }
  spec.polarization = a.polarization;
  spec.drive_efficiency = a.eta;
  spec.nv_standoff_nm = a.standoff_nm;
  spec.lateral_cutoff_nm = a.cutoff_nm > 0.0 ? a.cutoff_nm : spec.minimum_cutoff_nm();

  DeerConfig config;
  config.tau_grid_us = linear_grid(a.tau_start, a.tau_end, a.tau_steps);
  config.t2_us = a.t2_us;
  config.stretch_n = a.stretch_n;
  config.n_samples = a.samples;
  config.seed = a.seed;
  config.sequence = sequence_from_string(a.sequence);
  config.threads = a.threads;

  // Thread count never changes results, so it stays out of the hash.
  json resolved{{"profile", profile_json},
                {"polarization", a.polarization},
                {"eta", a.eta},
                {"standoff_nm", a.standoff_nm},
                {"lateral_cutoff_nm", spec.lateral_cutoff_nm},
                {"tau_grid_us", grid_json(a.tau_start, a.tau_end, a.tau_steps)},
                {"t2_us", a.t2_us},
                {"stretch_n", a.stretch_n},
                {"samples", a.samples},
                {"sequence", to_string(config.sequence)}};
  run.set_seed(a.seed);

  if (a.sweep_axis.empty()) {
    run.set_config(resolved);
    const DeerSignal signal = deer_signal(spec, config);
    run.write_output("deer.csv", io::deer_csv(signal));
    run.write_output("deer_summary.json", dump(signal_summary(signal)));
    run.finish();
    return kOk;
  }

  const SweepAxis axis = sweep_axis_from_string(a.sweep_axis);
  resolved["sweep"] = {{"axis", to_string(axis)}, {"values", a.values}};
  run.set_config(resolved);
  const auto rows = sweep(axis, a.values, spec, config);
  json index = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& row = rows[i];
    const std::string stem = "sweep_" + std::string(to_string(axis)) + "_" + value_label(row.value);
    run.write_output(stem + ".csv", io::deer_csv(row.signal));
    run.write_output(stem + "_hahn.csv", io::deer_csv(row.reference));
    json entry = signal_summary(row.signal);
    entry["value"] = row.value;
    entry["seed"] = row.seed;
    entry["file"] = stem + ".csv";
    entry["reference_file"] = stem + "_hahn.csv";
    entry["signal_rate_per_us"] = row.signal_rate ? json(*row.signal_rate) : json(nullptr);
    entry["bath_rate_per_us"] = row.bath_rate ? json(*row.bath_rate) : json(nullptr);
    index.push_back(entry);
  }
  run.write_output("sweep_index.json", dump({{"axis", to_string(axis)}, {"runs", index}}));
  run.finish();
  return kOk;
}

// ------------------------------------------------------------ synthesize-odmr

struct OdmrArgs {
  Common common;
  std::vector<std::string> species{"nv", "vb"};
  double b_mt = 0.0;
  std::vector<double> field_dir{0.0, 0.0, 1.0};
  double base_contrast = 0.1;
  double fwhm_mhz = 10.0;
  double f_start = 2000.0;
  double f_end = 4500.0;
  int f_steps = 2501;
  std::string output = "odmr.csv";
};

int run_synthesize_odmr(const OdmrArgs& a) {
  if (a.field_dir.size() != 3) throw Error(ErrorKind::InvalidArgument, "--field-dir takes three components");
  const FieldConfig field = FieldConfig::along({a.field_dir[0], a.field_dir[1], a.field_dir[2]}, a.b_mt);
  cli::RunManifest run("synthesize-odmr", a.common.out_dir);
  std::vector<OdmrLine> lines;
  json species_json = json::array();
  json line_json = json::array();
  for (const std::string& name : a.species) {
    const LoadedSpecies sp = load_species(name);
    run.add_input("species", sp.text);
    species_json.push_back(io::to_json(sp.species));
    const double retention = contrast_factor(sp.species, field, 1.0);
    for (const OdmrLine& line : species_lines(sp.species, field, a.base_contrast, a.fwhm_mhz)) {
      lines.push_back(line);
      line_json.push_back({{"species", sp.species.name},
                           {"center_mhz", line.center_mhz},
                           {"contrast", line.contrast},
                           {"contrast_retention", retention}});
    }
  }
  run.set_config({{"species", species_json},
                  {"b_mt", a.b_mt},
                  {"field_direction", {field.direction[0], field.direction[1], field.direction[2]}},
                  {"base_contrast", a.base_contrast},
                  {"fwhm_mhz", a.fwhm_mhz},
                  {"frequency_grid_mhz", grid_json(a.f_start, a.f_end, a.f_steps)}});
  const auto grid = linear_grid(a.f_start, a.f_end, a.f_steps);
  run.write_output(a.output, io::spectrum_csv(synthesize_spectrum(lines, grid)));
  run.write_output("odmr_lines.json", dump(line_json));
  run.finish();
  return kOk;
}

// -------------------------------------------------------- simulate-t1-profile

struct T1ProfileArgs {
  Common common;
  double b_khz = 78.0;
  double gamma_mhz = 160.0;
  double baseline_per_ms = 0.24;
  double f_center_mhz = 3315.58;
  double f_start = 2900.0;
  double f_end = 3750.0;
  int points = 50;
  double noise = 0.0;
  bool with_sigma = false;
  std::uint64_t seed = 0;
  std::vector<double> trace_t1_at;
  double trace_end_ms = 10.0;
  int trace_steps = 101;
  std::string output = "relaxometry.csv";
};

int run_simulate_t1_profile(const T1ProfileArgs& a) {
  const RelaxModel model{a.b_khz, a.gamma_mhz, a.baseline_per_ms, a.f_center_mhz};
  model.validate();
  if (!(a.noise >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise fraction must be non-negative");
  cli::RunManifest run("simulate-t1-profile", a.common.out_dir);
  run.set_seed(a.seed);
  run.set_config({{"b_khz", a.b_khz},
                  {"gamma_mhz", a.gamma_mhz},
                  {"baseline_per_ms", a.baseline_per_ms},
                  {"f_center_mhz", a.f_center_mhz},
                  {"f_grid_mhz", grid_json(a.f_start, a.f_end, a.points)},
                  {"noise_fraction", a.noise},
                  {"with_sigma", a.with_sigma},
                  {"trace_f_plus_mhz", a.trace_t1_at},
                  {"trace_grid_ms", grid_json(0.0, a.trace_end_ms, a.trace_steps)}});

  boost::random::mt19937_64 engine(rng::derive_seed(a.seed, 0x71));
  boost::random::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<RelaxometryPoint> points;
  for (double f : linear_grid(a.f_start, a.f_end, a.points)) {
    const double rate = relaxation_rate(model, f);
    RelaxometryPoint p{f, rate * (1.0 + a.noise * gauss(engine)), std::nullopt};
    if (!(p.rate_per_ms > 0.0)) p.rate_per_ms = 1e-9;
    if (a.with_sigma) p.sigma_per_ms = std::max(a.noise, 1e-6) * rate;
    points.push_back(p);
  }
  run.write_output(a.output, io::relaxometry_csv(points));

  if (!a.trace_t1_at.empty()) {
    const auto t = linear_grid(0.0, a.trace_end_ms, a.trace_steps);
    std::string csv = "t_ms";
    std::vector<std::vector<double>> traces;
    for (double f : a.trace_t1_at) {
      csv += ",signal_f" + value_label(f);
      traces.push_back(simulate_t1_trace(1.0 / relaxation_rate(model, f), t));
    }
    csv += "\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
      csv += io::format_fixed(t[i]);
      for (const auto& tr : traces) csv += "," + io::format_fixed(tr[i]);
      csv += "\n";
    }
    run.write_output("t1_traces.csv", csv);
  }
  run.finish();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-physics toolkit for NV / V_B- hybrid sensing", "hybridspin"};
  app.set_version_flag("--version", HYBRIDSPIN_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  {
    const fs::path default_config = config_dir() / "hybridspin.toml";
    app.set_config("--config", fs::exists(default_config) ? default_config.string() : "",
                   "TOML file with one [command] table of option values; flags take precedence");
  }

  MixingArgs mix;
  auto* mix_cmd = app.add_subcommand("mixing-scan", "Spin-state overlaps versus field magnitude");
  add_common(mix_cmd, mix.common);
  mix_cmd->add_option("--species", mix.species, "Species name or JSON file")->capture_default_str();
  mix_cmd->add_option("--angle-deg", mix.angle_deg, "Field angle to the species axis")->capture_default_str();
  mix_cmd->add_option("--b-start", mix.b_start, "First field, mT")->capture_default_str();
  mix_cmd->add_option("--b-end", mix.b_end, "Last field, mT")->capture_default_str();
  mix_cmd->add_option("--b-steps", mix.b_steps, "Number of field points")->capture_default_str();
  mix_cmd->add_option("--manifold", mix.manifold, "gs or es")->check(CLI::IsMember({"gs", "es"}))->capture_default_str();
  mix_cmd->add_option("--output", mix.output, "CSV file name")->capture_default_str();

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit-t1", "Fit the cross-relaxation Lorentzian to (f+, 1/T1) data");
  add_common(fit_cmd, fit.common);
  fit_cmd->add_option("--input", fit.input, "CSV with f_plus_mhz,rate_per_ms[,sigma_per_ms]")->required();
  fit_cmd->add_option("--report-at", fit.report_at, "f+ values (MHz) at which to report T1 of the fitted model");
  fit_cmd->add_option("--output", fit.output, "JSON file name")->capture_default_str();

  DensityArgs den;
  auto* den_cmd = app.add_subcommand("estimate-density", "Areal V_B- density from a measured coupling");
  add_common(den_cmd, den.common);
  den_cmd->add_option("--b-khz", den.b_khz, "Measured b/2pi, kHz")->required();
  den_cmd->add_option("--b-sigma-khz", den.b_sigma_khz, "1 sigma of b/2pi, kHz")->capture_default_str();
  den_cmd->add_option("--profile", den.profile, "Depth profile CSV (shape; rescaled to unit total)")->required();
  den_cmd->add_option("--standoff-nm", den.standoff_nm, "Added to every layer depth")->required();
  den_cmd->add_option("--output", den.output, "JSON file name")->capture_default_str();

  ForwardArgs fwd;
  auto* fwd_cmd = app.add_subcommand("forward-coupling", "Coupling b produced by a layered profile");
  add_common(fwd_cmd, fwd.common);
  fwd_cmd->add_option("--profile", fwd.profile, "Depth profile CSV")->required();
  fwd_cmd->add_option("--rho-nm2", fwd.rho_nm2, "Rescale the profile to this total density");
  fwd_cmd->add_option("--standoff-nm", fwd.standoff_nm, "Added to every layer depth")->capture_default_str();
  fwd_cmd->add_option("--output", fwd.output, "JSON file name")->capture_default_str();

  DeerArgs deer;
  auto* deer_cmd = app.add_subcommand("simulate-deer", "Monte Carlo DEER / Hahn-echo signals and sweeps");
  add_common(deer_cmd, deer.common);
  deer_cmd->add_option("--profile", deer.profile, "Depth profile CSV (overrides --depth-nm/--rho-nm2)");
  deer_cmd->add_option("--depth-nm", deer.depth_nm, "Single-layer depth below the hBN surface")->capture_default_str();
  deer_cmd->add_option("--rho-nm2", deer.rho_nm2, "Single-layer areal density")->capture_default_str();
  deer_cmd->add_option("--standoff-nm", deer.standoff_nm, "NV distance below the hBN surface")->capture_default_str();
  deer_cmd->add_option("--p", deer.polarization, "Bath polarization in [-1, 1]")->capture_default_str();
  deer_cmd->add_option("--eta", deer.eta, "Bath pi-pulse flip probability")->capture_default_str();
  deer_cmd->add_option("--cutoff-nm", deer.cutoff_nm, "Lateral cutoff; 0 picks 20x the deepest distance")
      ->capture_default_str();
  deer_cmd->add_option("--tau-start", deer.tau_start, "First tau, us")->capture_default_str();
  deer_cmd->add_option("--tau-end", deer.tau_end, "Last tau, us")->capture_default_str();
  deer_cmd->add_option("--tau-steps", deer.tau_steps, "Number of tau points")->capture_default_str();
  deer_cmd->add_option("--t2-us", deer.t2_us, "NV coherence time")->capture_default_str();
  deer_cmd->add_option("--stretch-n", deer.stretch_n, "Stretch exponent of the T2 envelope")->capture_default_str();
  deer_cmd->add_option("--samples", deer.samples, "Monte Carlo samples")->capture_default_str();
  deer_cmd->add_option("--seed", deer.seed, "Random seed")->capture_default_str();
  deer_cmd->add_option("--sequence", deer.sequence, "deer or hahn")
      ->check(CLI::IsMember({"deer", "hahn"}))
      ->capture_default_str();
  deer_cmd->add_option("--threads", deer.threads, "Worker threads, 0 for all cores")->capture_default_str();
  deer_cmd->add_option("--sweep", deer.sweep_axis, "Sweep axis: depth, polarization or t2")
      ->check(CLI::IsMember({"depth", "polarization", "t2"}));
  deer_cmd->add_option("--values", deer.values, "Sweep values");

  OdmrArgs odmr;
  auto* odmr_cmd = app.add_subcommand("synthesize-odmr", "CW ODMR spectrum with mixing-reduced contrast");
  add_common(odmr_cmd, odmr.common);
  // No capture_default_str here: CLI11 would refill a bare --species with the defaults.
  odmr_cmd->add_option("--species", odmr.species, "Species names or JSON files [nv vb]; bare flag for a flat spectrum")
      ->expected(0, CLI::detail::expected_max_vector_size);
  odmr_cmd->add_option("--b-mt", odmr.b_mt, "Field magnitude, mT")->capture_default_str();
  odmr_cmd->add_option("--field-dir", odmr.field_dir, "Lab-frame field direction")->expected(3)->capture_default_str();
  odmr_cmd->add_option("--base-contrast", odmr.base_contrast, "Unmixed contrast")->capture_default_str();
  odmr_cmd->add_option("--fwhm-mhz", odmr.fwhm_mhz, "Line width")->capture_default_str();
  odmr_cmd->add_option("--f-start", odmr.f_start, "First frequency, MHz")->capture_default_str();
  odmr_cmd->add_option("--f-end", odmr.f_end, "Last frequency, MHz")->capture_default_str();
  odmr_cmd->add_option("--f-steps", odmr.f_steps, "Number of frequency points")->capture_default_str();
  odmr_cmd->add_option("--output", odmr.output, "CSV file name")->capture_default_str();

  T1ProfileArgs t1;
  auto* t1_cmd = app.add_subcommand("simulate-t1-profile", "Synthetic (f+, 1/T1) dataset and T1 traces");
  add_common(t1_cmd, t1.common);
  t1_cmd->add_option("--b-khz", t1.b_khz, "b/2pi, kHz")->capture_default_str();
  t1_cmd->add_option("--gamma-mhz", t1.gamma_mhz, "Gamma/2pi, MHz")->capture_default_str();
  t1_cmd->add_option("--baseline-per-ms", t1.baseline_per_ms, "1/T1 from other channels")->capture_default_str();
  t1_cmd->add_option("--f-center-mhz", t1.f_center_mhz, "Resonance center")->capture_default_str();
  t1_cmd->add_option("--f-start", t1.f_start, "First f+, MHz")->capture_default_str();
  t1_cmd->add_option("--f-end", t1.f_end, "Last f+, MHz")->capture_default_str();
  t1_cmd->add_option("--points", t1.points, "Number of points")->capture_default_str();
  t1_cmd->add_option("--noise", t1.noise, "Relative Gaussian noise on each rate")->capture_default_str();
  t1_cmd->add_flag("--with-sigma", t1.with_sigma, "Add a sigma_per_ms column (noise x rate)");
  t1_cmd->add_option("--seed", t1.seed, "Random seed")->capture_default_str();
  t1_cmd->add_option("--trace-at", t1.trace_t1_at, "f+ values (MHz) at which to write T1 traces");
  t1_cmd->add_option("--trace-end-ms", t1.trace_end_ms, "Trace length")->capture_default_str();
  t1_cmd->add_option("--trace-steps", t1.trace_steps, "Trace points")->capture_default_str();
  t1_cmd->add_option("--output", t1.output, "CSV file name")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*mix_cmd) return run_mixing_scan(mix);
    if (*fit_cmd) return run_fit_t1(fit);
    if (*den_cmd) return run_estimate_density(den);
    if (*fwd_cmd) return run_forward_coupling(fwd);
    if (*deer_cmd) {
      if (deer.sweep_axis.empty() != deer.values.empty()) {
        throw Error(ErrorKind::InvalidArgument, "--sweep and --values go together");
      }
      return run_simulate_deer(deer);
    }
    if (*odmr_cmd) {
      // A bare --species (no names) asks for the flat, line-free spectrum.
      if (odmr.species.size() == 1 && odmr.species[0].empty()) odmr.species.clear();
      return run_synthesize_odmr(odmr);
    }
    if (*t1_cmd) return run_simulate_t1_profile(t1);
  } catch (const Error& e) {
    std::cerr << "hybridspin: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "hybridspin: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "hybridspin: internal error: " << e.what() << "\n";
    return 1;
  }
  return kUsage;
}
