// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <unistd.h>
#include <vector>

#include "hybridspin/deer_sim.hpp"
#include "hybridspin/dipolar_bath.hpp"
#include "hybridspin/io.hpp"
#include "hybridspin/relaxometry.hpp"
#include "hybridspin/spin_core.hpp"

using namespace hybridspin;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
  return g;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

SpinSpecies nv() {
  SpinSpecies s;
  s.name = "nv";
  s.d_gs_mhz = 2870.0;
  s.d_es_mhz = 1420.0;
  s.gamma_e_mhz_per_mt = 28.025;
  const double k = 1.0 / std::sqrt(3.0);
  s.axis = {k, k, k};
  return s;
}

SpinSpecies vb() {
  SpinSpecies s;
  s.name = "vb";
  s.d_gs_mhz = 3470.0;
  s.d_es_mhz = 2100.0;
  s.gamma_e_mhz_per_mt = 28.025;
  return s;
}

// 50 points of f+ around the 15.9 mT crossing.
const RelaxModel kTruth{78.0, 160.0, 0.24, 2870.0 + 28.025 * 15.9};

std::vector<RelaxometryPoint> synthetic_t1(double noise, std::uint64_t seed) {
  boost::random::mt19937_64 engine(seed);
  boost::random::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<RelaxometryPoint> pts;
  for (double f : grid(2900.0, 3750.0, 50)) {
    const double r = relaxation_rate(kTruth, f);
    pts.push_back({f, r * (1.0 + noise * gauss(engine)), std::nullopt});
  }
  return pts;
}

// ------------------------------------------------------------------ criteria

Outcome dipolar() {
  const double c = dipolar_constant();
  const double dev = rel(c, 3.799);
  return {dev < 1e-3, fmt("C = %.6f mT nm^3, |C/3.799 - 1| = %.2e (tol 1e-3)", c, dev)};
}

Outcome relaxometry_round_trip() {
  const RelaxFit clean = fit_relaxometry(synthetic_t1(0.0, 0));
  const double worst = std::max({rel(clean.model.b_khz, kTruth.b_khz), rel(clean.model.gamma_mhz, kTruth.gamma_mhz),
                                 rel(clean.model.baseline_per_ms, kTruth.baseline_per_ms),
                                 rel(clean.model.f_center_mhz, kTruth.f_center_mhz)});
  const RelaxFit noisy = fit_relaxometry(synthetic_t1(0.05, 20240101));
  const double b = noisy.model.b_khz;
  const double sb = std::sqrt(noisy.covariance[0][0]);
  const bool pass = worst < 1e-5 && std::abs(b - 78.0) < 5.0;
  return {pass, fmt("noiseless worst rel err %.1e (tol 1e-5); 5%% noise, 50 pts: b = %.2f +- %.2f kHz (|b-78| < 5)",
                    worst, b, sb)};
}

Outcome t1_endpoints() {
  const RelaxModel m = fit_relaxometry(synthetic_t1(0.0, 0)).model;
  const SpinSpecies s = nv();
  const auto f_at = [&](double b_mt) {
    return transition_frequencies(s, FieldConfig::along(s.axis, b_mt), Manifold::Ground).f_plus_mhz;
  };
  const double t1_match = 1.0 / relaxation_rate(m, f_at(15.9));
  const double t1_far = 1.0 / relaxation_rate(m, f_at(24.8));
  const bool ok_match = std::abs(t1_match - 1.38) <= 0.13;
  const bool ok_far = std::abs(t1_far - 3.47) <= 0.38;
  return {ok_match && ok_far,
          fmt("T1(15.9 mT, f+ = %.2f MHz) = %.3f ms vs 1.38(13) [%s]; T1(24.8 mT, f+ = %.2f MHz) = %.3f ms vs "
              "3.47(38) [%s]",
              f_at(15.9), t1_match, ok_match ? "ok" : "out", f_at(24.8), t1_far, ok_far ? "ok" : "out")};
}

Outcome density() {
  boost::random::mt19937_64 engine(4);
  boost::random::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Layer> layers;
    double depth = 0.3 + u(engine);
    for (int i = 0, n = 1 + static_cast<int>(10 * u(engine)); i < n; ++i, depth += 0.1 + u(engine)) {
      layers.push_back({depth, 1e-4 + u(engine)});
    }
    const LayeredProfile shape = LayeredProfile(layers).normalized();
    const double rho = 1e-3 + 0.05 * u(engine);
    const double standoff = 1.0 + 20.0 * u(engine);
    const auto fwd = coupling_from_profile(shape.scaled(rho).shifted(standoff));
    worst = std::max(worst, rel(estimate_density(fwd.b_khz, 5.0, shape, standoff).rho_total_nm2, rho));
  }
  // Effective single sheet 1 nm into the hBN, NV standoff solved so that
  // 0.009 nm^-2 produces 78 kHz.
  const auto single = estimate_density(78.0, 5.0, LayeredProfile({{1.0, 1.0}}), 10.381732164282678);
  const auto srim = estimate_density(
      78.0, 5.0, load_depth_profile_file(std::string(HYBRIDSPIN_TEST_DATA_DIR) + "/srim_hbn_shape.csv").normalized(),
      8.684594200454145);
  const double rs = single.rho_sigma_nm2 / single.rho_total_nm2;
  const double rs2 = srim.rho_sigma_nm2 / srim.rho_total_nm2;
  const bool pass = worst < 1e-10 && std::abs(single.rho_total_nm2 - 0.009) < 1e-6 &&
                    std::abs(srim.rho_total_nm2 - 0.009) < 1e-6 && rs >= 0.11 && rs <= 0.13 && rs2 >= 0.11 &&
                    rs2 <= 0.13;
  return {pass, fmt("round trip worst rel %.1e (tol 1e-10); single sheet rho = %.6f +- %.1f%%, SRIM shape rho = "
                    "%.6f +- %.1f%% (want 0.009, 11-13%%)",
                    worst, single.rho_total_nm2, 100 * rs, srim.rho_total_nm2, 100 * rs2)};
}

Outcome variance() {
  boost::random::mt19937_64 engine(5);
  boost::random::uniform_real_distribution<double> u(0.0, 1.0);
  std::string detail;
  bool pass = true;
  for (int k = 0; k < 3; ++k) {
    std::vector<Layer> layers;
    double depth = 0.3 + u(engine);
    for (int i = 0, n = 2 + static_cast<int>(4 * u(engine)); i < n; ++i, depth += 0.333 + u(engine)) {
      layers.push_back({depth, 0.02 * u(engine)});
    }
    BathSpec spec;
    spec.profile = LayeredProfile(layers);
    spec.nv_standoff_nm = 3.0 + 7.0 * u(engine);
    spec.lateral_cutoff_nm = spec.minimum_cutoff_nm();
    const double draws = 10000;
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < draws; ++seed) {
      for (const BathSpin& s : sample_bath(spec, seed)) sum += s.coupling_khz * s.coupling_khz;
    }
    const double target = std::pow(coupling_from_profile(spec.profile.shifted(spec.nv_standoff_nm)).b_khz, 2);
    const double dev = rel(sum / draws, target);
    pass = pass && dev < 0.05;
    detail += fmt("%sprofile %d (%zu layers): %.4g vs %.4g kHz^2 (%.2f%%)", k ? "; " : "", k + 1, layers.size(),
                  sum / draws, target, 100 * dev);
  }
  return {pass, detail + " (tol 5%, 1e4 draws)"};
}

Outcome deer() {
  // (a) no drive: exactly the Hahn envelope.
  BathSpec spec;
  spec.profile = LayeredProfile({{1.0, 0.01}});
  spec.nv_standoff_nm = 8.0;
  spec.drive_efficiency = 0.0;
  spec.lateral_cutoff_nm = spec.minimum_cutoff_nm();
  DeerConfig c;
  c.tau_grid_us = grid(0.0, 3.0, 61);
  c.t2_us = 2.6;
  c.n_samples = 2000;
  const DeerSignal undriven = deer_signal(spec, c);
  double worst_a = 0.0;
  for (std::size_t i = 0; i < undriven.tau_us.size(); ++i) {
    worst_a = std::max(worst_a, std::abs(undriven.coherence[i] - hahn_envelope(undriven.tau_us[i], c.t2_us, 1.0)));
  }
  const bool a = worst_a == 0.0;

  // (b) unpolarized bath at 0.01 nm^-2: DEER decays faster than the Hahn echo.
  spec.drive_efficiency = 1.0;
  bool b = true;
  std::string b_detail;
  for (double standoff : {5.0, 8.0, 12.0}) {
    spec.nv_standoff_nm = standoff;
    spec.lateral_cutoff_nm = spec.minimum_cutoff_nm();
    c.sequence = Sequence::Deer;
    const double r_deer = deer_decay_rate(deer_signal(spec, c));
    c.sequence = Sequence::Hahn;
    const double r_hahn = deer_decay_rate(deer_signal(spec, c));
    b = b && r_deer > r_hahn;
    b_detail += fmt("%s%.0f nm %.3f>%.3f", b_detail.empty() ? "" : ", ", standoff, r_deer, r_hahn);
  }
  c.sequence = Sequence::Deer;

  // (c) one fixed bath (seed 0, NV 8 nm below the surface), polarization sweep.
  spec.nv_standoff_nm = 8.0;
  spec.lateral_cutoff_nm = spec.minimum_cutoff_nm();
  c.tau_grid_us = grid(0.0, 15.0, 301);
  c.n_samples = 4000;
  c.seed = 0;
  const std::vector<double> ps{0.0, 0.25, 0.5, 1.0};
  c.t2_us = 12.0;
  const auto long_t2 = sweep(SweepAxis::Polarization, ps, spec, c);
  bool monotone = true;
  std::string freqs;
  for (std::size_t i = 0; i < long_t2.size(); ++i) {
    const double f = std::abs(oscillation_frequency(long_t2[i].signal)) * 1e3;
    freqs += fmt("%s%.1f", i ? "/" : "", f);
    if (i > 0) monotone = monotone && f > std::abs(oscillation_frequency(long_t2[i - 1].signal)) * 1e3;
  }
  const auto long_zero = first_zero_crossing(long_t2.back().signal);
  const auto long_decay = magnitude_decay_time(long_t2.back().signal, 0.1);
  const bool oscillates = long_zero && (!long_decay || *long_zero < *long_decay);

  c.t2_us = 2.6;
  const std::vector<double> full{1.0};
  const DeerSignal short_t2 = sweep(SweepAxis::Polarization, full, spec, c).front().signal;
  const auto zero = first_zero_crossing(short_t2);
  const auto decay = magnitude_decay_time(short_t2, 0.1);
  const bool masked = decay && (!zero || *zero > *decay);

  const bool pass = a && b && monotone && oscillates && masked;
  return {pass,
          fmt("(a) max |eta=0 - Hahn| = %.1e [%s]; (b) 1/e rates DEER>Hahn (us^-1) %s [%s]; (c) T2=12: |f| over "
              "p=0/0.25/0.5/1 = %s kHz [%s], p=1 zero crossing %.2f us [%s]; T2=2.6, p=1: |S|<0.1 at %.2f us, "
              "first zero %s [%s]",
              worst_a, a ? "ok" : "out", b_detail.c_str(), b ? "ok" : "out", freqs.c_str(),
              monotone ? "ok" : "out", long_zero ? *long_zero : -1.0, oscillates ? "ok" : "out",
              decay ? *decay : -1.0, zero ? fmt("%.2f us", *zero).c_str() : "none", masked ? "ok" : "out")};
}

Outcome mixing() {
  const SpinSpecies species[] = {nv(), vb()};
  double worst_axis = 0.0;
  double worst_unitary = 0.0;
  for (const SpinSpecies& s : species) {
    for (Manifold m : {Manifold::Ground, Manifold::Excited}) {
      for (double b = 0.0; b <= 200.0; b += 5.0) {
        for (const Overlaps& o : mixing_overlaps(s, FieldConfig::along(s.axis, b), m)) {
          for (double w : o) worst_axis = std::max(worst_axis, std::min(std::abs(w), std::abs(w - 1.0)));
        }
      }
      boost::random::mt19937_64 engine(7);
      boost::random::uniform_real_distribution<double> u(-1.0, 1.0);
      for (int trial = 0; trial < 1000; ++trial) {
        const Vec3 dir{u(engine), u(engine), u(engine)};
        if (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2] < 1e-6) continue;
        const auto d = diagonalize(build_hamiltonian(s, FieldConfig::along(dir, 150.0 * (1.0 + u(engine))), m), m);
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) {
            Complex dot = 0.0;
            for (int k = 0; k < 3; ++k) dot += std::conj(d.amplitudes[i][k]) * d.amplitudes[j][k];
            worst_unitary = std::max(worst_unitary, std::abs(dot - (i == j ? 1.0 : 0.0)));
          }
        }
      }
    }
  }
  const auto threshold = [](const SpinSpecies& s) {
    const auto rows = mixing_scan(s, 54.7, grid(0.0, 200.0, 20001), Manifold::Ground);
    for (const MixingRow& r : rows) {
      double alpha = 0.0;
      for (const Overlaps& o : r.levels) alpha = std::max(alpha, o[0]);
      if (alpha < 0.9) return r.b_mt;
    }
    return std::numeric_limits<double>::infinity();
  };
  const double b_nv = threshold(nv());
  const double b_vb = threshold(vb());
  const bool pass = worst_axis < 1e-12 && worst_unitary < 1e-10 && b_nv < b_vb;
  return {pass, fmt("on-axis max distance from {0,1} %.1e; max |U^H U - 1| %.1e; 54.7 deg |alpha|^2 < 0.9 at "
                    "NV %.2f mT < V_B %.2f mT",
                    worst_axis, worst_unitary, b_nv, b_vb)};
}

Outcome regression() {
  // Counts versus concentration (1e-3 nm^-2) for six samples around 0.009 nm^-2.
  const std::vector<double> x{2.0, 4.0, 6.0, 9.0, 12.0, 15.0};
  boost::random::mt19937_64 engine(20240101);
  boost::random::normal_distribution<double> noise(0.0, 11.7);
  std::vector<double> y;
  for (double xi : x) y.push_back(6.86 * xi + 3.0 + noise(engine));
  const LinearFit fit = linear_regression(x, y);
  const bool pass = std::abs(fit.slope - 6.86) <= fit.slope_sigma;
  return {pass, fmt("slope %.3f +- %.3f, |slope - 6.86| = %.3f", fit.slope, fit.slope_sigma, std::abs(fit.slope - 6.86))};
}

// Runs every CLI command twice into separate directories and compares bytes.
Outcome determinism() {
#ifndef HYBRIDSPIN_CLI_PATH
  return {false, "command-line tool not built"};
#else
  const std::string cli = HYBRIDSPIN_CLI_PATH;
  const fs::path root = fs::temp_directory_path() / ("hybridspin_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string data = HYBRIDSPIN_TEST_DATA_DIR;
  const std::string profile = data + "/srim_hbn_shape.csv";
  const std::string relax = (root / "relax.csv").string();
  io::write_file_atomic(relax, io::relaxometry_csv(synthetic_t1(0.05, 3)));

  struct Command {
    std::string name;
    std::string args;
    std::string args_b;  // second run, when it differs in something irrelevant
  };
  const std::vector<Command> commands{
      {"mixing-scan", "mixing-scan --species nv --angle-deg 54.7", ""},
      {"mixing-scan-es", "mixing-scan --species vb --manifold es --angle-deg 30", ""},
      {"fit-t1", "fit-t1 --input " + relax + " --report-at 3315.58 3565", ""},
      {"estimate-density", "estimate-density --b-khz 78 --b-sigma-khz 5 --profile " + profile +
                               " --standoff-nm 8.684594200454145", ""},
      {"forward-coupling", "forward-coupling --profile " + profile + " --rho-nm2 0.009 --standoff-nm 8.7", ""},
      {"simulate-deer", "simulate-deer --standoff-nm 8 --samples 1500 --seed 11 --threads 1",
       "simulate-deer --standoff-nm 8 --samples 1500 --seed 11 --threads 4"},
      {"simulate-deer-sweep",
       "simulate-deer --samples 800 --seed 2 --sweep polarization --values 0 0.5 1 --t2-us 12 --threads 2",
       "simulate-deer --samples 800 --seed 2 --sweep polarization --values 0 0.5 1 --t2-us 12 --threads 3"},
      {"synthesize-odmr", "synthesize-odmr --b-mt 93", ""},
      {"simulate-t1-profile", "simulate-t1-profile --noise 0.05 --seed 9 --trace-at 3315.58 3565", ""},
  };
  std::vector<std::string> failures;
  std::size_t files = 0;
  for (const Command& cmd : commands) {
    for (const char* run : {"a", "b"}) {
      const std::string& args = (run[0] == 'b' && !cmd.args_b.empty()) ? cmd.args_b : cmd.args;
      const fs::path out = root / run / cmd.name;
      const std::string line = cli + " " + args + " --out-dir " + out.string() + " > /dev/null 2>&1";
      if (std::system(line.c_str()) != 0) failures.push_back(cmd.name + " exited non-zero");
    }
    const fs::path a = root / "a" / cmd.name;
    const fs::path b = root / "b" / cmd.name;
    if (!fs::exists(a) || !fs::exists(b)) continue;
    std::map<std::string, std::string> left;
    for (const auto& e : fs::directory_iterator(a)) left[e.path().filename().string()] = io::read_text_file(e.path());
    std::size_t right_count = 0;
    for (const auto& e : fs::directory_iterator(b)) {
      ++right_count;
      const auto it = left.find(e.path().filename().string());
      if (it == left.end() || it->second != io::read_text_file(e.path())) {
        failures.push_back(cmd.name + "/" + e.path().filename().string());
      }
    }
    if (right_count != left.size()) failures.push_back(cmd.name + " file sets differ");
    files += left.size();
  }
  fs::remove_all(root);
  std::string detail = fmt("%zu commands, %zu files compared", commands.size(), files);
  for (const auto& f : failures) detail += "; differs: " + f;
  return {failures.empty() && files > 0, detail};
#endif
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"dipolar constant", dipolar},
      {"relaxometry round trip", relaxometry_round_trip},
      {"T1 endpoints", t1_endpoints},
      {"density estimation", density},
      {"bath variance", variance},
      {"DEER behaviour", deer},
      {"mixing properties", mixing},
      {"linear regression", regression},
      {"CLI determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %zu %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
