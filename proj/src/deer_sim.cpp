#include "hybridspin/deer_sim.hpp"

#include <algorithm>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <cmath>
#include <numbers>
#include <thread>

#include "hybridspin/error.hpp"
#include "hybridspin/physical_constants.hpp"
#include "hybridspin/random.hpp"

namespace hybridspin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kCutoffFactor = 20.0;
constexpr double kRingWidthNm = 10.0;
constexpr double kReferenceFloor = 1e-12;

constexpr std::uint64_t kBathStream = 0xBA7B;
constexpr std::uint64_t kStateStream = 0x57A7E5;

std::uint64_t spin_id(std::size_t layer, std::size_t ring, std::size_t index) {
  return (static_cast<std::uint64_t>(layer) << 48) | (static_cast<std::uint64_t>(ring) << 24) |
         static_cast<std::uint64_t>(index);
}

void check_same_grid(const DeerSignal& a, const DeerSignal& b) {
  if (a.tau_us != b.tau_us) throw Error(ErrorKind::GridMismatch, "signals are sampled on different tau grids");
}

// Precession of one Monte Carlo sample, kHz: sum over bath spins that the pi
// pulse flipped of s_j a_j. Unflipped spins are refocused by the NV echo.
double sample_frequency(std::span<const BathSpin> bath, double p_up, double eta, std::uint64_t key) {
  double omega = 0.0;
  for (const BathSpin& spin : bath) {
    if (rng::counter_uniform(key, 2 * spin.id + 1) >= eta) continue;
    const double s = rng::counter_uniform(key, 2 * spin.id) < p_up ? 1.0 : -1.0;
    omega += s * spin.coupling_khz;
  }
  return omega;
}

}  // namespace

void BathSpec::validate() const {
  if (!(std::abs(polarization) <= 1.0)) throw Error(ErrorKind::InvalidArgument, "polarization must lie in [-1, 1]");
  if (!(drive_efficiency >= 0.0 && drive_efficiency <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "drive efficiency must lie in [0, 1]");
  }
  if (!(nv_standoff_nm >= 0.0) || !std::isfinite(nv_standoff_nm)) {
    throw Error(ErrorKind::InvalidArgument, "NV standoff must be non-negative");
  }
  if (!(lateral_cutoff_nm >= minimum_cutoff_nm()) || !std::isfinite(lateral_cutoff_nm)) {
    throw Error(ErrorKind::InvalidArgument, "lateral cutoff must be at least 20x the deepest layer distance");
  }
}

double BathSpec::minimum_cutoff_nm() const { return kCutoffFactor * (profile.max_depth() + nv_standoff_nm); }

std::string_view to_string(Sequence sequence) noexcept { return sequence == Sequence::Deer ? "deer" : "hahn"; }

Sequence sequence_from_string(std::string_view name) {
  if (name == "deer" || name == "DEER") return Sequence::Deer;
  if (name == "hahn" || name == "HAHN") return Sequence::Hahn;
  throw Error(ErrorKind::InvalidArgument, "unknown sequence '" + std::string(name) + "'");
}

void DeerConfig::validate() const {
  if (!(t2_us > 0.0)) throw Error(ErrorKind::InvalidArgument, "T2 must be positive");
  if (!(stretch_n >= 1.0 && stretch_n <= 3.0)) throw Error(ErrorKind::InvalidArgument, "stretch exponent must lie in [1, 3]");
  if (n_samples < 1) throw Error(ErrorKind::InvalidArgument, "at least one Monte Carlo sample is required");
  if (tau_grid_us.empty()) throw Error(ErrorKind::InvalidArgument, "tau grid is empty");
  if (!std::is_sorted(tau_grid_us.begin(), tau_grid_us.end()) || tau_grid_us.front() < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "tau grid must be ascending and non-negative");
  }
}

double coupling_prefactor() {
  using namespace physical;
  constexpr double kMomentMatching = 4.0 / 3.0;
  // Hz m^3 -> kHz nm^3
  constexpr double kToKhzNm3 = 1e-3 * 1e27;
  return kMomentMatching * kVacuumPermeability * kElectronGyromagneticRatio * kElectronGyromagneticRatio *
         kReducedPlanck / (4.0 * std::numbers::pi) / kTwoPi * kToKhzNm3;
}

double secular_coupling(const Vec3& position_nm) {
  const double r2 = position_nm[0] * position_nm[0] + position_nm[1] * position_nm[1] + position_nm[2] * position_nm[2];
  const double r = std::sqrt(r2);
  const double cos2 = position_nm[2] * position_nm[2] / r2;
  return coupling_prefactor() * (1.0 - 3.0 * cos2) / (r2 * r);
}

std::vector<BathSpin> sample_bath(const BathSpec& spec, std::uint64_t seed) {
  spec.validate();
  const double cutoff = spec.lateral_cutoff_nm;
  const auto rings = static_cast<std::size_t>(std::ceil(cutoff / kRingWidthNm));
  std::vector<BathSpin> bath;

  const auto layers = spec.profile.layers();
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const Layer& layer = layers[li];
    if (layer.density_nm2 <= 0.0) continue;
    const double height = layer.depth_nm + spec.nv_standoff_nm;
    for (std::size_t ring = 0; ring < rings; ++ring) {
      const double r0 = kRingWidthNm * static_cast<double>(ring);
      const double r1 = r0 + kRingWidthNm;
      const double mean = layer.density_nm2 * std::numbers::pi * (r1 * r1 - r0 * r0);
      rng::Engine engine = rng::make_engine(rng::derive_seed(seed, kBathStream, spin_id(li, ring, 0)));
      boost::random::poisson_distribution<int, double> count_dist(mean);
      boost::random::uniform_real_distribution<double> unit(0.0, 1.0);
      const int count = count_dist(engine);
      for (int i = 0; i < count; ++i) {
        const double r = std::sqrt(r0 * r0 + unit(engine) * (r1 * r1 - r0 * r0));
        const double phi = kTwoPi * unit(engine);
        // Thinning the last ring keeps the count Poisson on the disk.
        if (r > cutoff) continue;
        BathSpin spin;
        spin.position_nm = {r * std::cos(phi), r * std::sin(phi), height};
        spin.coupling_khz = secular_coupling(spin.position_nm);
        spin.id = spin_id(li, ring, static_cast<std::size_t>(i));
        bath.push_back(spin);
      }
    }
  }
  return bath;
}

double hahn_envelope(double tau_us, double t2_us, double stretch_n) {
  return std::exp(-std::pow(2.0 * tau_us / t2_us, stretch_n));
}

DeerSignal deer_signal(const BathSpec& spec, const DeerConfig& config) {
  spec.validate();
  config.validate();
  const std::vector<BathSpin> bath = sample_bath(spec, config.seed);
  return deer_signal(bath, spec, config);
}

DeerSignal deer_signal(std::span<const BathSpin> bath, const BathSpec& spec, const DeerConfig& config) {
  spec.validate();
  config.validate();
  const double eta = config.sequence == Sequence::Hahn ? 0.0 : spec.drive_efficiency;
  const double p_up = 0.5 * (1.0 + spec.polarization);
  const std::size_t n = config.n_samples;

  // Each sample owns a derived key, so the partition over threads cannot
  // change any value; the reduction below runs in sample order.
  std::vector<double> omega(n, 0.0);
  if (eta > 0.0 && !bath.empty()) {
    const auto work = [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k) {
        omega[k] = sample_frequency(bath, p_up, eta, rng::derive_seed(config.seed, kStateStream, k));
      }
    };
    std::size_t threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
    threads = std::min(threads, n);
    if (threads <= 1) {
      work(0, n);
    } else {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (n + threads - 1) / threads;
      for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin < end) pool.emplace_back(work, begin, end);
      }
    }
  }

  DeerSignal out;
  out.tau_us = config.tau_grid_us;
  const std::size_t m = config.tau_grid_us.size();
  out.coherence.resize(m);
  out.quadrature.resize(m);
  out.std_error.resize(m);
  out.valid.assign(m, true);
  for (std::size_t i = 0; i < m; ++i) {
    const double tau = config.tau_grid_us[i];
    // Flipped spins contribute s_j a_j over both halves of the echo: phase
    // 2pi a_j s_j (2 tau), a_j in MHz for tau in us.
    const double two_tau = 2.0 * tau;
    double sum_c = 0.0;
    double sum_s = 0.0;
    double sum_c2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double phase = kTwoPi * omega[k] * 1e-3 * two_tau;
      const double c = std::cos(phase);
      sum_c += c;
      sum_s += std::sin(phase);
      sum_c2 += c * c;
    }
    const double mean_c = sum_c / static_cast<double>(n);
    double variance = 0.0;
    if (n > 1) variance = std::max(0.0, (sum_c2 - static_cast<double>(n) * mean_c * mean_c) / static_cast<double>(n - 1));
    const double envelope = hahn_envelope(tau, config.t2_us, config.stretch_n);
    out.coherence[i] = envelope * mean_c;
    out.quadrature[i] = envelope * sum_s / static_cast<double>(n);
    out.std_error[i] = envelope * std::sqrt(variance / static_cast<double>(n));
  }
  return out;
}

double deer_decay_rate(const DeerSignal& signal) {
  const double target = std::exp(-1.0);
  std::optional<std::size_t> previous;
  for (std::size_t i = 0; i < signal.tau_us.size(); ++i) {
    if (!signal.valid[i]) continue;
    const double c = signal.coherence[i];
    if (c <= target) {
      const double t1 = 2.0 * signal.tau_us[i];
      if (!previous) {
        if (t1 > 0.0) return 1.0 / t1;
        break;
      }
      const double t0 = 2.0 * signal.tau_us[*previous];
      const double c0 = signal.coherence[*previous];
      const double t = t0 + (c0 - target) / (c0 - c) * (t1 - t0);
      return 1.0 / t;
    }
    previous = i;
  }
  throw Error(ErrorKind::NoDecay, "coherence never reaches 1/e on the sampled grid");
}

DeerSignal subtract_reference(const DeerSignal& deer, const DeerSignal& hahn) {
  check_same_grid(deer, hahn);
  DeerSignal out;
  out.tau_us = deer.tau_us;
  const std::size_t m = deer.tau_us.size();
  out.coherence.resize(m);
  out.quadrature.resize(m);
  out.std_error.resize(m);
  out.valid.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double h = hahn.coherence[i];
    const double sh = hahn.std_error[i];
    const bool ok = deer.valid[i] && hahn.valid[i] && h > 10.0 * sh && h > kReferenceFloor;
    out.valid[i] = ok;
    if (!ok) {
      out.coherence[i] = std::numeric_limits<double>::quiet_NaN();
      out.quadrature[i] = std::numeric_limits<double>::quiet_NaN();
      out.std_error[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double d = deer.coherence[i];
    out.coherence[i] = d / h;
    out.quadrature[i] = deer.quadrature[i] / h;
    out.std_error[i] = std::hypot(deer.std_error[i] / h, d * sh / (h * h));
  }
  return out;
}

double oscillation_frequency(const DeerSignal& signal, double min_magnitude) {
  double sum_tp = 0.0;
  double sum_tt = 0.0;
  double previous_phase = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < signal.tau_us.size(); ++i) {
    if (!signal.valid[i]) break;
    const double magnitude = std::hypot(signal.coherence[i], signal.quadrature[i]);
    if (magnitude < min_magnitude || magnitude < 5.0 * signal.std_error[i]) break;
    double phase = std::atan2(signal.quadrature[i], signal.coherence[i]);
    // Unwrap against the previous point.
    while (phase - previous_phase > std::numbers::pi) phase -= kTwoPi;
    while (phase - previous_phase < -std::numbers::pi) phase += kTwoPi;
    previous_phase = phase;
    const double t = 2.0 * signal.tau_us[i];
    const double w = magnitude * magnitude;
    sum_tp += w * t * phase;
    sum_tt += w * t * t;
    ++used;
  }
  if (used < 2 || sum_tt == 0.0) return 0.0;
  return sum_tp / sum_tt / kTwoPi;
}

std::optional<double> first_zero_crossing(const DeerSignal& signal) {
  std::optional<std::size_t> previous;
  for (std::size_t i = 0; i < signal.tau_us.size(); ++i) {
    if (!signal.valid[i]) continue;
    if (previous) {
      const double c0 = signal.coherence[*previous];
      const double c1 = signal.coherence[i];
      if ((c0 > 0.0 && c1 <= 0.0) || (c0 < 0.0 && c1 >= 0.0)) {
        const double t0 = 2.0 * signal.tau_us[*previous];
        const double t1 = 2.0 * signal.tau_us[i];
        return t0 + c0 / (c0 - c1) * (t1 - t0);
      }
    }
    previous = i;
  }
  return std::nullopt;
}

std::optional<double> magnitude_decay_time(const DeerSignal& signal, double level) {
  for (std::size_t i = 0; i < signal.tau_us.size(); ++i) {
    if (!signal.valid[i]) continue;
    if (std::hypot(signal.coherence[i], signal.quadrature[i]) < level) return 2.0 * signal.tau_us[i];
  }
  return std::nullopt;
}

std::string_view to_string(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::Depth: return "depth";
    case SweepAxis::Polarization: return "polarization";
    case SweepAxis::T2: return "t2";
  }
  return "unknown";
}

SweepAxis sweep_axis_from_string(std::string_view name) {
  if (name == "depth") return SweepAxis::Depth;
  if (name == "polarization" || name == "p") return SweepAxis::Polarization;
  if (name == "t2") return SweepAxis::T2;
  throw Error(ErrorKind::InvalidArgument, "unknown sweep axis '" + std::string(name) + "'");
}

std::vector<SweepRow> sweep(SweepAxis axis, std::span<const double> values, const BathSpec& spec,
                            const DeerConfig& config) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "sweep needs at least one value");
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    BathSpec run_spec = spec;
    DeerConfig run_config = config;
    run_config.seed = config.seed ^ static_cast<std::uint64_t>(i);
    switch (axis) {
      case SweepAxis::Depth:
        run_spec.nv_standoff_nm = values[i];
        run_spec.lateral_cutoff_nm = std::max(spec.lateral_cutoff_nm, run_spec.minimum_cutoff_nm());
        break;
      case SweepAxis::Polarization:
        run_spec.polarization = values[i];
        break;
      case SweepAxis::T2:
        run_config.t2_us = values[i];
        break;
    }
    run_spec.validate();
    run_config.validate();

    // One bath geometry for the whole sweep (common random numbers); the run
    // seed only drives the spin-state draws.
    const std::vector<BathSpin> bath = sample_bath(run_spec, config.seed);
    SweepRow row;
    row.value = values[i];
    row.seed = run_config.seed;
    row.signal = deer_signal(bath, run_spec, run_config);
    DeerConfig reference_config = run_config;
    reference_config.sequence = Sequence::Hahn;
    row.reference = deer_signal(bath, run_spec, reference_config);
    try {
      row.signal_rate = deer_decay_rate(row.signal);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoDecay) throw;
    }
    try {
      row.bath_rate = deer_decay_rate(subtract_reference(row.signal, row.reference));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoDecay) throw;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace hybridspin
