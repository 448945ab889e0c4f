#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hybridspin/dipolar_bath.hpp"
#include "hybridspin/spin_core.hpp"

namespace hybridspin {

/// 2D spin bath seen by an NV at the origin whose axis is the sheet normal.
/// Layer depths are measured from the hBN surface; the NV sits a further
/// `nv_standoff_nm` below it.
struct BathSpec {
  LayeredProfile profile;
  double polarization = 0.0;      // p in [-1, 1]
  double drive_efficiency = 1.0;  // probability that the bath pi pulse flips a spin
  double lateral_cutoff_nm = 0.0;
  double nv_standoff_nm = 0.0;

  void validate() const;
  /// Smallest allowed cutoff: 20 times the deepest layer-to-NV distance.
  double minimum_cutoff_nm() const;
};

enum class Sequence { Deer, Hahn };

std::string_view to_string(Sequence sequence) noexcept;
Sequence sequence_from_string(std::string_view name);

struct DeerConfig {
  std::vector<double> tau_grid_us;  // half of the total free evolution 2 tau
  double t2_us = 1.0;
  double stretch_n = 1.0;
  std::size_t n_samples = 1000;
  std::uint64_t seed = 0;
  Sequence sequence = Sequence::Deer;
  std::size_t threads = 0;  // 0: hardware concurrency; never changes the result

  void validate() const;
};

struct BathSpin {
  Vec3 position_nm{};
  double coupling_khz = 0.0;
  std::uint64_t id = 0;  // stable identity, keys the per-sample state draws
};

/// Coherence versus tau. `quadrature` is the sine component of the same
/// ensemble average; its phase against `coherence` tracks the static field of
/// a polarized bath.
struct DeerSignal {
  std::vector<double> tau_us;
  std::vector<double> coherence;
  std::vector<double> quadrature;
  std::vector<double> std_error;
  std::vector<bool> valid;
};

/// Secular dipolar prefactor in kHz nm^3, including the moment-matching
/// factor 4/3 that makes the sheet-averaged second moment of the couplings
/// equal the layered B_rms^2 sum times gamma_e^2.
double coupling_prefactor();

/// Secular coupling (1 - 3 cos^2 theta) / r^3 of a bath spin at `position_nm`
/// relative to an NV at the origin with axis z. kHz.
double secular_coupling(const Vec3& position_nm);

/// Poisson bath on disks of radius lateral_cutoff. Each layer is generated in
/// fixed-width rings with their own derived seeds, so enlarging the cutoff
/// only appends outer spins.
std::vector<BathSpin> sample_bath(const BathSpec& spec, std::uint64_t seed);

/// exp(-(2 tau / t2)^n).
double hahn_envelope(double tau_us, double t2_us, double stretch_n);

/// Monte Carlo DEER or Hahn-echo signal for one bath realization drawn from
/// `spec` with the config seed.
DeerSignal deer_signal(const BathSpec& spec, const DeerConfig& config);
DeerSignal deer_signal(std::span<const BathSpin> bath, const BathSpec& spec, const DeerConfig& config);

/// 1 / (first 2 tau where the linearly interpolated coherence reaches 1/e),
/// in us^-1. Invalid points are skipped. Throws NoDecay.
double deer_decay_rate(const DeerSignal& signal);

/// Pointwise deer / hahn with error propagation. Points where the reference
/// is not above ten standard errors (or is numerically zero) become invalid.
DeerSignal subtract_reference(const DeerSignal& deer, const DeerSignal& hahn);

/// Rate of the ensemble phase atan2(quadrature, coherence) against 2 tau, in
/// MHz, from the leading run of points whose magnitude exceeds
/// `min_magnitude` and five standard errors. Zero when fewer than two points
/// qualify. Early on the phase grows as p sum_j a_j; once strongly coupled
/// spins wind past a quarter turn it stops tracking the mean field, hence the
/// fairly high default threshold.
double oscillation_frequency(const DeerSignal& signal, double min_magnitude = 0.5);

/// 2 tau of the first sign change of the coherence, linearly interpolated.
std::optional<double> first_zero_crossing(const DeerSignal& signal);

/// 2 tau at which the magnitude |coherence + i quadrature| first drops below `level`.
std::optional<double> magnitude_decay_time(const DeerSignal& signal, double level);

enum class SweepAxis { Depth, Polarization, T2 };

std::string_view to_string(SweepAxis axis) noexcept;
SweepAxis sweep_axis_from_string(std::string_view name);

struct SweepRow {
  double value = 0.0;
  std::uint64_t seed = 0;
  DeerSignal signal;     // the configured sequence
  DeerSignal reference;  // Hahn echo with identical settings
  std::optional<double> signal_rate;
  std::optional<double> bath_rate;  // from signal / reference
};

/// Runs over one axis. Every run places its bath with config.seed, so all rows
/// share one lateral geometry; run i draws spin states with seed
/// (config.seed XOR i). Depth values set the NV standoff; the cutoff grows to stay at or above
/// 20 times the deepest layer distance.
std::vector<SweepRow> sweep(SweepAxis axis, std::span<const double> values, const BathSpec& spec,
                            const DeerConfig& config);

}  // namespace hybridspin
