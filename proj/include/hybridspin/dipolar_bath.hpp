#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "hybridspin/physical_constants.hpp"

namespace hybridspin {

struct Layer {
  double depth_nm = 0.0;     // vertical distance to the probe
  double density_nm2 = 0.0;  // areal spin density
};

/// Stack of 2D spin sheets. Depths are strictly increasing and positive,
/// densities non-negative.
class LayeredProfile {
 public:
  LayeredProfile() = default;
  explicit LayeredProfile(std::vector<Layer> layers);

  std::span<const Layer> layers() const { return layers_; }
  bool empty() const { return layers_.empty(); }
  double total_density() const;
  double max_depth() const;

  /// Same shape with unit total density. Throws ZeroShape on an all-zero profile.
  LayeredProfile normalized() const;
  LayeredProfile scaled(double factor) const;
  /// Every depth moved down by `offset_nm` (diamond surface to sheet offset).
  LayeredProfile shifted(double offset_nm) const;

 private:
  std::vector<Layer> layers_;
};

/// sqrt(mu0^2 hbar^2 gamma_e^2 / 12 pi) in mT nm^3.
double dipolar_constant();

/// Sum over layers of C^2 rho_i / d_i^4, in mT^2.
double brms_squared(const LayeredProfile& profile);

enum class EstimateSource { Forward, Inverse };

struct CouplingEstimate {
  double b_khz = 0.0;  // b / 2pi
  double b_sigma_khz = 0.0;
  double b_rms_mt = 0.0;
  EstimateSource source = EstimateSource::Forward;
};

CouplingEstimate coupling_from_profile(const LayeredProfile& profile,
                                       double gamma_e_mhz_per_mt = physical::kGammaEMhzPerMt);

struct DensityEstimate {
  double rho_total_nm2 = 0.0;
  double rho_sigma_nm2 = 0.0;
  double b_rms_mt = 0.0;
  double b_khz = 0.0;
};

/// Inverts coupling_from_profile for the total density of a unit-normalized
/// layer shape placed `nv_standoff_nm` below the probe. First-order error:
/// sigma_rho / rho = 2 sigma_b / b.
DensityEstimate estimate_density(double b_khz, double b_sigma_khz, const LayeredProfile& shape,
                                 double nv_standoff_nm);

/// Parses '#'-commented CSV rows `depth_nm,density_nm2`.
LayeredProfile load_depth_profile(std::string_view text);
LayeredProfile load_depth_profile_file(const std::filesystem::path& path);

}  // namespace hybridspin
