#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hybridspin/spin_core.hpp"

namespace hybridspin {

struct OdmrLine {
  double center_mhz = 0.0;
  double linewidth_fwhm_mhz = 1.0;
  double contrast = 0.0;

  void validate() const;
};

struct OdmrSpectrum {
  std::vector<double> frequency_mhz;
  std::vector<double> signal;  // normalized PL, baseline 1
};

/// Maps the ground- and excited-manifold decompositions at one field to a
/// multiplicative contrast retention in [0, 1].
using ContrastModel = std::function<double(const EigenDecomposition& gs, const EigenDecomposition& es)>;

/// Default model: product of the |0>_z weight of the |0>-like eigenstate in
/// each manifold. A heuristic; the retention is exactly 1 for an axial field.
double mixing_purity_product(const EigenDecomposition& gs, const EigenDecomposition& es);

double contrast_factor(const SpinSpecies& species, const FieldConfig& field, double base_contrast,
                       const ContrastModel& model = mixing_purity_product);

/// Unit-peak Lorentzian of the given full width at half maximum.
double lorentzian(double f_mhz, double center_mhz, double fwhm_mhz);

/// 1 - sum_i c_i L(f; center_i, fwhm_i). An empty line list gives a flat
/// spectrum of ones.
OdmrSpectrum synthesize_spectrum(std::span<const OdmrLine> lines, std::span<const double> grid_mhz);

/// Ground-state f- and f+ dips of one species with mixing-attenuated contrast.
std::vector<OdmrLine> species_lines(const SpinSpecies& species, const FieldConfig& field, double base_contrast,
                                    double linewidth_fwhm_mhz);

}  // namespace hybridspin
