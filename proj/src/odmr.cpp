#include "hybridspin/odmr.hpp"

#include <algorithm>
#include <cmath>

#include "hybridspin/error.hpp"

namespace hybridspin {

void OdmrLine::validate() const {
  if (!(linewidth_fwhm_mhz > 0.0)) throw Error(ErrorKind::InvalidArgument, "ODMR linewidth must be positive");
  if (!(contrast >= 0.0 && contrast <= 1.0)) throw Error(ErrorKind::InvalidArgument, "ODMR contrast must lie in [0, 1]");
  if (!std::isfinite(center_mhz)) throw Error(ErrorKind::NonFiniteInput, "ODMR line center must be finite");
}

double mixing_purity_product(const EigenDecomposition& gs, const EigenDecomposition& es) {
  const double p_gs = std::norm(gs.amplitudes[zero_like_state(gs)][0]);
  const double p_es = std::norm(es.amplitudes[zero_like_state(es)][0]);
  return p_gs * p_es;
}

double contrast_factor(const SpinSpecies& species, const FieldConfig& field, double base_contrast,
                       const ContrastModel& model) {
  if (!(base_contrast > 0.0 && base_contrast <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "base contrast must lie in (0, 1]");
  }
  const EigenDecomposition gs = diagonalize(build_hamiltonian(species, field, Manifold::Ground), Manifold::Ground);
  const EigenDecomposition es = diagonalize(build_hamiltonian(species, field, Manifold::Excited), Manifold::Excited);
  return base_contrast * std::clamp(model(gs, es), 0.0, 1.0);
}

double lorentzian(double f_mhz, double center_mhz, double fwhm_mhz) {
  const double half = 0.5 * fwhm_mhz;
  const double x = f_mhz - center_mhz;
  return half * half / (x * x + half * half);
}

OdmrSpectrum synthesize_spectrum(std::span<const OdmrLine> lines, std::span<const double> grid_mhz) {
  if (!std::is_sorted(grid_mhz.begin(), grid_mhz.end())) {
    throw Error(ErrorKind::InvalidArgument, "frequency grid must be ascending");
  }
  for (const OdmrLine& line : lines) line.validate();

  OdmrSpectrum out;
  out.frequency_mhz.assign(grid_mhz.begin(), grid_mhz.end());
  out.signal.reserve(grid_mhz.size());
  for (double f : grid_mhz) {
    double dip = 0.0;
    for (const OdmrLine& line : lines) dip += line.contrast * lorentzian(f, line.center_mhz, line.linewidth_fwhm_mhz);
    out.signal.push_back(1.0 - dip);
  }
  return out;
}

std::vector<OdmrLine> species_lines(const SpinSpecies& species, const FieldConfig& field, double base_contrast,
                                    double linewidth_fwhm_mhz) {
  const TransitionFrequencies f = transition_frequencies(species, field, Manifold::Ground);
  const double contrast = contrast_factor(species, field, base_contrast);
  std::vector<OdmrLine> lines{{std::abs(f.f_minus_mhz), linewidth_fwhm_mhz, contrast},
                              {std::abs(f.f_plus_mhz), linewidth_fwhm_mhz, contrast}};
  for (const OdmrLine& line : lines) line.validate();
  return lines;
}

}  // namespace hybridspin
