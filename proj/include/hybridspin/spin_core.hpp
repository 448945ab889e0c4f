#pragma once

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

namespace hybridspin {

using Vec3 = std::array<double, 3>;
using Complex = std::complex<double>;
using Matrix3c = std::array<std::array<Complex, 3>, 3>;

enum class Manifold { Ground, Excited };

std::string_view to_string(Manifold manifold) noexcept;
Manifold manifold_from_string(std::string_view name);

/// Static parameters of one S=1 defect. Frequencies in MHz, gamma_e in MHz/mT.
struct SpinSpecies {
  std::string name;
  double d_gs_mhz = 0.0;
  double d_es_mhz = 0.0;
  double e_strain_mhz = 0.0;
  double gamma_e_mhz_per_mt = 0.0;
  Vec3 axis{0.0, 0.0, 1.0};

  /// Throws InvalidArgument when any invariant is violated.
  void validate() const;

  double zero_field_splitting(Manifold manifold) const {
    return manifold == Manifold::Ground ? d_gs_mhz : d_es_mhz;
  }
};

/// Lab-frame static field. The direction is a unit vector.
struct FieldConfig {
  double magnitude_mt = 0.0;
  Vec3 direction{0.0, 0.0, 1.0};

  void validate() const;

  static FieldConfig along(const Vec3& direction, double magnitude_mt);
  /// Field tilted by `angle_deg` from the species axis, inside the plane
  /// spanned by the axis and the species reference x direction.
  static FieldConfig at_angle(const SpinSpecies& species, double magnitude_mt, double angle_deg);
};

/// Orthonormal frame (x, y, z) with z along the species axis. The x
/// direction is a fixed function of the axis so results are reproducible.
struct SpeciesFrame {
  Vec3 x;
  Vec3 y;
  Vec3 z;
};
SpeciesFrame species_frame(const Vec3& axis);

/// Spectral decomposition of one 3x3 spin Hamiltonian.
///
/// Row i of `amplitudes` is eigenstate i written as (alpha, beta, gamma) over
/// the basis (|0>_z, |-1>_z, |+1>_z). Rows follow ascending energy and the
/// largest-magnitude amplitude of each row is real and positive.
struct EigenDecomposition {
  std::array<double, 3> energies{};
  Matrix3c amplitudes{};
  Manifold manifold = Manifold::Ground;

  Matrix3c reconstruct() const;
};

/// H = D Sz^2 + E (Sx^2 - Sy^2) + gamma_e B.S in the basis (|0>, |-1>, |+1>),
/// with the field expressed in the species frame. MHz.
Matrix3c build_hamiltonian(const SpinSpecies& species, const FieldConfig& field, Manifold manifold);

/// Closed-form Hermitian eigensolver. Throws NotHermitian when the input
/// deviates from Hermitian symmetry by more than 1e-9 (relative to its scale).
EigenDecomposition diagonalize(const Matrix3c& h, Manifold manifold = Manifold::Ground);

struct TransitionFrequencies {
  double f_minus_mhz = 0.0;
  double f_plus_mhz = 0.0;
};

/// Signed energy gaps from the |0>-like eigenstate to the |-1>-like and
/// |+1>-like eigenstates. f_minus turns negative past the level crossing of
/// an axial field, which keeps f_plus - f_minus = 2 gamma_e B exact.
TransitionFrequencies transition_frequencies(const SpinSpecies& species, const FieldConfig& field,
                                             Manifold manifold);
TransitionFrequencies transition_frequencies(const EigenDecomposition& decomposition);

/// (|alpha|^2, |beta|^2, |gamma|^2) of one eigenstate.
using Overlaps = std::array<double, 3>;
using LevelOverlaps = std::array<Overlaps, 3>;

LevelOverlaps mixing_overlaps(const EigenDecomposition& decomposition);
LevelOverlaps mixing_overlaps(const SpinSpecies& species, const FieldConfig& field, Manifold manifold);

struct MixingRow {
  double b_mt = 0.0;
  LevelOverlaps levels{};
};

std::vector<MixingRow> mixing_scan(const SpinSpecies& species, double angle_deg,
                                   std::span<const double> b_grid_mt, Manifold manifold);

/// Index of the eigenstate with the largest |0>_z weight. Throws
/// AmbiguousLabeling when two states tie within 1e-6.
std::size_t zero_like_state(const EigenDecomposition& decomposition);

}  // namespace hybridspin
