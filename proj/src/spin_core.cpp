#include "hybridspin/spin_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hybridspin/error.hpp"

namespace hybridspin {

namespace {

constexpr double kUnitTolerance = 1e-12;
constexpr double kHermitianTolerance = 1e-9;
constexpr double kLabelTieTolerance = 1e-6;

using CVec3 = std::array<Complex, 3>;

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

CVec3 cross(const CVec3& a, const CVec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm(const CVec3& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2])); }

CVec3 normalized(const CVec3& v) {
  const double n = norm(v);
  return {v[0] / n, v[1] / n, v[2] / n};
}

// <a|b>
Complex inner(const CVec3& a, const CVec3& b) {
  return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1] + std::conj(a[2]) * b[2];
}

CVec3 multiply(const Matrix3c& m, const CVec3& v) {
  CVec3 out{};
  for (std::size_t i = 0; i < 3; ++i) {
    out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
  }
  return out;
}

double max_abs_entry(const Matrix3c& m) {
  double s = 0.0;
  for (const auto& row : m) {
    for (const auto& x : row) s = std::max(s, std::abs(x));
  }
  return s;
}

// Real roots of the characteristic cubic of a traceless Hermitian matrix,
// scaled so that tr(c^2) = 6. Returned ascending.
std::array<double, 3> scaled_cubic_roots(const Matrix3c& c) {
  // det(c) is real for Hermitian c.
  const Complex det = c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1]) -
                      c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0]) +
                      c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0]);
  const double r = std::clamp(det.real() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  constexpr double third = 2.0 * std::numbers::pi / 3.0;
  std::array<double, 3> roots{2.0 * std::cos(phi), 2.0 * std::cos(phi + 2.0 * third),
                              2.0 * std::cos(phi + third)};
  std::sort(roots.begin(), roots.end());
  return roots;
}

// Kernel vector of (c - lambda I) for a non-degenerate lambda, taken from the
// best-conditioned cross product of two rows.
CVec3 isolated_eigenvector(const Matrix3c& c, double lambda) {
  std::array<CVec3, 3> rows{};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) rows[i][j] = c[i][j] - (i == j ? lambda : 0.0);
  }
  const std::array<CVec3, 3> candidates{cross(rows[0], rows[1]), cross(rows[0], rows[2]),
                                        cross(rows[1], rows[2])};
  std::size_t best = 0;
  for (std::size_t k = 1; k < 3; ++k) {
    if (norm(candidates[k]) > norm(candidates[best])) best = k;
  }
  return normalized(candidates[best]);
}

void fix_phase(CVec3& v) {
  std::size_t lead = 0;
  for (std::size_t k = 1; k < 3; ++k) {
    if (std::abs(v[k]) > std::abs(v[lead])) lead = k;
  }
  const Complex phase = std::conj(v[lead]) / std::abs(v[lead]);
  for (auto& x : v) x *= phase;
  v[lead] = std::abs(v[lead]);
}

}  // namespace

std::string_view to_string(Manifold manifold) noexcept {
  return manifold == Manifold::Ground ? "gs" : "es";
}

Manifold manifold_from_string(std::string_view name) {
  if (name == "gs" || name == "GS" || name == "ground") return Manifold::Ground;
  if (name == "es" || name == "ES" || name == "excited") return Manifold::Excited;
  throw Error(ErrorKind::InvalidArgument, "unknown manifold '" + std::string(name) + "'");
}

void SpinSpecies::validate() const {
  if (!(d_gs_mhz > 0.0) || !(d_es_mhz > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "species '" + name + "': zero-field splittings must be positive");
  }
  if (!(e_strain_mhz >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "species '" + name + "': strain E must be non-negative");
  }
  if (!(gamma_e_mhz_per_mt > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "species '" + name + "': gamma_e must be positive");
  }
  if (!(std::abs(norm(axis) - 1.0) <= kUnitTolerance)) {
    throw Error(ErrorKind::InvalidArgument, "species '" + name + "': axis must have unit length");
  }
}

void FieldConfig::validate() const {
  if (!(magnitude_mt >= 0.0)) throw Error(ErrorKind::InvalidArgument, "field magnitude must be non-negative");
  if (!(std::abs(norm(direction) - 1.0) <= kUnitTolerance)) {
    throw Error(ErrorKind::InvalidArgument, "field direction must have unit length");
  }
}

FieldConfig FieldConfig::along(const Vec3& direction, double magnitude_mt) {
  const double n = norm(direction);
  if (!(n > 0.0)) throw Error(ErrorKind::InvalidArgument, "field direction must be non-zero");
  FieldConfig field{magnitude_mt, {direction[0] / n, direction[1] / n, direction[2] / n}};
  field.validate();
  return field;
}

FieldConfig FieldConfig::at_angle(const SpinSpecies& species, double magnitude_mt, double angle_deg) {
  const SpeciesFrame frame = species_frame(species.axis);
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return along({c * frame.z[0] + s * frame.x[0], c * frame.z[1] + s * frame.x[1], c * frame.z[2] + s * frame.x[2]},
               magnitude_mt);
}

SpeciesFrame species_frame(const Vec3& axis) {
  const double n = norm(axis);
  const Vec3 z{axis[0] / n, axis[1] / n, axis[2] / n};
  // Reference: the lab basis vector least aligned with the axis.
  std::size_t k = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (std::abs(z[i]) < std::abs(z[k])) k = i;
  }
  Vec3 ref{0.0, 0.0, 0.0};
  ref[k] = 1.0;
  const double proj = dot(ref, z);
  Vec3 x{ref[0] - proj * z[0], ref[1] - proj * z[1], ref[2] - proj * z[2]};
  const double nx = norm(x);
  x = {x[0] / nx, x[1] / nx, x[2] / nx};
  return {x, cross(z, x), z};
}

Matrix3c EigenDecomposition::reconstruct() const {
  Matrix3c h{};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t l = 0; l < 3; ++l) {
        h[k][l] += energies[i] * amplitudes[i][k] * std::conj(amplitudes[i][l]);
      }
    }
  }
  return h;
}

Matrix3c build_hamiltonian(const SpinSpecies& species, const FieldConfig& field, Manifold manifold) {
  species.validate();
  field.validate();
  const SpeciesFrame frame = species_frame(species.axis);
  const double g = species.gamma_e_mhz_per_mt * field.magnitude_mt;
  const double bx = g * dot(field.direction, frame.x);
  const double by = g * dot(field.direction, frame.y);
  const double bz = g * dot(field.direction, frame.z);
  const double d = species.zero_field_splitting(manifold);
  const double e = species.e_strain_mhz;

  // <+1|S+|0> = <0|S+|-1> = sqrt(2), so the transverse Zeeman term couples
  // |0> to |+-1> with (Bx - iBy)/sqrt(2); E(Sx^2 - Sy^2) couples |-1>, |+1>.
  const Complex transverse = Complex(bx, -by) / std::numbers::sqrt2;
  Matrix3c h{};
  h[0][0] = 0.0;
  h[1][1] = d - bz;
  h[2][2] = d + bz;
  h[2][0] = transverse;
  h[0][2] = std::conj(transverse);
  h[0][1] = transverse;
  h[1][0] = std::conj(transverse);
  h[1][2] = e;
  h[2][1] = e;
  return h;
}

EigenDecomposition diagonalize(const Matrix3c& h, Manifold manifold) {
  for (const auto& row : h) {
    for (const auto& x : row) {
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
        throw Error(ErrorKind::NonFiniteInput, "matrix has non-finite entries");
      }
    }
  }
  const double scale = std::max(1.0, max_abs_entry(h));
  Matrix3c a{};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (std::abs(h[i][j] - std::conj(h[j][i])) > kHermitianTolerance * scale) {
        throw Error(ErrorKind::NotHermitian, "matrix deviates from Hermitian symmetry");
      }
      a[i][j] = 0.5 * (h[i][j] + std::conj(h[j][i]));
    }
  }

  EigenDecomposition out;
  out.manifold = manifold;

  const double shift = (a[0][0].real() + a[1][1].real() + a[2][2].real()) / 3.0;
  Matrix3c c = a;
  for (std::size_t i = 0; i < 3; ++i) c[i][i] -= shift;
  double frob = 0.0;
  for (const auto& row : c) {
    for (const auto& x : row) frob += std::norm(x);
  }
  const double p = std::sqrt(frob / 6.0);
  if (p == 0.0) {
    out.energies = {shift, shift, shift};
    for (std::size_t i = 0; i < 3; ++i) out.amplitudes[i][i] = 1.0;
    return out;
  }
  for (auto& row : c) {
    for (auto& x : row) x /= p;
  }
  const std::array<double, 3> roots = scaled_cubic_roots(c);

  // Deflate: the root farthest from its neighbour is well separated (the
  // scaled spectrum has unit spread), so its eigenvector is accurate. The
  // remaining pair is solved exactly on the orthogonal complement, which
  // stays stable however close the two roots are.
  const bool low_isolated = (roots[1] - roots[0]) > (roots[2] - roots[1]);
  const CVec3 v = isolated_eigenvector(c, low_isolated ? roots[0] : roots[2]);

  std::size_t k = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (std::abs(v[i]) < std::abs(v[k])) k = i;
  }
  CVec3 e_k{};
  e_k[k] = 1.0;
  const Complex overlap = inner(v, e_k);
  const CVec3 u1 = normalized({e_k[0] - overlap * v[0], e_k[1] - overlap * v[1], e_k[2] - overlap * v[2]});
  const CVec3 w = cross(v, u1);
  const CVec3 u2 = normalized({std::conj(w[0]), std::conj(w[1]), std::conj(w[2])});

  const double m11 = inner(u1, multiply(c, u1)).real();
  const double m22 = inner(u2, multiply(c, u2)).real();
  const Complex m12 = inner(u1, multiply(c, u2));
  Complex x_hi = 1.0;
  double y_hi = 0.0;
  Complex x_lo = 0.0;
  double y_lo = 1.0;
  if (std::abs(m12) > 0.0) {
    const double theta = 0.5 * std::atan2(2.0 * std::abs(m12), m11 - m22);
    const Complex phase = m12 / std::abs(m12);
    x_hi = std::cos(theta) * phase;
    y_hi = std::sin(theta);
    x_lo = -std::sin(theta) * phase;
    y_lo = std::cos(theta);
  }

  std::array<CVec3, 3> vectors{};
  vectors[0] = v;
  for (std::size_t i = 0; i < 3; ++i) {
    vectors[1][i] = x_hi * u1[i] + y_hi * u2[i];
    vectors[2][i] = x_lo * u1[i] + y_lo * u2[i];
  }

  std::array<std::pair<double, CVec3>, 3> states{};
  for (std::size_t i = 0; i < 3; ++i) {
    CVec3 vec = normalized(vectors[i]);
    fix_phase(vec);
    // Rayleigh quotient on the unscaled matrix.
    states[i] = {inner(vec, multiply(a, vec)).real(), vec};
  }
  std::sort(states.begin(), states.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  for (std::size_t i = 0; i < 3; ++i) {
    out.energies[i] = states[i].first;
    out.amplitudes[i] = states[i].second;
  }
  return out;
}

LevelOverlaps mixing_overlaps(const EigenDecomposition& decomposition) {
  LevelOverlaps out{};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 3; ++k) out[i][k] = std::norm(decomposition.amplitudes[i][k]);
  }
  return out;
}

LevelOverlaps mixing_overlaps(const SpinSpecies& species, const FieldConfig& field, Manifold manifold) {
  return mixing_overlaps(diagonalize(build_hamiltonian(species, field, manifold), manifold));
}

std::size_t zero_like_state(const EigenDecomposition& decomposition) {
  const LevelOverlaps overlaps = mixing_overlaps(decomposition);
  std::array<std::size_t, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](std::size_t l, std::size_t r) { return overlaps[l][0] > overlaps[r][0]; });
  if (overlaps[order[0]][0] - overlaps[order[1]][0] <= kLabelTieTolerance) {
    throw Error(ErrorKind::AmbiguousLabeling,
                "two eigenstates have equal |0> overlap; use raw energies near the anti-crossing");
  }
  return order[0];
}

TransitionFrequencies transition_frequencies(const EigenDecomposition& decomposition) {
  const std::size_t zero = zero_like_state(decomposition);
  const LevelOverlaps overlaps = mixing_overlaps(decomposition);
  std::array<std::size_t, 2> rest{};
  for (std::size_t i = 0, n = 0; i < 3; ++i) {
    if (i != zero) rest[n++] = i;
  }
  // rest is in ascending energy order, which also settles an exact tie in
  // |-1> weight (e.g. strain-split states at zero field).
  std::size_t minus = rest[0];
  std::size_t plus = rest[1];
  if (overlaps[rest[1]][1] > overlaps[rest[0]][1] + kUnitTolerance) std::swap(minus, plus);
  return {decomposition.energies[minus] - decomposition.energies[zero],
          decomposition.energies[plus] - decomposition.energies[zero]};
}

TransitionFrequencies transition_frequencies(const SpinSpecies& species, const FieldConfig& field,
                                             Manifold manifold) {
  return transition_frequencies(diagonalize(build_hamiltonian(species, field, manifold), manifold));
}

std::vector<MixingRow> mixing_scan(const SpinSpecies& species, double angle_deg,
                                   std::span<const double> b_grid_mt, Manifold manifold) {
  if (b_grid_mt.empty()) throw Error(ErrorKind::InvalidArgument, "field grid is empty");
  if (!std::is_sorted(b_grid_mt.begin(), b_grid_mt.end())) {
    throw Error(ErrorKind::InvalidArgument, "field grid must be ascending");
  }
  std::vector<MixingRow> rows;
  rows.reserve(b_grid_mt.size());
  for (double b : b_grid_mt) {
    rows.push_back({b, mixing_overlaps(species, FieldConfig::at_angle(species, b, angle_deg), manifold)});
  }
  return rows;
}

}  // namespace hybridspin
