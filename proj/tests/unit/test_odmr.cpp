#include <doctest.h>

#include <cmath>
#include <vector>

#include "hybridspin/error.hpp"
#include "hybridspin/odmr.hpp"

using namespace hybridspin;

namespace {

SpinSpecies make(const char* name, double d_gs, double d_es, Vec3 axis) {
  SpinSpecies s;
  s.name = name;
  s.d_gs_mhz = d_gs;
  s.d_es_mhz = d_es;
  s.gamma_e_mhz_per_mt = 28.025;
  const double n = std::hypot(axis[0], axis[1], axis[2]);
  s.axis = {axis[0] / n, axis[1] / n, axis[2] / n};
  return s;
}

const SpinSpecies kNv = make("nv", 2870.0, 1420.0, {1.0, 1.0, 1.0});
const SpinSpecies kVb = make("vb", 3470.0, 2100.0, {0.0, 0.0, 1.0});

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
  return g;
}

}  // namespace

TEST_CASE("lorentzian has unit peak and the requested width") {
  CHECK(lorentzian(100.0, 100.0, 4.0) == 1.0);
  CHECK(lorentzian(102.0, 100.0, 4.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(lorentzian(98.0, 100.0, 4.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("single line spectrum") {
  const std::vector<OdmrLine> lines{{2870.0, 5.0, 0.2}};
  const std::vector<double> at{2870.0};
  CHECK(synthesize_spectrum(lines, at).signal[0] == doctest::Approx(0.8).epsilon(1e-15));
  const std::vector<double> far{2870.0 + 1000.0 * 5.0};
  CHECK(std::abs(synthesize_spectrum(lines, far).signal[0] - 1.0) < 1e-3);

  // Even about the center.
  std::vector<double> sym;
  for (int i = -200; i <= 200; ++i) sym.push_back(2870.0 + 0.25 * i);
  const auto s = synthesize_spectrum(lines, sym);
  for (std::size_t i = 0; i < sym.size(); ++i) {
    CHECK(std::abs(s.signal[i] - s.signal[sym.size() - 1 - i]) <= 1e-12);
    CHECK(s.signal[i] > 0.0);
    CHECK(s.signal[i] <= 1.0);
    CHECK(s.signal[i] >= 1.0 - 0.2);
  }
}

TEST_CASE("overlapping lines add pointwise") {
  const std::vector<OdmrLine> a{{2860.0, 8.0, 0.1}};
  const std::vector<OdmrLine> b{{2866.0, 6.0, 0.05}};
  const std::vector<OdmrLine> both{a[0], b[0]};
  const auto g = grid(2800.0, 2940.0, 281);
  const auto sa = synthesize_spectrum(a, g);
  const auto sb = synthesize_spectrum(b, g);
  const auto sab = synthesize_spectrum(both, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    // Direct summation of the two dips.
    const double expected = 1.0 - (1.0 - sa.signal[i]) - (1.0 - sb.signal[i]);
    CHECK(sab.signal[i] == doctest::Approx(expected).epsilon(1e-14));
    CHECK(sab.signal[i] >= 1.0 - 0.15);
  }
}

TEST_CASE("empty line list gives a flat spectrum") {
  const auto s = synthesize_spectrum(std::vector<OdmrLine>{}, grid(2000.0, 4000.0, 11));
  for (double x : s.signal) CHECK(x == 1.0);
}

TEST_CASE("spectrum input validation") {
  const std::vector<OdmrLine> bad_width{{2870.0, 0.0, 0.1}};
  CHECK_THROWS_AS(synthesize_spectrum(bad_width, grid(1, 2, 3)), Error);
  const std::vector<OdmrLine> bad_contrast{{2870.0, 1.0, 1.5}};
  CHECK_THROWS_AS(synthesize_spectrum(bad_contrast, grid(1, 2, 3)), Error);
  const std::vector<double> descending{3.0, 2.0};
  CHECK_THROWS_AS(synthesize_spectrum(std::vector<OdmrLine>{}, descending), Error);
}

TEST_CASE("axis-aligned fields keep the full contrast") {
  for (const SpinSpecies& s : {kNv, kVb}) {
    for (double b : {0.0, 5.0, 50.0, 93.0, 200.0}) {
      CHECK(contrast_factor(s, FieldConfig::along(s.axis, b), 0.3) == 0.3);
    }
  }
  CHECK_THROWS_AS(contrast_factor(kNv, FieldConfig::along(kNv.axis, 1.0), 0.0), Error);
  CHECK_THROWS_AS(contrast_factor(kNv, FieldConfig::along(kNv.axis, 1.0), 1.5), Error);
}

TEST_CASE("contrast falls as the field tilts away from the axis") {
  for (const SpinSpecies& s : {kNv, kVb}) {
    for (double b : {5.0, 15.0, 25.0}) {
      double previous = 1.0;
      for (double angle = 0.0; angle <= 90.0; angle += 1.0) {
        const double c = contrast_factor(s, FieldConfig::at_angle(s, b, angle), 1.0);
        CHECK(c <= previous + 1e-12);
        previous = c;
      }
    }
  }
}

TEST_CASE("field along the V_B- axis at 93 mT: NV loses far more contrast") {
  const FieldConfig field = FieldConfig::along(kVb.axis, 93.0);
  const double nv = contrast_factor(kNv, field, 1.0);
  const double vb = contrast_factor(kVb, field, 1.0);
  CHECK(vb == 1.0);
  CHECK(nv < 0.5);
  CHECK(vb > 0.5);
  // The same tilt applied to each species' own axis keeps the ordering.
  const double nv_tilt = contrast_factor(kNv, FieldConfig::at_angle(kNv, 93.0, 54.7), 1.0);
  const double vb_tilt = contrast_factor(kVb, FieldConfig::at_angle(kVb, 93.0, 54.7), 1.0);
  CHECK(nv_tilt < vb_tilt);
}

TEST_CASE("contrast model is swappable") {
  const ContrastModel half = [](const EigenDecomposition&, const EigenDecomposition&) { return 0.5; };
  CHECK(contrast_factor(kNv, FieldConfig::along(kNv.axis, 10.0), 0.2, half) == doctest::Approx(0.1));
}

TEST_CASE("species lines sit at the axial transition frequencies") {
  const auto lines = species_lines(kVb, FieldConfig::along(kVb.axis, 10.0), 0.05, 20.0);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0].center_mhz == doctest::Approx(3470.0 - 280.25));
  CHECK(lines[1].center_mhz == doctest::Approx(3470.0 + 280.25));
  CHECK(lines[0].contrast == 0.05);
}
