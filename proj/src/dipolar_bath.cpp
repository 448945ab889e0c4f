#include "hybridspin/dipolar_bath.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "hybridspin/error.hpp"

namespace hybridspin {

namespace {

constexpr double kUnitShapeTolerance = 1e-9;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_field(std::string_view token, std::size_t line_no, const char* what) {
  token = trim(token);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    throw Error(ErrorKind::ParseError,
                "line " + std::to_string(line_no) + ": invalid " + what + " '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

LayeredProfile::LayeredProfile(std::vector<Layer> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& layer = layers_[i];
    if (!(layer.depth_nm > 0.0) || !std::isfinite(layer.depth_nm)) {
      throw Error(ErrorKind::InvalidArgument, "layer depths must be positive and finite");
    }
    if (!(layer.density_nm2 >= 0.0) || !std::isfinite(layer.density_nm2)) {
      throw Error(ErrorKind::NegativeDensity, "layer densities must be non-negative");
    }
    if (i > 0 && !(layer.depth_nm > layers_[i - 1].depth_nm)) {
      throw Error(ErrorKind::NonMonotoneDepth, "layer depths must be strictly increasing");
    }
  }
}

double LayeredProfile::total_density() const {
  double total = 0.0;
  for (const Layer& layer : layers_) total += layer.density_nm2;
  return total;
}

double LayeredProfile::max_depth() const { return layers_.empty() ? 0.0 : layers_.back().depth_nm; }

LayeredProfile LayeredProfile::normalized() const {
  const double total = total_density();
  if (!(total > 0.0)) throw Error(ErrorKind::ZeroShape, "profile has zero total density");
  return scaled(1.0 / total);
}

LayeredProfile LayeredProfile::scaled(double factor) const {
  if (!(factor >= 0.0)) throw Error(ErrorKind::InvalidArgument, "density scale factor must be non-negative");
  std::vector<Layer> out = layers_;
  for (Layer& layer : out) layer.density_nm2 *= factor;
  return LayeredProfile(std::move(out));
}

LayeredProfile LayeredProfile::shifted(double offset_nm) const {
  std::vector<Layer> out = layers_;
  for (Layer& layer : out) layer.depth_nm += offset_nm;
  return LayeredProfile(std::move(out));
}

double dipolar_constant() {
  using namespace physical;
  // T m^3 -> mT nm^3
  constexpr double kToMtNm3 = 1e3 * 1e27;
  const double c_squared = kVacuumPermeability * kVacuumPermeability * kReducedPlanck * kReducedPlanck *
                           kElectronGyromagneticRatio * kElectronGyromagneticRatio / (12.0 * std::numbers::pi);
  return std::sqrt(c_squared) * kToMtNm3;
}

double brms_squared(const LayeredProfile& profile) {
  const double c = dipolar_constant();
  double sum = 0.0;
  for (const Layer& layer : profile.layers()) {
    const double d2 = layer.depth_nm * layer.depth_nm;
    sum += c * c * layer.density_nm2 / (d2 * d2);
  }
  return sum;
}

CouplingEstimate coupling_from_profile(const LayeredProfile& profile, double gamma_e_mhz_per_mt) {
  if (!(gamma_e_mhz_per_mt > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma_e must be positive");
  CouplingEstimate out;
  out.b_rms_mt = std::sqrt(brms_squared(profile));
  out.b_khz = gamma_e_mhz_per_mt * out.b_rms_mt * 1e3;
  out.source = EstimateSource::Forward;
  return out;
}

DensityEstimate estimate_density(double b_khz, double b_sigma_khz, const LayeredProfile& shape,
                                 double nv_standoff_nm) {
  if (!std::isfinite(b_khz) || !std::isfinite(b_sigma_khz) || !std::isfinite(nv_standoff_nm)) {
    throw Error(ErrorKind::NonFiniteInput, "density estimate inputs must be finite");
  }
  if (!(b_khz > 0.0)) throw Error(ErrorKind::InvalidArgument, "measured coupling must be positive");
  if (!(b_sigma_khz >= 0.0)) throw Error(ErrorKind::InvalidArgument, "coupling uncertainty must be non-negative");
  if (!(nv_standoff_nm > 0.0)) throw Error(ErrorKind::InvalidArgument, "NV standoff must be positive");
  if (shape.empty() || !(shape.total_density() > 0.0)) {
    throw Error(ErrorKind::ZeroShape, "layer shape has zero total density");
  }
  if (std::abs(shape.total_density() - 1.0) > kUnitShapeTolerance) {
    throw Error(ErrorKind::InvalidArgument, "layer shape must be normalized to unit total density");
  }

  const double per_unit_density = brms_squared(shape.shifted(nv_standoff_nm));
  if (!(per_unit_density > 0.0)) throw Error(ErrorKind::ZeroShape, "layer shape produces no field");

  DensityEstimate out;
  out.b_khz = b_khz;
  out.b_rms_mt = b_khz * 1e-3 / physical::kGammaEMhzPerMt;
  out.rho_total_nm2 = out.b_rms_mt * out.b_rms_mt / per_unit_density;
  out.rho_sigma_nm2 = out.rho_total_nm2 * 2.0 * b_sigma_khz / b_khz;
  return out;
}

LayeredProfile load_depth_profile(std::string_view text) {
  std::vector<Layer> layers;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    const std::string_view raw = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;

    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected 'depth_nm,density_nm2'");
    }
    const double depth = parse_field(line.substr(0, comma), line_no, "depth");
    const double density = parse_field(line.substr(comma + 1), line_no, "density");
    if (!(depth > 0.0)) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": depth must be positive");
    }
    if (density < 0.0) {
      throw Error(ErrorKind::NegativeDensity, "line " + std::to_string(line_no) + ": negative density");
    }
    if (!layers.empty() && !(depth > layers.back().depth_nm)) {
      throw Error(ErrorKind::NonMonotoneDepth,
                  "line " + std::to_string(line_no) + ": depths must be strictly increasing");
    }
    layers.push_back({depth, density});
  }
  if (layers.empty()) throw Error(ErrorKind::ParseError, "profile contains no data rows");
  return LayeredProfile(std::move(layers));
}

LayeredProfile load_depth_profile_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open profile '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_depth_profile(buffer.str());
}

}  // namespace hybridspin
