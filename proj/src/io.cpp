#include "hybridspin/io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hybridspin/error.hpp"

namespace hybridspin::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> to_double(std::string_view token) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

double require_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw Error(ErrorKind::ConfigError, std::string("species config: missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::InvalidArgument, "short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string format_fixed(double value, int precision) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::string s = fmt::format("{:.{}f}", value, precision);
  if (s.find_first_not_of("-0.") == std::string::npos) s = fmt::format("{:.{}f}", 0.0, precision);
  return s;
}

SpinSpecies species_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "species config must be a JSON object");
  SpinSpecies s;
  if (!j.contains("name") || !j.at("name").is_string()) {
    throw Error(ErrorKind::ConfigError, "species config: missing string field 'name'");
  }
  s.name = j.at("name").get<std::string>();
  s.d_gs_mhz = require_number(j, "d_gs_mhz");
  s.d_es_mhz = require_number(j, "d_es_mhz");
  s.e_strain_mhz = j.contains("e_strain_mhz") ? require_number(j, "e_strain_mhz") : 0.0;
  s.gamma_e_mhz_per_mt = require_number(j, "gamma_e_mhz_per_mt");
  if (!j.contains("axis") || !j.at("axis").is_array() || j.at("axis").size() != 3) {
    throw Error(ErrorKind::ConfigError, "species config: 'axis' must be a 3-element array");
  }
  Vec3 axis{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!j.at("axis")[i].is_number()) throw Error(ErrorKind::ConfigError, "species config: axis entries must be numbers");
    axis[i] = j.at("axis")[i].get<double>();
  }
  const double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  if (!(n > 0.0)) throw Error(ErrorKind::ConfigError, "species config: axis must be non-zero");
  s.axis = {axis[0] / n, axis[1] / n, axis[2] / n};
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
  return s;
}

nlohmann::json to_json(const SpinSpecies& species) {
  return {{"name", species.name},
          {"d_gs_mhz", species.d_gs_mhz},
          {"d_es_mhz", species.d_es_mhz},
          {"e_strain_mhz", species.e_strain_mhz},
          {"gamma_e_mhz_per_mt", species.gamma_e_mhz_per_mt},
          {"axis", {species.axis[0], species.axis[1], species.axis[2]}}};
}

SpinSpecies load_species_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error&) {
    throw Error(ErrorKind::ConfigError, "cannot open species config '" + path.string() + "'");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, "species config '" + path.string() + "': " + e.what());
  }
  return species_from_json(j);
}

std::vector<RelaxometryPoint> parse_relaxometry_csv(std::string_view text) {
  std::vector<RelaxometryPoint> points;
  std::size_t line_no = 0;
  bool header_seen = false;
  int f_col = 0;
  int rate_col = 1;
  int sigma_col = -1;
  std::size_t columns = 2;

  while (!text.empty()) {
    const auto eol = text.find('\n');
    const std::string_view line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    const auto fields = split_commas(line);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (!header_seen && points.empty() && !to_double(fields.front())) {
      header_seen = true;
      f_col = rate_col = sigma_col = -1;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "f_plus_mhz") f_col = static_cast<int>(i);
        else if (fields[i] == "rate_per_ms") rate_col = static_cast<int>(i);
        else if (fields[i] == "sigma_per_ms") sigma_col = static_cast<int>(i);
        else throw Error(ErrorKind::ParseError, where + "unknown column '" + std::string(fields[i]) + "'");
      }
      if (f_col < 0 || rate_col < 0) {
        throw Error(ErrorKind::ParseError, where + "header must name f_plus_mhz and rate_per_ms");
      }
      columns = fields.size();
      continue;
    }
    if (!header_seen && points.empty()) {
      columns = fields.size();
      if (columns == 3) sigma_col = 2;
      if (columns < 2 || columns > 3) throw Error(ErrorKind::ParseError, where + "expected 2 or 3 columns");
    }
    if (fields.size() != columns) {
      throw Error(ErrorKind::ParseError, where + "expected " + std::to_string(columns) + " columns");
    }
    std::array<double, 3> values{};
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto v = to_double(fields[i]);
      if (!v || !std::isfinite(*v)) {
        throw Error(ErrorKind::ParseError, where + "invalid number '" + std::string(fields[i]) + "'");
      }
      values[i] = *v;
    }
    RelaxometryPoint p;
    p.f_plus_mhz = values[static_cast<std::size_t>(f_col)];
    p.rate_per_ms = values[static_cast<std::size_t>(rate_col)];
    if (sigma_col >= 0) p.sigma_per_ms = values[static_cast<std::size_t>(sigma_col)];
    if (!(p.rate_per_ms > 0.0)) throw Error(ErrorKind::ParseError, where + "rate must be positive");
    if (p.sigma_per_ms && !(*p.sigma_per_ms > 0.0)) throw Error(ErrorKind::ParseError, where + "sigma must be positive");
    points.push_back(p);
  }
  if (points.empty()) throw Error(ErrorKind::ParseError, "relaxometry file contains no data rows");
  return points;
}

std::string relaxometry_csv(std::span<const RelaxometryPoint> points) {
  const bool with_sigma =
      !points.empty() && std::all_of(points.begin(), points.end(), [](const auto& p) { return p.sigma_per_ms.has_value(); });
  std::string out = with_sigma ? "f_plus_mhz,rate_per_ms,sigma_per_ms\n" : "f_plus_mhz,rate_per_ms\n";
  for (const RelaxometryPoint& p : points) {
    out += format_fixed(p.f_plus_mhz) + "," + format_fixed(p.rate_per_ms);
    if (with_sigma) out += "," + format_fixed(*p.sigma_per_ms);
    out += "\n";
  }
  return out;
}

nlohmann::json to_json(const RelaxFit& fit) {
  nlohmann::json cov = nlohmann::json::array();
  for (const auto& row : fit.covariance) cov.push_back({row[0], row[1], row[2], row[3]});
  return {{"b_khz", fit.model.b_khz},
          {"gamma_mhz", fit.model.gamma_mhz},
          {"baseline_per_ms", fit.model.baseline_per_ms},
          {"f_center_mhz", fit.model.f_center_mhz},
          {"covariance", cov},
          {"chi2", fit.chi2},
          {"iterations", fit.iterations},
          {"weighted", fit.weighted},
          {"strong_dephasing", fit.strong_dephasing}};
}

std::string mixing_csv(std::span<const MixingRow> rows) {
  std::string out = "B_mt";
  for (int level = 0; level < 3; ++level) {
    for (int comp = 0; comp < 3; ++comp) out += fmt::format(",level{}_a{}", level, comp);
  }
  out += "\n";
  for (const MixingRow& row : rows) {
    out += format_fixed(row.b_mt);
    for (const Overlaps& level : row.levels) {
      for (double x : level) out += "," + format_fixed(x);
    }
    out += "\n";
  }
  return out;
}

std::string spectrum_csv(const OdmrSpectrum& spectrum) {
  std::string out = "frequency_mhz,signal\n";
  for (std::size_t i = 0; i < spectrum.frequency_mhz.size(); ++i) {
    out += format_fixed(spectrum.frequency_mhz[i]) + "," + format_fixed(spectrum.signal[i]) + "\n";
  }
  return out;
}

std::string deer_csv(const DeerSignal& signal) {
  std::string out = "tau_us,coherence,stderr\n";
  for (std::size_t i = 0; i < signal.tau_us.size(); ++i) {
    out += format_fixed(signal.tau_us[i]) + "," + format_fixed(signal.coherence[i]) + "," +
           format_fixed(signal.std_error[i]) + "\n";
  }
  return out;
}

}  // namespace hybridspin::io
