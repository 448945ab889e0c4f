#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hybridspin/deer_sim.hpp"
#include "hybridspin/odmr.hpp"
#include "hybridspin/relaxometry.hpp"
#include "hybridspin/spin_core.hpp"

namespace hybridspin::io {

/// Decimal places of every CSV number. JSON numbers use the shortest
/// round-trip representation.
inline constexpr int kCsvPrecision = 10;

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string format_fixed(double value, int precision = kCsvPrecision);

/// {name, d_gs_mhz, d_es_mhz, e_strain_mhz, gamma_e_mhz_per_mt, axis: [x, y, z]}.
/// The axis is normalized on load. Throws ConfigError.
SpinSpecies species_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SpinSpecies& species);
SpinSpecies load_species_file(const std::filesystem::path& path);

/// CSV with header `f_plus_mhz,rate_per_ms[,sigma_per_ms]`; '#' comments and
/// blank lines are skipped. Throws ParseError.
std::vector<RelaxometryPoint> parse_relaxometry_csv(std::string_view text);
std::string relaxometry_csv(std::span<const RelaxometryPoint> points);

/// {b_khz, gamma_mhz, baseline_per_ms, f_center_mhz, covariance, chi2, ...}.
nlohmann::json to_json(const RelaxFit& fit);

std::string mixing_csv(std::span<const MixingRow> rows);
std::string spectrum_csv(const OdmrSpectrum& spectrum);
/// tau_us,coherence,stderr
std::string deer_csv(const DeerSignal& signal);

}  // namespace hybridspin::io
