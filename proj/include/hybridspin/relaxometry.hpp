#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace hybridspin {

/// Cross-relaxation law 1/T1 = baseline + b^2 Gamma / (Delta^2 + Gamma^2).
///
/// Couplings follow the b/2pi, Gamma/2pi convention: b in kHz, Gamma in MHz.
/// Both are converted to angular units (with Delta) before the quotient, so
/// the Lorentzian term comes out in ms^-1 alongside the baseline.
struct RelaxModel {
  double b_khz = 0.0;
  double gamma_mhz = 1.0;  // total dephasing, half width at half maximum
  double baseline_per_ms = 0.0;
  double f_center_mhz = 0.0;

  void validate() const;
  /// b << Gamma, the regime where the Lorentzian law holds (b/Gamma < 1e-2).
  bool strong_dephasing() const;
};

inline constexpr std::size_t kRelaxParameterCount = 4;
using RelaxParameters = std::array<double, kRelaxParameterCount>;  // b, gamma, baseline, f_center
using RelaxCovariance = std::array<RelaxParameters, kRelaxParameterCount>;

struct RelaxometryPoint {
  double f_plus_mhz = 0.0;
  double rate_per_ms = 0.0;
  std::optional<double> sigma_per_ms;
};

/// Angular detuning 2pi (f_nv - f_vb), in rad/ms for frequencies in MHz.
double detuning(double f_nv_mhz, double f_vb_mhz);

double relaxation_rate(const RelaxModel& model, double f_plus_mhz);

/// Partial derivatives of relaxation_rate with respect to (b, gamma, baseline, f_center).
RelaxParameters relaxation_rate_gradient(const RelaxModel& model, double f_plus_mhz);

/// exp(-t / t1) on the given grid (ms).
std::vector<double> simulate_t1_trace(double t1_ms, std::span<const double> t_grid_ms);

struct RelaxFit {
  RelaxModel model;
  RelaxCovariance covariance{};
  double chi2 = 0.0;
  std::size_t iterations = 0;
  bool weighted = false;
  bool strong_dephasing = true;
};

/// Data-driven starting point: f_center at the maximal rate, baseline at the
/// minimal rate, Gamma from the empirical half width, b from the peak height.
RelaxModel initial_guess(std::span<const RelaxometryPoint> points);

/// Levenberg-Marquardt fit of (b, gamma, baseline, f_center). Points are
/// weighted by 1/sigma^2 when every point carries a sigma; otherwise the fit
/// is unweighted and the covariance is scaled by the reduced chi2.
RelaxFit fit_relaxometry(std::span<const RelaxometryPoint> points, const RelaxModel& init);
RelaxFit fit_relaxometry(std::span<const RelaxometryPoint> points);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_sigma = 0.0;
  double intercept_sigma = 0.0;
};

/// Weighted least-squares line. Without sigmas the parameter errors are
/// scaled by the residual variance.
LinearFit linear_regression(std::span<const double> x, std::span<const double> y,
                            std::span<const double> sigma = {});

}  // namespace hybridspin
