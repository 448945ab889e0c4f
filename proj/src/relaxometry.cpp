#include "hybridspin/relaxometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "hybridspin/error.hpp"

namespace hybridspin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRadPerMsPerMhz = kTwoPi * 1e3;  // 1 MHz -> rad/ms
constexpr double kRadPerMsPerKhz = kTwoPi;        // 1 kHz -> rad/ms
constexpr double kStrongDephasingRatio = 1e-2;
constexpr std::size_t kMinFitPoints = 5;
constexpr std::size_t kMaxIterations = 500;

using Vector4 = Eigen::Matrix<double, 4, 1>;
using Matrix4 = Eigen::Matrix<double, 4, 4>;

RelaxModel from_vector(const Vector4& p) { return {p[0], p[1], p[2], p[3]}; }

void check_points(std::span<const RelaxometryPoint> points) {
  for (const RelaxometryPoint& p : points) {
    if (!std::isfinite(p.f_plus_mhz) || !std::isfinite(p.rate_per_ms) ||
        (p.sigma_per_ms && !std::isfinite(*p.sigma_per_ms))) {
      throw Error(ErrorKind::NonFiniteInput, "relaxometry data contains non-finite values");
    }
    if (!(p.rate_per_ms > 0.0)) throw Error(ErrorKind::InvalidArgument, "relaxation rates must be positive");
    if (p.sigma_per_ms && !(*p.sigma_per_ms > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "rate uncertainties must be positive");
    }
  }
}

struct Residuals {
  Eigen::VectorXd r;
  Eigen::MatrixXd j;
  double chi2 = 0.0;
};

Residuals evaluate(std::span<const RelaxometryPoint> points, std::span<const double> weights, const Vector4& p,
                   bool with_jacobian) {
  const RelaxModel model = from_vector(p);
  const auto n = static_cast<Eigen::Index>(points.size());
  Residuals out{Eigen::VectorXd(n), Eigen::MatrixXd(with_jacobian ? n : 0, 4), 0.0};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pt = points[static_cast<std::size_t>(i)];
    const double w = weights[static_cast<std::size_t>(i)];
    out.r[i] = (pt.rate_per_ms - relaxation_rate(model, pt.f_plus_mhz)) * w;
    if (with_jacobian) {
      const RelaxParameters g = relaxation_rate_gradient(model, pt.f_plus_mhz);
      for (Eigen::Index k = 0; k < 4; ++k) out.j(i, k) = g[static_cast<std::size_t>(k)] * w;
    }
  }
  out.chi2 = out.r.squaredNorm();
  return out;
}

// Moore-Penrose inverse of a symmetric positive semi-definite matrix.
Matrix4 psd_pseudo_inverse(const Matrix4& m) {
  Eigen::SelfAdjointEigenSolver<Matrix4> solver(m);
  const Vector4 values = solver.eigenvalues();
  const double cutoff = 1e-12 * std::max(values.cwiseAbs().maxCoeff(), 0.0);
  Vector4 inv = Vector4::Zero();
  for (int k = 0; k < 4; ++k) {
    if (values[k] > cutoff && values[k] > 0.0) inv[k] = 1.0 / values[k];
  }
  return solver.eigenvectors() * inv.asDiagonal() * solver.eigenvectors().transpose();
}

}  // namespace

void RelaxModel::validate() const {
  if (!std::isfinite(b_khz) || !std::isfinite(gamma_mhz) || !std::isfinite(baseline_per_ms) ||
      !std::isfinite(f_center_mhz)) {
    throw Error(ErrorKind::NonFiniteInput, "relaxation model parameters must be finite");
  }
  if (!(b_khz >= 0.0)) throw Error(ErrorKind::InvalidArgument, "coupling b must be non-negative");
  if (!(gamma_mhz > 0.0)) throw Error(ErrorKind::InvalidArgument, "dephasing gamma must be positive");
  if (!(baseline_per_ms >= 0.0)) throw Error(ErrorKind::InvalidArgument, "baseline rate must be non-negative");
}

bool RelaxModel::strong_dephasing() const {
  return b_khz * kRadPerMsPerKhz / (gamma_mhz * kRadPerMsPerMhz) < kStrongDephasingRatio;
}

double detuning(double f_nv_mhz, double f_vb_mhz) { return kRadPerMsPerMhz * (f_nv_mhz - f_vb_mhz); }

double relaxation_rate(const RelaxModel& model, double f_plus_mhz) {
  const double delta = detuning(f_plus_mhz, model.f_center_mhz);
  const double b = model.b_khz * kRadPerMsPerKhz;
  const double gamma = model.gamma_mhz * kRadPerMsPerMhz;
  return model.baseline_per_ms + b * b * gamma / (delta * delta + gamma * gamma);
}

RelaxParameters relaxation_rate_gradient(const RelaxModel& model, double f_plus_mhz) {
  // In MHz/kHz units the Lorentzian term is K b^2 G / (x^2 + G^2), K = 2pi 1e-3.
  constexpr double k = kRadPerMsPerKhz * kRadPerMsPerKhz / kRadPerMsPerMhz;
  const double x = f_plus_mhz - model.f_center_mhz;
  const double g = model.gamma_mhz;
  const double b = model.b_khz;
  const double den = x * x + g * g;
  return {2.0 * k * b * g / den, k * b * b * (x * x - g * g) / (den * den), 1.0,
          2.0 * k * b * b * g * x / (den * den)};
}

std::vector<double> simulate_t1_trace(double t1_ms, std::span<const double> t_grid_ms) {
  if (!(t1_ms > 0.0)) throw Error(ErrorKind::InvalidArgument, "T1 must be positive");
  std::vector<double> out;
  out.reserve(t_grid_ms.size());
  for (double t : t_grid_ms) out.push_back(std::exp(-t / t1_ms));
  return out;
}

RelaxModel initial_guess(std::span<const RelaxometryPoint> points) {
  if (points.empty()) throw Error(ErrorKind::DegenerateData, "no relaxometry points");
  check_points(points);
  std::vector<RelaxometryPoint> sorted(points.begin(), points.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& l, const auto& r) { return l.f_plus_mhz < r.f_plus_mhz; });
  const auto peak_it = std::max_element(sorted.begin(), sorted.end(),
                                        [](const auto& l, const auto& r) { return l.rate_per_ms < r.rate_per_ms; });
  const double peak = peak_it->rate_per_ms;
  const double base = std::min_element(sorted.begin(), sorted.end(), [](const auto& l, const auto& r) {
                        return l.rate_per_ms < r.rate_per_ms;
                      })->rate_per_ms;
  const double span = sorted.back().f_plus_mhz - sorted.front().f_plus_mhz;

  RelaxModel guess;
  guess.f_center_mhz = peak_it->f_plus_mhz;
  guess.baseline_per_ms = base;
  if (!(peak > base)) {
    guess.b_khz = 0.0;
    guess.gamma_mhz = span > 0.0 ? span / 4.0 : 1.0;
    return guess;
  }

  const double half = base + 0.5 * (peak - base);
  const auto peak_index = static_cast<std::size_t>(peak_it - sorted.begin());
  std::optional<double> left;
  std::optional<double> right;
  for (std::size_t i = peak_index; i > 0; --i) {
    const auto& hi = sorted[i];
    const auto& lo = sorted[i - 1];
    if (lo.rate_per_ms <= half) {
      const double t = (hi.rate_per_ms - half) / (hi.rate_per_ms - lo.rate_per_ms);
      left = hi.f_plus_mhz - t * (hi.f_plus_mhz - lo.f_plus_mhz);
      break;
    }
  }
  for (std::size_t i = peak_index; i + 1 < sorted.size(); ++i) {
    const auto& hi = sorted[i];
    const auto& lo = sorted[i + 1];
    if (lo.rate_per_ms <= half) {
      const double t = (hi.rate_per_ms - half) / (hi.rate_per_ms - lo.rate_per_ms);
      right = hi.f_plus_mhz + t * (lo.f_plus_mhz - hi.f_plus_mhz);
      break;
    }
  }
  double hwhm = span > 0.0 ? span / 4.0 : 1.0;
  if (left && right) {
    hwhm = 0.5 * (*right - *left);
  } else if (left) {
    hwhm = guess.f_center_mhz - *left;
  } else if (right) {
    hwhm = *right - guess.f_center_mhz;
  }
  guess.gamma_mhz = std::max(hwhm, 1e-6);
  constexpr double k = kRadPerMsPerKhz * kRadPerMsPerKhz / kRadPerMsPerMhz;
  guess.b_khz = std::sqrt((peak - base) * guess.gamma_mhz / k);
  return guess;
}

RelaxFit fit_relaxometry(std::span<const RelaxometryPoint> points, const RelaxModel& init) {
  if (points.size() < kMinFitPoints) {
    throw Error(ErrorKind::DegenerateData, "at least 5 relaxometry points are required");
  }
  check_points(points);
  init.validate();
  const bool distinct = std::any_of(points.begin(), points.end(), [&](const RelaxometryPoint& p) {
    return p.f_plus_mhz != points.front().f_plus_mhz;
  });
  if (!distinct) throw Error(ErrorKind::DegenerateData, "all points share the same f_plus");

  const bool weighted =
      std::all_of(points.begin(), points.end(), [](const RelaxometryPoint& p) { return p.sigma_per_ms.has_value(); });
  std::vector<double> weights(points.size(), 1.0);
  if (weighted) {
    for (std::size_t i = 0; i < points.size(); ++i) weights[i] = 1.0 / *points[i].sigma_per_ms;
  }

  Vector4 p{init.b_khz, init.gamma_mhz, init.baseline_per_ms, init.f_center_mhz};
  Residuals current = evaluate(points, weights, p, true);
  double lambda = 1e-3;
  std::size_t iteration = 0;
  bool converged = false;

  for (; iteration < kMaxIterations; ++iteration) {
    const Matrix4 jtj = current.j.transpose() * current.j;
    const Vector4 jtr = current.j.transpose() * current.r;
    const double diag_floor = 1e-15 * std::max(jtj.diagonal().maxCoeff(), 1e-300);

    bool accepted = false;
    Vector4 step = Vector4::Zero();
    while (lambda < 1e20) {
      Matrix4 damped = jtj;
      for (int k = 0; k < 4; ++k) damped(k, k) += lambda * std::max(jtj(k, k), diag_floor);
      step = damped.ldlt().solve(jtr);
      const Vector4 trial = p + step;
      if (step.allFinite() && trial[1] > 0.0) {
        Residuals next = evaluate(points, weights, trial, true);
        if (std::isfinite(next.chi2) && next.chi2 <= current.chi2) {
          p = trial;
          current = std::move(next);
          lambda = std::max(lambda / 10.0, 1e-12);
          accepted = true;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // No downhill step at any damping: the current point is a minimum to
      // working precision.
      converged = true;
      break;
    }
    bool small_step = true;
    for (int k = 0; k < 4; ++k) {
      if (std::abs(step[k]) > 1e-13 * (std::abs(p[k]) + 1e-12)) small_step = false;
    }
    if (small_step || current.chi2 == 0.0) {
      converged = true;
      ++iteration;
      break;
    }
  }
  if (!converged) throw Error(ErrorKind::FitDiverged, "Levenberg-Marquardt did not converge");
  if (!p.allFinite()) throw Error(ErrorKind::FitDiverged, "fit produced non-finite parameters");

  RelaxFit fit;
  fit.weighted = weighted;
  fit.iterations = iteration;
  fit.chi2 = current.chi2;

  Matrix4 cov = psd_pseudo_inverse(current.j.transpose() * current.j);
  if (!weighted) {
    const auto dof = static_cast<double>(points.size()) - 4.0;
    cov *= current.chi2 / dof;
  }
  // The model depends on b^2 only; report |b| and flip its correlations.
  if (p[0] < 0.0) {
    p[0] = -p[0];
    cov.row(0) *= -1.0;
    cov.col(0) *= -1.0;
  }
  fit.model = from_vector(p);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) fit.covariance[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = cov(r, c);
  }
  fit.strong_dephasing = fit.model.strong_dephasing();
  return fit;
}

RelaxFit fit_relaxometry(std::span<const RelaxometryPoint> points) {
  if (points.size() < kMinFitPoints) {
    throw Error(ErrorKind::DegenerateData, "at least 5 relaxometry points are required");
  }
  return fit_relaxometry(points, initial_guess(points));
}

LinearFit linear_regression(std::span<const double> x, std::span<const double> y, std::span<const double> sigma) {
  if (x.size() != y.size() || (!sigma.empty() && sigma.size() != x.size())) {
    throw Error(ErrorKind::InvalidArgument, "x, y and sigma must have equal lengths");
  }
  if (x.size() < 2) throw Error(ErrorKind::DegenerateData, "at least two points are required");
  const std::size_t n = x.size();
  std::vector<double> w(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw Error(ErrorKind::NonFiniteInput, "non-finite regression data");
    if (!sigma.empty()) {
      if (!(sigma[i] > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigmas must be positive");
      w[i] = 1.0 / (sigma[i] * sigma[i]);
    }
  }
  double sw = 0.0;
  double swx = 0.0;
  double swy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
  }
  const double x_mean = swx / sw;
  const double y_mean = swy / sw;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - x_mean;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * (y[i] - y_mean);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::DegenerateData, "all x values are equal");

  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;
  double var_slope = 1.0 / sxx;
  double var_intercept = 1.0 / sw + x_mean * x_mean / sxx;
  if (sigma.empty()) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    const double s2 = n > 2 ? rss / static_cast<double>(n - 2) : 0.0;
    var_slope *= s2;
    var_intercept *= s2;
  }
  fit.slope_sigma = std::sqrt(var_slope);
  fit.intercept_sigma = std::sqrt(var_intercept);
  return fit;
}

}  // namespace hybridspin
