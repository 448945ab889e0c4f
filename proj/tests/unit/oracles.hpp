#pragma once

// Reference implementations used only by the tests. They are deliberately
// built on different algorithms from the library code.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <random>

#include "hybridspin/spin_core.hpp"

namespace oracle {

using hybridspin::Complex;
using hybridspin::Matrix3c;

inline Complex det3(const Matrix3c& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// Roots of det(lambda I - H) from the complex Cardano formula, each polished
/// by Newton steps on the cubic, sorted ascending.
inline std::array<double, 3> cardano_eigenvalues(const Matrix3c& h) {
  const double tr = (h[0][0] + h[1][1] + h[2][2]).real();
  const double minors = (h[0][0] * h[1][1] - h[0][1] * h[1][0] + h[0][0] * h[2][2] - h[0][2] * h[2][0] +
                         h[1][1] * h[2][2] - h[1][2] * h[2][1])
                            .real();
  const double det = det3(h).real();
  // lambda^3 + a lambda^2 + b lambda + c
  const double a = -tr;
  const double b = minors;
  const double c = -det;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const Complex disc = std::sqrt(Complex(q * q / 4.0 + p * p * p / 27.0, 0.0));
  Complex u = std::pow(Complex(-q / 2.0, 0.0) + disc, 1.0 / 3.0);
  if (std::abs(u) < 1e-300) u = std::pow(Complex(-q / 2.0, 0.0) - disc, 1.0 / 3.0);
  const Complex omega(-0.5, std::sqrt(3.0) / 2.0);
  std::array<double, 3> roots{};
  Complex uk = u;
  for (int k = 0; k < 3; ++k) {
    const Complex v = std::abs(uk) < 1e-300 ? Complex(0.0) : -p / (3.0 * uk);
    double x = (uk + v).real() - a / 3.0;
    for (int it = 0; it < 3; ++it) {
      const double f = ((x + a) * x + b) * x + c;
      const double df = (3.0 * x + 2.0 * a) * x + b;
      if (std::abs(df) < 1e-30) break;
      const double step = f / df;
      if (!std::isfinite(step)) break;
      x -= step;
    }
    roots[static_cast<std::size_t>(k)] = x;
    uk *= omega;
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// Eigenvector of a simple eigenvalue: the largest column of adj(H - lambda I),
/// normalized, with its largest-magnitude entry rotated real-positive.
inline std::array<Complex, 3> adjugate_eigenvector(const Matrix3c& h, double lambda) {
  Matrix3c m = h;
  for (int i = 0; i < 3; ++i) m[i][i] -= lambda;
  Matrix3c adj{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      // cofactor C_ji placed at (i, j)
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
      const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      adj[i][j] = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    }
  }
  int best = 0;
  double best_norm = -1.0;
  for (int j = 0; j < 3; ++j) {
    const double n = std::norm(adj[0][j]) + std::norm(adj[1][j]) + std::norm(adj[2][j]);
    if (n > best_norm) {
      best_norm = n;
      best = j;
    }
  }
  std::array<Complex, 3> v{adj[0][best], adj[1][best], adj[2][best]};
  const double n = std::sqrt(best_norm);
  std::size_t big = 0;
  for (std::size_t k = 1; k < 3; ++k) {
    if (std::abs(v[k]) > std::abs(v[big])) big = k;
  }
  const Complex phase = std::conj(v[big]) / std::abs(v[big]);
  for (auto& x : v) x = x * phase / n;
  return v;
}

/// Dominant eigenvalue of a positive definite Hermitian matrix by power
/// iteration with a Rayleigh quotient.
inline double power_iteration(const Matrix3c& a, int iterations = 20000) {
  std::array<Complex, 3> v{Complex(1.0, 0.3), Complex(0.7, -0.2), Complex(0.4, 0.9)};
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    std::array<Complex, 3> w{};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) w[i] += a[i][j] * v[j];
    }
    double n = 0.0;
    Complex rq = 0.0;
    for (int i = 0; i < 3; ++i) {
      n += std::norm(w[i]);
      rq += std::conj(v[i]) * w[i];
    }
    lambda = rq.real();
    n = std::sqrt(n);
    for (int i = 0; i < 3; ++i) v[i] = w[i] / n;
  }
  return lambda;
}

inline Matrix3c random_hermitian(std::mt19937_64& engine, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix3c h{};
  for (int i = 0; i < 3; ++i) {
    h[i][i] = u(engine);
    for (int j = i + 1; j < 3; ++j) {
      h[i][j] = Complex(u(engine), u(engine));
      h[j][i] = std::conj(h[i][j]);
    }
  }
  return h;
}

}  // namespace oracle
