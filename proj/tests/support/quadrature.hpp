// Gauss-Legendre quadrature with runtime node computation (Newton iteration
// on the Legendre recurrence); used as an independent oracle for weighted
// segment integrals.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace testsupport {

struct GaussLegendre {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Standard Newton construction: P_n via the three-term recurrence, initial
// guesses cos(pi (i - 1/4) / (n + 1/2)); converges to machine precision.
inline GaussLegendre gauss_legendre(int n) {
  GaussLegendre q;
  q.nodes.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    q.nodes[static_cast<std::size_t>(i)] = x;
    q.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

// Integral of f over [a, b] with an n-point rule.
inline double integrate(const std::function<double(double)>& f, double a, double b, int n = 48) {
  const GaussLegendre q = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    acc += q.weights[i] * f(mid + half * q.nodes[i]);
  }
  return acc * half;
}

}  // namespace testsupport
