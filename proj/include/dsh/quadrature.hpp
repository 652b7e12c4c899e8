#pragma once
// 1D quadrature building blocks: Gauss-Legendre rules (Newton on the Legendre
// recurrence), interval mapping, and an adaptive bisection integrator used as
// an independent oracle in tests.

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace dsh {

struct Rule1D {
  std::vector<double> x;  // nodes
  std::vector<double> w;  // weights
};

// Nodes/weights on [-1,1]. Newton converges in < 10 iterations to ~1 ulp.
inline const Rule1D& gauss_legendre(int n) {
  if (n < 1 || n > 4096) throw std::invalid_argument("gauss_legendre: bad n");
  static std::map<int, Rule1D> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  return cache.emplace(n, std::move(r)).first->second;
}

// Rule mapped onto [lo,hi].
inline Rule1D gl_on(int n, double lo, double hi) {
  const Rule1D& base = gauss_legendre(n);
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  for (int i = 0; i < n; ++i) {
    r.x[i] = c + h * base.x[i];
    r.w[i] = h * base.w[i];
  }
  return r;
}

// Adaptive bisection with a 15-point Gauss panel; error estimated against the
// two-half refinement. Oracle-quality, not performance critical.
template <typename F>
auto adaptive_integrate(F&& f, double lo, double hi, double tol, int max_depth = 28)
    -> decltype(f(0.0)) {
  using R = decltype(f(0.0));
  auto panel = [&f](double a, double b) -> R {
    const Rule1D& g = gauss_legendre(15);
    R s{};
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < 15; ++i) s += h * g.w[i] * f(c + h * g.x[i]);
    return s;
  };
  std::function<R(double, double, R, double, int)> rec =
      [&](double a, double b, R whole, double t, int depth) -> R {
    const double m = 0.5 * (a + b);
    R left = panel(a, m), right = panel(m, b);
    if (std::abs(left + right - whole) < t || depth >= max_depth) return left + right;
    return rec(a, m, left, 0.5 * t, depth + 1) + rec(m, b, right, 0.5 * t, depth + 1);
  };
  return rec(lo, hi, panel(lo, hi), tol, 0);
}

}  // namespace dsh
