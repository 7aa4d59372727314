#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

// Test-only oracles, independent of the library's numeric paths: adaptive
// Simpson quadrature, exact combinatorics, closed-form Gaussian moments,
// and simple regression/KS statistics.

namespace oracles {

inline double simpson(const std::function<double(double)>& f, double a,
                      double b, double fa, double fm, double fb) {
  const double m = 0.5 * (a + b);
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  (void)m;
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fm,
                                   double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

// Independent adaptive quadrature (used as the oracle against the
// library's own integration paths).
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-10) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

// P(L_n >= 0) for continuous symmetric i.i.d. increments: C(2n,n) 4^{-n}.
inline double sparre_andersen(uint64_t n) {
  double log_p = 0.0;
  for (uint64_t k = 1; k <= n; ++k)
    log_p += std::log((2.0 * k - 1.0) / (2.0 * k));
  return std::exp(log_p);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// E[e^{theta X}; X <= m] for X ~ N(0, sigma^2).
inline double gaussian_exp_restricted(double theta, double sigma, double m) {
  return std::exp(0.5 * theta * theta * sigma * sigma) *
         normal_cdf((m - theta * sigma * sigma) / sigma);
}

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

inline Line ols(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double d = n * sxx - sx * sx;
  return Line{(n * sxy - sx * sy) / d, (sy - (n * sxy - sx * sy) / d * sx) / n};
}

}  // namespace oracles
