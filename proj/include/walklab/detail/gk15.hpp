#pragma once

#include <cmath>

// Fixed 15-point Gauss-Kronrod rule (QUADPACK qk15 abscissae) with the
// embedded 7-point Gauss difference as error estimate. Callers are
// responsible for panel widths that keep the integrand resolved.

namespace walklab::detail {

constexpr double kGk15X[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
constexpr double kGk15W[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kG7W[4] = {0.129484966168870, 0.279705391489277,
                            0.381830050505119, 0.417959183673469};

template <class F>
void gk15(const F& f, double a, double b, double& value, double& err) {
  const double hl = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const double fc = f(mid);
  double resk = kGk15W[7] * fc;
  double resg = kG7W[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = hl * kGk15X[j];
    const double fsum = f(mid - dx) + f(mid + dx);
    resk += kGk15W[j] * fsum;
    if (j % 2 == 1) resg += kG7W[j / 2] * fsum;
  }
  value += resk * hl;
  err += std::fabs((resk - resg) * hl);
}

}  // namespace walklab::detail
