#pragma once

#include <stdexcept>
#include <string>

#include "walklab/rng.hpp"

// Stable laws with characteristic function
//
//   G(w) = exp{ -c|w|^a (1 - i b sgn(w) tan(pi a / 2)) },  c > 0,
//
// restricted to the admissible parameter set
//
//   A = { a in (0,2)\{1}, |b| < 1 } u { a=1, b=0 } u { a=2, b=0 }.
//
// Densities and distribution functions come from numerical inversion of G;
// sampling uses the exact uniform-exponential transformation, so draws and
// quadrature are two independent routes to the same law.

namespace walklab::stable {

class quadrature_error : public std::runtime_error {
 public:
  explicit quadrature_error(const std::string& what)
      : std::runtime_error(what) {}
};

struct StableParams {
  double alpha = 2.0;
  double beta = 0.0;
  double c = 0.5;
};

// Validates membership in A and c > 0; throws std::invalid_argument with
// the violated rule otherwise.
StableParams make_stable_params(double alpha, double beta, double c);

struct DensityResult {
  double value = 0.0;
  double abs_error = 0.0;  // quadrature error estimate, target 1e-10
};

DensityResult density_checked(const StableParams& p, double x);

// Density by Fourier inversion; throws quadrature_error if the error
// estimate misses the 1e-10 absolute target.
double density(const StableParams& p, double x);

double density_at_zero(const StableParams& p);

// Distribution function by Gil-Pelaez inversion.
double cdf(const StableParams& p, double x);

// rho = P(Y > 0), evaluated as 1 - cdf(0). Exactly 0.5 when beta = 0.
double positivity_rho(const StableParams& p);

// One exact draw (Chambers-Mallows-Stuck transformation; Gaussian and
// Cauchy members use their direct transforms).
double sample_stable(const StableParams& p, rng::RandomStream& stream);

// Norming sequences for the supported exact-stable / tail-equivalent
// families: a_n = n^{1/alpha} and b_n = 1/(a_n n).
struct ScalingSequence {
  double inv_alpha = 0.5;

  double a(uint64_t n) const {
    return std::pow(static_cast<double>(n), inv_alpha);
  }
  double b(uint64_t n) const { return 1.0 / (a(n) * static_cast<double>(n)); }
};

inline ScalingSequence scaling_for(const StableParams& p) {
  return ScalingSequence{1.0 / p.alpha};
}

}  // namespace walklab::stable
