#include "walklab/stable.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "walklab/detail/gk15.hpp"

namespace walklab::stable {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct PanelSum {
  double value = 0.0;
  double err = 0.0;
};

template <class F>
void gk15(const F& f, double a, double b, PanelSum& out) {
  detail::gk15(f, a, b, out.value, out.err);
}

// Integrate f over [a,b], split so that per piece the decay exponent
// c*dw^alpha moves by at most ~0.75 and the oscillation phase
// kappa*dw^alpha + |x|*dw by at most ~1.5; GK15 then resolves each piece
// to near machine precision.
template <class F>
void integrate_panel(const F& f, double a, double b, double abs_x,
                     double kappa, double c, double alpha, PanelSum& out) {
  const double dwa = std::fabs(std::pow(b, alpha) - std::pow(a, alpha));
  const double budget =
      c * dwa / 0.75 + (std::fabs(kappa) * dwa + abs_x * (b - a)) / 1.5;
  const int pieces = 1 + static_cast<int>(budget);
  const double step = (b - a) / pieces;
  for (int i = 0; i < pieces; ++i) {
    const double lo = a + i * step;
    const double hi = i + 1 == pieces ? b : lo + step;
    gk15(f, lo, hi, out);
  }
}

// Skewness enters the integrands only through kappa = c*beta*tan(pi*alpha/2).
double skew_kappa(const StableParams& p) {
  if (p.beta == 0.0) return 0.0;
  return p.c * p.beta * std::tan(kPi * p.alpha / 2.0);
}

// |int_W^inf e^{-c w^a} dw| = Gamma(1/a, c W^a) / (a c^{1/a}).
double modulus_tail_bound(const StableParams& p, double w) {
  const double s = p.c * std::pow(w, p.alpha);
  return boost::math::tgamma(1.0 / p.alpha, s) /
         (p.alpha * std::pow(p.c, 1.0 / p.alpha));
}

// Shared inversion driver. SmallW supplies the analytic value of
// int_0^lo f and a bound on its error, used to close the dyadic descent.
template <class F, class SmallW>
PanelSum inversion_integral(const StableParams& p, double x, const F& f,
                            const SmallW& small_w) {
  const double kappa = skew_kappa(p);
  const double ax = std::fabs(x);
  PanelSum out;

  double hi = 1.0;
  for (int k = 0; k < 90; ++k) {
    const double lo = hi / 2.0;
    integrate_panel(f, lo, hi, ax, kappa, p.c, p.alpha, out);
    const auto [head, head_err] = small_w(lo);
    if (head_err < 1e-14 || k == 89) {
      out.value += head;
      out.err += head_err;
      break;
    }
    hi = lo;
  }

  // [1, W): geometric panels (w^alpha has a branch point at 0, so panel
  // width must stay proportional to distance from it), additionally capped
  // so the decay exponent advances by at most ~4 per panel. Stops when the
  // modulus tail bound is negligible.
  double w = 1.0;
  for (int k = 0; k < 4000; ++k) {
    const double bound = modulus_tail_bound(p, w);
    if (bound < 1e-13 || k == 3999) {
      out.err += bound;
      break;
    }
    const double s_next = p.c * std::pow(w, p.alpha) + 4.0;
    const double w_next =
        std::min(2.0 * w, std::pow(s_next / p.c, 1.0 / p.alpha));
    integrate_panel(f, w, w_next, ax, kappa, p.c, p.alpha, out);
    w = w_next;
  }
  return out;
}

}  // namespace

StableParams make_stable_params(double alpha, double beta, double c) {
  if (!(std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(c)))
    throw std::invalid_argument("stable params must be finite");
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw std::invalid_argument("alpha must lie in (0,2]");
  if (alpha == 2.0 && beta != 0.0)
    throw std::invalid_argument("alpha=2 requires beta=0");
  if (alpha == 1.0 && beta != 0.0)
    throw std::invalid_argument("alpha=1 requires beta=0 (skewed Cauchy excluded)");
  if (std::fabs(beta) >= 1.0 && alpha != 2.0 && alpha != 1.0)
    throw std::invalid_argument("|beta| must be < 1");
  if (!(c > 0.0)) throw std::invalid_argument("scale c must be > 0");
  return StableParams{alpha, beta, c};
}

DensityResult density_checked(const StableParams& p, double x) {
  const double kappa = skew_kappa(p);
  const double c = p.c;
  const double alpha = p.alpha;
  auto f = [&](double w) {
    return std::exp(-c * std::pow(w, alpha)) *
           std::cos(kappa * std::pow(w, alpha) - x * w);
  };
  // Near 0 the integrand is 1 + O(w^alpha, (xw)^2), so int_0^lo f ~ lo.
  auto small_w = [&](double lo) {
    const double wa = std::pow(lo, alpha);
    const double theta = std::fabs(kappa) * wa + std::fabs(x) * lo;
    const double err = lo * (c * wa + 0.5 * theta * theta);
    return std::pair<double, double>(lo, err);
  };
  PanelSum s = inversion_integral(p, x, f, small_w);
  return DensityResult{s.value / kPi, s.err / kPi};
}

double density(const StableParams& p, double x) {
  DensityResult r = density_checked(p, x);
  if (!(r.abs_error < 1e-10) || !std::isfinite(r.value))
    throw quadrature_error("stable density quadrature did not reach 1e-10 at x=" +
                           std::to_string(x));
  return r.value;
}

double density_at_zero(const StableParams& p) { return density(p, 0.0); }

double cdf(const StableParams& p, double x) {
  const double kappa = skew_kappa(p);
  const double c = p.c;
  const double alpha = p.alpha;
  if (kappa == 0.0 && x == 0.0) return 0.5;
  auto f = [&](double w) {
    return std::exp(-c * std::pow(w, alpha)) *
           std::sin(kappa * std::pow(w, alpha) - x * w) / w;
  };
  // Near 0, f = kappa w^{alpha-1} - x + O(.); integrate the leading part
  // exactly and bound the remainder.
  auto small_w = [&](double lo) {
    const double wa = std::pow(lo, alpha);
    const double head = kappa * wa / alpha - x * lo;
    const double theta = std::fabs(kappa) * wa + std::fabs(x) * lo;
    const double lead = std::fabs(kappa) * wa / alpha + std::fabs(x) * lo;
    const double err = c * (std::fabs(kappa) * wa * wa / (2.0 * alpha) +
                            std::fabs(x) * wa * lo / (1.0 + alpha)) +
                       theta * theta / 6.0 * lead;
    return std::pair<double, double>(head, err);
  };
  PanelSum s = inversion_integral(p, x, f, small_w);
  if (!(s.err < 1e-9) || !std::isfinite(s.value))
    throw quadrature_error("stable cdf quadrature did not converge at x=" +
                           std::to_string(x));
  const double v = 0.5 - s.value / kPi;
  return std::min(1.0, std::max(0.0, v));
}

double positivity_rho(const StableParams& p) {
  const double rho = 1.0 - cdf(p, 0.0);
  if (!(rho > 0.0 && rho < 1.0))
    throw quadrature_error("positivity parameter left (0,1)");
  return rho;
}

double sample_stable(const StableParams& p, rng::RandomStream& stream) {
  if (p.alpha == 2.0) return std::sqrt(2.0 * p.c) * stream.normal();
  const double v = kPi * (stream.uniform() - 0.5);
  if (p.alpha == 1.0) return p.c * std::tan(v);

  const double w = stream.exponential();
  const double t = std::tan(kPi * p.alpha / 2.0);
  const double bshift = std::atan(p.beta * t) / p.alpha;
  const double scale =
      std::pow(1.0 + p.beta * p.beta * t * t, 0.5 / p.alpha);
  const double x = scale * std::sin(p.alpha * (v + bshift)) /
                   std::pow(std::cos(v), 1.0 / p.alpha) *
                   std::pow(std::cos(v - p.alpha * (v + bshift)) / w,
                            (1.0 - p.alpha) / p.alpha);
  return std::pow(p.c, 1.0 / p.alpha) * x;
}

}  // namespace walklab::stable
