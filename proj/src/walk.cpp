#include "walklab/walk.hpp"

#include <cmath>

namespace walklab::walk {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Simpson integral of x * g(x) over [-A, A] on a fixed grid; only feeds the
// bump tilt, so a few digits are enough.
double inner_first_moment(const stable::StableParams& p, double A) {
  const int n = 2000;  // even
  const double h = 2.0 * A / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = -A + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * x * stable::density(p, x);
  }
  return acc * h / 3.0;
}

}  // namespace

IncrementModel IncrementModel::gaussian(double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("gaussian: sigma2 must be > 0");
  IncrementModel m;
  m.family_ = Family::gaussian;
  m.sigma_ = std::sqrt(sigma2);
  m.attraction_ = stable::make_stable_params(2.0, 0.0, sigma2 / 2.0);
  m.g0_ = stable::density_at_zero(m.attraction_);
  m.rho_ = stable::positivity_rho(m.attraction_);
  m.name_ = "gaussian(sigma2=" + std::to_string(sigma2) + ")";
  return m;
}

IncrementModel IncrementModel::exact_stable(stable::StableParams p) {
  IncrementModel m;
  m.family_ = Family::exact_stable;
  m.attraction_ = p;
  m.g0_ = stable::density_at_zero(p);
  m.rho_ = stable::positivity_rho(p);
  m.name_ = "exact_stable(alpha=" + std::to_string(p.alpha) +
            ",beta=" + std::to_string(p.beta) + ",c=" + std::to_string(p.c) + ")";
  return m;
}

IncrementModel IncrementModel::tail_equivalent(stable::StableParams p,
                                               double crossover) {
  if (!(crossover > 0.0))
    throw std::invalid_argument("tail_equivalent: crossover must be > 0");
  IncrementModel m;
  m.family_ = Family::tail_equivalent;
  m.attraction_ = p;
  m.crossover_ = crossover;
  m.bump_mass_ = stable::cdf(p, crossover) - stable::cdf(p, -crossover);
  if (!(m.bump_mass_ > 0.1 && m.bump_mass_ < 1.0))
    throw std::invalid_argument("tail_equivalent: crossover leaves degenerate bump mass");
  if (p.alpha > 1.0) {
    // Tilt the bump so the overall mean is 0, the centering the attraction
    // data assumes. For alpha <= 1 no centering applies.
    const double mu_in = inner_first_moment(p, crossover);
    m.bump_tilt_ = kPi * mu_in / (m.bump_mass_ * crossover);
    if (std::fabs(m.bump_tilt_) > 1.0)
      throw std::invalid_argument("tail_equivalent: crossover too small to center the bump");
  }
  m.g0_ = stable::density_at_zero(p);
  m.rho_ = stable::positivity_rho(p);
  m.name_ = "tail_equivalent(alpha=" + std::to_string(p.alpha) +
            ",beta=" + std::to_string(p.beta) + ",c=" + std::to_string(p.c) +
            ",crossover=" + std::to_string(crossover) + ")";
  return m;
}

IncrementModel IncrementModel::logistic_logit() {
  IncrementModel m;
  m.family_ = Family::logistic_logit;
  m.attraction_ = stable::make_stable_params(2.0, 0.0, kPi * kPi / 6.0);
  m.g0_ = stable::density_at_zero(m.attraction_);
  m.rho_ = stable::positivity_rho(m.attraction_);
  m.name_ = "logistic_logit";
  return m;
}

double IncrementModel::sample(rng::RandomStream& stream) const {
  switch (family_) {
    case Family::gaussian:
      return sigma_ * stream.normal();
    case Family::exact_stable:
      return stable::sample_stable(attraction_, stream);
    case Family::logistic_logit: {
      const double u = stream.uniform();
      return std::log(u / (1.0 - u));
    }
    case Family::tail_equivalent: {
      if (stream.uniform() < bump_mass_) {
        // Bump draw: rejection under the flat envelope of 1 + t*sin.
        const double env = 1.0 + std::fabs(bump_tilt_);
        for (;;) {
          const double x = crossover_ * (2.0 * stream.uniform() - 1.0);
          const double u = stream.uniform();
          if (u * env <= 1.0 + bump_tilt_ * std::sin(kPi * x / crossover_))
            return x;
        }
      }
      // Tail draw: exact stable conditioned on |Y| > crossover.
      for (;;) {
        const double y = stable::sample_stable(attraction_, stream);
        if (std::fabs(y) > crossover_) return y;
      }
    }
  }
  throw std::logic_error("unreachable");
}

double IncrementModel::density(double x) const {
  switch (family_) {
    case Family::gaussian: {
      const double z = x / sigma_;
      return std::exp(-0.5 * z * z) / (sigma_ * std::sqrt(2.0 * kPi));
    }
    case Family::exact_stable:
      return stable::density(attraction_, x);
    case Family::logistic_logit: {
      const double e = std::exp(-std::fabs(x));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case Family::tail_equivalent: {
      if (std::fabs(x) > crossover_) return stable::density(attraction_, x);
      return bump_mass_ / (2.0 * crossover_) *
             (1.0 + bump_tilt_ * std::sin(kPi * x / crossover_));
    }
  }
  throw std::logic_error("unreachable");
}

double IncrementModel::tail_prob_abs(double t) const {
  if (family_ == Family::gaussian) {
    return std::erfc(t / (sigma_ * std::sqrt(2.0)));
  }
  if (family_ == Family::tail_equivalent && t < crossover_)
    throw std::invalid_argument("tail_prob_abs: t below crossover");
  return 1.0 - stable::cdf(attraction_, t) + stable::cdf(attraction_, -t);
}

PathSummary generate_path(const IncrementModel& model, uint64_t n,
                          double start_x, rng::RandomStream& stream,
                          bool keep_partial_sums) {
  if (n == 0) throw std::invalid_argument("generate_path: n must be >= 1");
  PathTracker t(start_x);
  PathSummary out;
  out.n = n;
  out.start = start_x;
  if (keep_partial_sums) out.partial_sums.reserve(n);
  for (uint64_t k = 0; k < n; ++k) {
    t.step(model.sample(stream));
    if (keep_partial_sums) out.partial_sums.push_back(t.sum());
  }
  out.s_n = t.sum();
  out.min_s = t.min();
  out.max_s = t.max();
  if (start_x == 0.0) {
    out.tau_valid_ = true;
    out.tau_ = t.tau();
    out.s_tau_ = t.s_tau();
  }
  return out;
}

PathSummary summarize_increments(std::span<const double> increments,
                                 double start_x, bool keep_partial_sums) {
  if (increments.empty())
    throw std::invalid_argument("summarize_increments: empty sequence");
  PathTracker t(start_x);
  PathSummary out;
  out.n = increments.size();
  out.start = start_x;
  if (keep_partial_sums) out.partial_sums.reserve(increments.size());
  for (double x : increments) {
    t.step(x);
    if (keep_partial_sums) out.partial_sums.push_back(t.sum());
  }
  out.s_n = t.sum();
  out.min_s = t.min();
  out.max_s = t.max();
  if (start_x == 0.0) {
    out.tau_valid_ = true;
    out.tau_ = t.tau();
    out.s_tau_ = t.s_tau();
  }
  return out;
}

std::vector<double> reverse_path(std::span<const double> increments) {
  if (increments.empty())
    throw std::invalid_argument("reverse_path: empty sequence");
  return std::vector<double>(increments.rbegin(), increments.rend());
}

}  // namespace walklab::walk
