#include "walklab/bpre.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace walklab::bpre {

namespace {

// Absorb at the cap once a draw could leave it; Poisson mass below
// cap - 10 sqrt(cap) is astronomically small at such means.
uint64_t capped_poisson(double lambda, rng::RandomStream& stream,
                        bool& capped) {
  const double cap = static_cast<double>(kPopulationCap);
  if (lambda > cap) {
    capped = true;
    return kPopulationCap;
  }
  const uint64_t v = stream.poisson(lambda);
  if (v >= kPopulationCap) {
    capped = true;
    return kPopulationCap;
  }
  return v;
}

}  // namespace

double OffspringLaw::mean() const { return std::exp(x); }

uint64_t OffspringLaw::draw_one(rng::RandomStream& stream) const {
  switch (family) {
    case OffspringFamily::geometric_link:
      return stream.geometric(1.0 / (1.0 + std::exp(x)));
    case OffspringFamily::poisson_link:
      return stream.poisson(std::exp(x));
  }
  throw std::logic_error("unreachable");
}

double OffspringLaw::gamma_b(uint64_t b) const {
  const double m = std::exp(x);
  if (family == OffspringFamily::poisson_link) {
    // sum_{k>=b} k^2 pmf = m(m+1) - partial sum below b
    double partial = 0.0;
    double pmf = std::exp(-m);
    for (uint64_t k = 0; k < b; ++k) {
      if (k > 0) pmf *= m / static_cast<double>(k);
      partial += static_cast<double>(k) * static_cast<double>(k) * pmf;
    }
    return (m * (m + 1.0) - partial) / (m * m);
  }
  // geometric on {0,1,...} with q = 1-p = m/(1+m):
  // sum_{k>=b} k^2 q^k = q^b (b^2(1-q)^2 + q(2b(1-q) + 1 + q)) / (1-q)^3
  const double q = m / (1.0 + m);
  const double p = 1.0 - q;
  const double bd = static_cast<double>(b);
  const double s2 = std::pow(q, bd) *
                    (bd * bd * p * p + q * (2.0 * bd * p + 1.0 + q)) /
                    (p * p * p);
  return p * s2 / (m * m);
}

EnvironmentModel EnvironmentModel::geometric(walk::IncrementModel driver) {
  return EnvironmentModel{OffspringFamily::geometric_link, std::move(driver)};
}

EnvironmentModel EnvironmentModel::poisson(walk::IncrementModel driver) {
  return EnvironmentModel{OffspringFamily::poisson_link, std::move(driver)};
}

OffspringLaw sample_environment(const EnvironmentModel& model,
                                rng::RandomStream& stream) {
  return OffspringLaw{model.family, model.driver.sample(stream)};
}

uint64_t step_population(uint64_t z, const OffspringLaw& law,
                         rng::RandomStream& stream, bool& capped) {
  if (z == 0) return 0;
  if (z >= kPopulationCap) {
    capped = true;
    return kPopulationCap;
  }
  if (law.family == OffspringFamily::poisson_link)
    return capped_poisson(static_cast<double>(z) * std::exp(law.x), stream,
                          capped);

  // Geometric link: the z-fold sum is negative binomial NB(z, p), sampled
  // exactly as Poisson(Gamma(z) * e^x); small z summed directly.
  if (z <= 16) {
    const double p = 1.0 / (1.0 + std::exp(law.x));
    uint64_t total = 0;
    for (uint64_t i = 0; i < z; ++i) {
      total += stream.geometric(p);
      if (total >= kPopulationCap) {
        capped = true;
        return kPopulationCap;
      }
    }
    return total;
  }
  const double lambda = stream.gamma(static_cast<double>(z)) * std::exp(law.x);
  return capped_poisson(lambda, stream, capped);
}

Estimate b2_diagnostic(const EnvironmentModel& model, uint64_t b, double eps,
                       uint64_t replicas, const McOptions& mc) {
  const double power = model.driver.attraction().alpha + eps;
  const rng::StreamFamily fam = mc.streams.sub("b2");
  auto kernel = [&](uint64_t r, MeanAcc& acc) {
    rng::RandomStream stream = fam.replica(r);
    const OffspringLaw law = sample_environment(model, stream);
    const double g = law.gamma_b(b);
    const double lg = g > 1.0 ? std::log(g) : 0.0;
    acc.add(std::pow(lg, power));
  };
  MeanAcc acc = par::replica_reduce<MeanAcc>(replicas, kernel, mc.exec);
  return acc.estimate(mc.streams.master_seed);
}

namespace {

struct SurvivalAcc {
  MeanAcc raw;
  MeanAcc bound;
  double left = 0.0, mid = 0.0, right = 0.0;
  uint64_t capped = 0;

  void merge(const SurvivalAcc& o) {
    raw.merge(o.raw);
    bound.merge(o.bound);
    left += o.left;
    mid += o.mid;
    right += o.right;
    capped += o.capped;
  }
};

}  // namespace

SurvivalRow survival_constrained(const EnvironmentModel& model, uint64_t n,
                                 double K, uint64_t replicas, uint64_t J,
                                 const McOptions& mc) {
  if (n <= 2 * J)
    throw std::invalid_argument("survival_constrained: need n > 2J");
  const rng::StreamFamily fam = mc.streams.sub("bpre_k");
  auto kernel = [&](uint64_t r, SurvivalAcc& acc) {
    rng::RandomStream stream = fam.replica(r);
    walk::PathTracker t;
    uint64_t z = 1;
    bool capped = false;
    for (uint64_t k = 0; k < n; ++k) {
      const OffspringLaw law = sample_environment(model, stream);
      t.step(law.x);
      // Once extinct only the environment walk advances (the a.s. bound
      // e^{S_tau} is averaged over all paths).
      if (z > 0) z = step_population(z, law, stream, capped);
    }
    const bool constrained = t.sum() <= K;
    const bool event = z > 0 && constrained;
    acc.raw.add(event ? 1.0 : 0.0);
    acc.bound.add(constrained ? std::exp(t.s_tau()) : 0.0);
    if (event) {
      const uint64_t tau = t.tau();
      if (tau <= J) acc.left += 1.0;
      else if (tau <= n - J) acc.mid += 1.0;
      else acc.right += 1.0;
    }
    if (capped) ++acc.capped;
  };
  SurvivalAcc acc = par::replica_reduce<SurvivalAcc>(replicas, kernel, mc.exec);

  SurvivalRow row;
  row.n = n;
  row.K = K;
  row.J = J;
  row.raw = acc.raw.estimate(mc.streams.master_seed);
  row.normalized = row.raw.value / model.driver.scaling().b(n);
  const double R = static_cast<double>(replicas);
  row.bucket_left = acc.left / R;
  row.bucket_mid = acc.mid / R;
  row.bucket_right = acc.right / R;
  row.bound_mean = acc.bound.mean();
  row.bound_stderr = acc.bound.stderror();
  row.capped_frac = static_cast<double>(acc.capped) / R;
  row.replicas = replicas;
  row.seed = mc.streams.master_seed;
  return row;
}

Estimate survival_unconstrained(const EnvironmentModel& model, uint64_t n,
                                uint64_t replicas, const McOptions& mc) {
  const rng::StreamFamily fam = mc.streams.sub("bpre_u");
  auto kernel = [&](uint64_t r, MeanAcc& acc) {
    rng::RandomStream stream = fam.replica(r);
    uint64_t z = 1;
    bool capped = false;
    for (uint64_t k = 0; k < n && z > 0; ++k) {
      const OffspringLaw law = sample_environment(model, stream);
      z = step_population(z, law, stream, capped);
    }
    acc.add(z > 0 ? 1.0 : 0.0);
  };
  MeanAcc acc = par::replica_reduce<MeanAcc>(replicas, kernel, mc.exec);
  return acc.estimate(mc.streams.master_seed);
}

Estimate conditional_nonpositive_fraction(const EnvironmentModel& model,
                                          uint64_t n, uint64_t replicas,
                                          const McOptions& mc) {
  struct Acc {
    uint64_t survived = 0;
    uint64_t nonpositive = 0;
    void merge(const Acc& o) {
      survived += o.survived;
      nonpositive += o.nonpositive;
    }
  };
  const rng::StreamFamily fam = mc.streams.sub("bpre_meander");
  auto kernel = [&](uint64_t r, Acc& acc) {
    rng::RandomStream stream = fam.replica(r);
    walk::PathTracker t;
    uint64_t z = 1;
    bool capped = false;
    for (uint64_t k = 0; k < n && z > 0; ++k) {
      const OffspringLaw law = sample_environment(model, stream);
      t.step(law.x);
      z = step_population(z, law, stream, capped);
    }
    if (z > 0) {
      ++acc.survived;
      if (t.sum() <= 0.0) ++acc.nonpositive;
    }
  };
  Acc acc = par::replica_reduce<Acc>(replicas, kernel, mc.exec);
  if (acc.survived == 0)
    throw std::runtime_error("conditional fraction: no surviving replicas");
  const double p = static_cast<double>(acc.nonpositive) /
                   static_cast<double>(acc.survived);
  const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) /
                              static_cast<double>(acc.survived));
  return Estimate{p, se, acc.survived, mc.streams.master_seed, 0};
}

namespace {

Estimate h_transform_mean(const walk::IncrementModel& driver,
                          const PathFunctional& g, double x, uint64_t n,
                          uint64_t replicas, const renewal::RenewalTable& table,
                          bool plus_side, const McOptions& mc) {
  if (!table.tail.valid)
    throw renewal::table_error("h-transform weights need a usable tail fit");
  const double hx = table.value_at(plus_side ? x : -x);
  const rng::StreamFamily fam = mc.streams.sub(plus_side ? "hplus" : "hminus");
  auto kernel = [&](uint64_t r, MeanAcc& acc) {
    rng::RandomStream stream = fam.replica(r);
    std::vector<double> inc(n), sums(n);
    walk::PathTracker t(x);
    for (uint64_t k = 0; k < n; ++k) {
      inc[k] = driver.sample(stream);
      t.step(inc[k]);
      sums[k] = t.sum();
    }
    const bool on_event = plus_side ? (t.min() >= 0.0) : (t.max() < 0.0);
    if (!on_event) {
      acc.add(0.0);
      return;
    }
    const double w =
        table.value_at(plus_side ? t.sum() : -t.sum()) / hx;
    rng::RandomStream aux = fam.sub("aux").replica(r);
    PathContext ctx{inc, sums, x, &aux};
    acc.add(g(ctx) * w);
  };
  MeanAcc acc = par::replica_reduce<MeanAcc>(replicas, kernel, mc.exec);
  return acc.estimate(mc.streams.master_seed);
}

}  // namespace

Estimate plus_measure_expectation(const walk::IncrementModel& driver,
                                  const PathFunctional& g, double x, uint64_t n,
                                  uint64_t replicas,
                                  const renewal::RenewalTable& U,
                                  const McOptions& mc) {
  if (x < 0.0)
    throw std::invalid_argument("plus_measure_expectation: x must be >= 0");
  return h_transform_mean(driver, g, x, n, replicas, U, true, mc);
}

Estimate minus_measure_expectation(const walk::IncrementModel& driver,
                                   const PathFunctional& g, double x, uint64_t n,
                                   uint64_t replicas,
                                   const renewal::RenewalTable& V,
                                   const McOptions& mc) {
  if (x > 0.0)
    throw std::invalid_argument("minus_measure_expectation: x must be <= 0");
  return h_transform_mean(driver, g, x, n, replicas, V, false, mc);
}

MartingaleTrack martingale_W_track(const EnvironmentModel& model, double x,
                                   const std::vector<uint64_t>& checkpoints,
                                   uint64_t replicas,
                                   const renewal::RenewalTable& U,
                                   const McOptions& mc) {
  if (checkpoints.empty() ||
      !std::is_sorted(checkpoints.begin(), checkpoints.end()))
    throw std::invalid_argument("martingale_W_track: increasing checkpoints required");
  if (x < 0.0) throw std::invalid_argument("martingale_W_track: x must be >= 0");
  if (!U.tail.valid)
    throw renewal::table_error("martingale_W_track needs a U tail fit");

  const size_t nck = checkpoints.size();
  const uint64_t last = checkpoints.back();
  const double ux = U.value_at(x);
  struct Acc {
    std::vector<MeanAcc> w;
    MeanAcc positive;
    void merge(const Acc& o) {
      if (w.empty()) {
        *this = o;
        return;
      }
      if (o.w.empty()) return;
      for (size_t i = 0; i < w.size(); ++i) w[i].merge(o.w[i]);
      positive.merge(o.positive);
    }
  };
  const rng::StreamFamily fam = mc.streams.sub("martingaleW");
  auto kernel = [&](uint64_t r, Acc& acc) {
    if (acc.w.empty()) acc.w.resize(nck);
    rng::RandomStream stream = fam.replica(r);
    walk::PathTracker t(x);
    uint64_t z = 1;
    bool capped = false;
    size_t next = 0;
    auto record = [&](size_t idx) {
      const double w_val =
          static_cast<double>(z) * std::exp(-(t.steps() ? t.sum() : x));
      const bool alive_event = t.steps() == 0 ? true : t.min() >= 0.0;
      const double weight =
          alive_event ? U.value_at(t.steps() ? t.sum() : x) / ux : 0.0;
      acc.w[idx].add(w_val * weight);
      if (idx + 1 == nck)
        acc.positive.add(w_val > 1e-3 ? weight : 0.0);
    };
    if (checkpoints[0] == 0) {
      record(0);
      next = 1;
    }
    for (uint64_t k = 1; k <= last; ++k) {
      const OffspringLaw law = sample_environment(model, stream);
      t.step(law.x);
      if (z > 0) z = step_population(z, law, stream, capped);
      while (next < nck && checkpoints[next] == k) {
        record(next);
        ++next;
      }
    }
  };
  Acc acc = par::replica_reduce<Acc>(replicas, kernel, mc.exec);
  MartingaleTrack out;
  out.checkpoints = checkpoints;
  out.w_mean.reserve(nck);
  for (size_t i = 0; i < nck; ++i)
    out.w_mean.push_back(acc.w[i].estimate(mc.streams.master_seed));
  out.positive_fraction_last = acc.positive.estimate(mc.streams.master_seed);
  return out;
}

void SurvivalReport::write_csv(std::ostream& os) const {
  os << "n,K,J,raw,raw_stderr,normalized,bucket_left,bucket_mid,bucket_right,"
        "capped_frac,replicas,seed\n";
  char buf[512];
  for (const SurvivalRow& r : rows) {
    std::snprintf(
        buf, sizeof buf,
        "%llu,%.17g,%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%llu,%llu\n",
        static_cast<unsigned long long>(r.n), r.K,
        static_cast<unsigned long long>(r.J), r.raw.value, r.raw.stderror,
        r.normalized, r.bucket_left, r.bucket_mid, r.bucket_right,
        r.capped_frac, static_cast<unsigned long long>(r.replicas),
        static_cast<unsigned long long>(r.seed));
    os << buf;
  }
}

}  // namespace walklab::bpre
