#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace walklab {

// Monte Carlo point estimate with its replica-level provenance.
struct Estimate {
  double value = 0.0;
  double stderror = 0.0;
  uint64_t replicas = 0;
  uint64_t seed = 0;
  uint64_t config_hash = 0;
};

// Streaming (sum, sum of squares, count) accumulator. Merging is plain
// addition, so block merges commute with how replicas were partitioned.
struct MeanAcc {
  double sum = 0.0;
  double sum_sq = 0.0;
  uint64_t n = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }

  void merge(const MeanAcc& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    n += o.n;
  }

  double mean() const {
    if (n == 0) throw std::logic_error("MeanAcc: empty accumulator");
    return sum / static_cast<double>(n);
  }

  double variance() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double v = (sum_sq - static_cast<double>(n) * m * m) /
                     static_cast<double>(n - 1);
    return v > 0.0 ? v : 0.0;
  }

  double stderror() const {
    return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
  }

  Estimate estimate(uint64_t seed = 0, uint64_t config_hash = 0) const {
    return Estimate{mean(), stderror(), n, seed, config_hash};
  }
};

}  // namespace walklab
