#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

// Counter-based random streams (Philox4x32-10, Salmon et al., SC 2011).
//
// Every Monte Carlo replica owns a stream keyed by (master seed, experiment
// tag, replica index). Streams are value objects: a replica's draws depend
// only on its key and counter, never on which worker ran it or in what
// order, which is what makes runs bit-identical at any worker count.

namespace walklab::rng {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// FNV-1a, used for experiment tags and config digests.
inline uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace detail {

inline void mulhilo32(uint32_t a, uint32_t b, uint32_t& lo, uint32_t& hi) {
  const uint64_t p = static_cast<uint64_t>(a) * b;
  lo = static_cast<uint32_t>(p);
  hi = static_cast<uint32_t>(p >> 32);
}

struct PhiloxBlock {
  uint32_t v[4];
};

// One 10-round Philox4x32 block. Constants from the reference publication.
inline PhiloxBlock philox4x32_10(uint32_t c0, uint32_t c1, uint32_t c2,
                                 uint32_t c3, uint32_t k0, uint32_t k1) {
  constexpr uint32_t kWeylA = 0x9E3779B9u;
  constexpr uint32_t kWeylB = 0xBB67AE85u;
  constexpr uint32_t kMulA = 0xD2511F53u;
  constexpr uint32_t kMulB = 0xCD9E8D57u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k0 += kWeylA;
      k1 += kWeylB;
    }
    uint32_t lo0, hi0, lo1, hi1;
    mulhilo32(kMulA, c0, lo0, hi0);
    mulhilo32(kMulB, c2, lo1, hi1);
    const uint32_t n0 = hi1 ^ c1 ^ k0;
    const uint32_t n1 = lo1;
    const uint32_t n2 = hi0 ^ c3 ^ k1;
    const uint32_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
  }
  return PhiloxBlock{{c0, c1, c2, c3}};
}

}  // namespace detail

class RandomStream;

// (master seed, experiment tag) pair from which per-replica streams are
// derived; the object handed to replica-parallel kernels.
struct StreamFamily {
  uint64_t master_seed = 0;
  uint64_t tag = 0;

  static StreamFamily make(uint64_t master_seed, std::string_view tag) {
    return StreamFamily{master_seed, fnv1a(tag)};
  }
  StreamFamily sub(std::string_view suffix) const {
    return StreamFamily{master_seed, tag ^ fnv1a(suffix)};
  }
  inline RandomStream replica(uint64_t index) const;
};

class RandomStream {
 public:
  RandomStream() = default;

  RandomStream(uint64_t key, uint64_t stream_id)
      : key_(key), stream_id_(stream_id) {}

  // Deterministic per-replica stream: position counter starts at zero and
  // the 128-bit Philox counter is (position, stream id), so streams never
  // overlap.
  static RandomStream for_replica(uint64_t master_seed, uint64_t tag,
                                  uint64_t replica_index) {
    const uint64_t key = splitmix64(master_seed) ^ splitmix64(tag ^ 0x5851f42d4c957f2dull);
    const uint64_t sid = splitmix64(tag) + replica_index;
    return RandomStream(key, sid);
  }

  static RandomStream for_replica(uint64_t master_seed, std::string_view tag,
                                  uint64_t replica_index) {
    return for_replica(master_seed, fnv1a(tag), replica_index);
  }

  uint32_t next_u32() {
    if (avail_ == 0) refill();
    return block_.v[4 - avail_--];
  }

  uint64_t next_u64() {
    const uint64_t lo = next_u32();
    const uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform on the open interval (0,1); never returns an endpoint, so
  // log(u) and log1p(-u) are always finite.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential() { return -std::log(uniform()); }

  // Standard normal via the Marsaglia polar method; the pair's second value
  // is cached in the stream state.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  // Gamma(shape, 1) by Marsaglia-Tsang squeeze; shape < 1 handled by the
  // usual boost U^{1/shape}.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Poisson: Knuth multiplication below 30, Hormann's PTRS above. Both are
  // exact; PTRS keeps the cost O(1) for the huge population means that show
  // up in branching runs.
  uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
      const double limit = std::exp(-mean);
      double prod = 1.0;
      uint64_t k = 0;
      for (;;) {
        prod *= uniform();
        if (prod <= limit) return k;
        ++k;
      }
    }
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::fabs(u);
      const double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<uint64_t>(kd);
      if (kd < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          -mean + kd * log_mean - std::lgamma(kd + 1.0)) {
        return static_cast<uint64_t>(kd);
      }
    }
  }

  // Geometric on {0,1,2,...} with success probability p: P(k) = p(1-p)^k.
  uint64_t geometric(double p) {
    if (p >= 1.0) return 0;
    const double g = std::log(uniform()) / std::log1p(-p);
    return static_cast<uint64_t>(g);
  }

  uint64_t stream_id() const { return stream_id_; }

 private:
  void refill() {
    block_ = detail::philox4x32_10(
        static_cast<uint32_t>(pos_), static_cast<uint32_t>(pos_ >> 32),
        static_cast<uint32_t>(stream_id_),
        static_cast<uint32_t>(stream_id_ >> 32), static_cast<uint32_t>(key_),
        static_cast<uint32_t>(key_ >> 32));
    ++pos_;
    avail_ = 4;
  }

  uint64_t key_ = 0;
  uint64_t stream_id_ = 0;
  uint64_t pos_ = 0;
  detail::PhiloxBlock block_{};
  int avail_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline RandomStream StreamFamily::replica(uint64_t index) const {
  return RandomStream::for_replica(master_seed, tag, index);
}

}  // namespace walklab::rng
