#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

// Replica-parallel map-reduce. Replicas are grouped into fixed-size blocks;
// a block is always accumulated by one worker in replica order, and block
// results are merged in block order. The serial path runs the exact same
// block function, so parallel and serial results are bit-identical and the
// worker count only changes speed.

namespace walklab::par {

struct ExecPolicy {
  bool parallel = true;
  int workers = 0;  // 0 = OpenMP default
};

constexpr uint64_t kBlockSize = 16384;

// kernel(replica_index, Acc&) accumulates one replica into a block-local
// accumulator; Acc needs a default constructor and merge(const Acc&).
template <class Acc, class Kernel>
Acc replica_reduce(uint64_t n_replicas, Kernel&& kernel,
                   const ExecPolicy& policy = {}) {
  const uint64_t n_blocks = (n_replicas + kBlockSize - 1) / kBlockSize;
  Acc total;

  auto run_block = [&](uint64_t b) {
    Acc local;
    const uint64_t lo = b * kBlockSize;
    const uint64_t hi = lo + kBlockSize < n_replicas ? lo + kBlockSize : n_replicas;
    for (uint64_t r = lo; r < hi; ++r) kernel(r, local);
    return local;
  };

#ifdef _OPENMP
  if (policy.parallel && n_blocks > 1) {
    const int threads = policy.workers > 0 ? policy.workers : omp_get_max_threads();
    const int64_t nb = static_cast<int64_t>(n_blocks);
#pragma omp parallel for ordered schedule(dynamic, 1) num_threads(threads)
    for (int64_t b = 0; b < nb; ++b) {
      Acc local = run_block(static_cast<uint64_t>(b));
#pragma omp ordered
      total.merge(local);
    }
    return total;
  }
#endif
  (void)policy;
  for (uint64_t b = 0; b < n_blocks; ++b) {
    Acc local = run_block(b);
    total.merge(local);
  }
  return total;
}

}  // namespace walklab::par
