#pragma once

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace atlab {

// Integer power with the convention 0^0 = 1 (indicator-limit reading of
// degenerate weights).
inline double ipow(double x, long long n) {
  if (n == 0) return 1.0;
  double r = 1.0, b = x;
  long long m = n;
  while (m > 0) {
    if (m & 1) r *= b;
    b *= b;
    m >>= 1;
  }
  return r;
}

// Neumaier compensated summation.
struct KahanSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

inline int popcount64(uint64_t x) { return std::popcount(x); }

struct CapExceeded : std::runtime_error {
  explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

inline int default_thread_count() {
  if (const char* env = std::getenv("ATLAB_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Splits [0,n) into fixed-size blocks (independent of the worker count) and
// reduces per-block partial results in block order, so results do not depend
// on how many threads ran.
template <typename Acc, typename BlockFn, typename MergeFn>
Acc parallel_block_reduce(uint64_t n, const Acc& init, BlockFn block_fn, MergeFn merge_fn,
                          int threads = 0, uint64_t block_size = 1 << 16) {
  if (threads <= 0) threads = default_thread_count();
  uint64_t nblocks = (n + block_size - 1) / block_size;
  if (nblocks == 0) return init;
  std::vector<Acc> partial(nblocks, init);
  if (threads == 1 || nblocks == 1) {
    for (uint64_t b = 0; b < nblocks; ++b) {
      uint64_t lo = b * block_size, hi = std::min(n, lo + block_size);
      block_fn(lo, hi, partial[b]);
    }
  } else {
    std::vector<std::thread> pool;
    std::atomic<uint64_t> next{0};
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          uint64_t b = next.fetch_add(1);
          if (b >= nblocks) break;
          uint64_t lo = b * block_size, hi = std::min(n, lo + block_size);
          block_fn(lo, hi, partial[b]);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  Acc acc = init;
  for (uint64_t b = 0; b < nblocks; ++b) merge_fn(acc, partial[b]);
  return acc;
}

}  // namespace atlab
