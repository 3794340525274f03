#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "sweepsim/rng.h"

namespace sweepsim {

/// Worker threads to use: hardware concurrency, capped by SWEEPSIM_THREADS
/// when that variable holds a positive integer.
unsigned worker_count();

/// Runs fn(rng, i) for i in [0, n) where replicate i owns the stream
/// (seed, first_stream + i). Results come back indexed by replicate, so
/// the outcome never depends on scheduling.
template <class R, class F>
std::vector<R> run_replicates(std::uint64_t seed, std::uint64_t first_stream, std::int64_t n,
                              F&& fn, unsigned threads = 0) {
  std::vector<R> out(static_cast<std::size_t>(n > 0 ? n : 0));
  if (n <= 0) return out;
  if (threads == 0) threads = worker_count();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));

  std::atomic<std::int64_t> next{0};
  std::mutex err_mu;
  std::exception_ptr error;
  std::int64_t error_index = n;

  auto work = [&] {
    while (true) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        RngStream rng(seed, first_stream + static_cast<std::uint64_t>(i));
        out[static_cast<std::size_t>(i)] = fn(rng, i);
      } catch (...) {
        std::lock_guard lock(err_mu);
        // Keep the failure of the lowest replicate for a deterministic report.
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace sweepsim
