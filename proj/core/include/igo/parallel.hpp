#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace igo {

// Default worker count: IGO_THREADS if set to a positive integer, otherwise
// hardware concurrency (at least 1).
int default_thread_count();

// Runs fn(job) for job = 0..n_jobs-1 and collects the results in job order.
// Jobs are handed out dynamically but each result lands in its own slot, so
// the returned vector is identical for every worker count. fn must not
// depend on shared mutable state (give each job its own RngStream).
template <class T, class Fn>
std::vector<T> run_jobs(std::int64_t n_jobs, int threads, Fn fn) {
  std::vector<T> out(static_cast<std::size_t>(n_jobs));
  if (n_jobs <= 0) return out;
  if (threads <= 0) threads = default_thread_count();
  if (threads > n_jobs) threads = static_cast<int>(n_jobs);

  if (threads == 1) {
    for (std::int64_t j = 0; j < n_jobs; ++j) out[static_cast<std::size_t>(j)] = fn(j);
    return out;
  }

  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const std::int64_t j = next.fetch_add(1);
        if (j >= n_jobs || failed.load()) return;
        try {
          out[static_cast<std::size_t>(j)] = fn(j);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace igo
