#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace mindet {

struct ParallelOptions {
  int threads = 1;
  /// Fixed 32-item chunks merged in index order, independent of `threads`.
  bool deterministic = false;
};

/// Splits [0, n) into chunks, runs `body(local, begin, end)` on each chunk with a
/// fresh `make()` accumulator, then folds the partials with `merge(total, part)`
/// in chunk order.
template <class Acc, class Make, class Body, class Merge>
Acc chunked_reduce(std::size_t n, const ParallelOptions& opts, Make make, Body body, Merge merge) {
  const std::size_t threads = static_cast<std::size_t>(std::max(1, opts.threads));
  std::size_t chunk = opts.deterministic ? 32 : (n + threads - 1) / std::max<std::size_t>(threads, 1);
  if (chunk == 0) chunk = 1;
  const std::size_t n_chunks = (n + chunk - 1) / chunk;

  Acc total = make();
  if (n_chunks <= 1 && !opts.deterministic) {
    body(total, std::size_t{0}, n);
    return total;
  }
  std::vector<Acc> parts;
  parts.reserve(n_chunks);
  for (std::size_t c = 0; c < n_chunks; ++c) parts.push_back(make());

  auto run = [&](std::size_t worker) {
    for (std::size_t c = worker; c < n_chunks; c += threads)
      body(parts[c], c * chunk, std::min(n, (c + 1) * chunk));
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(threads, n_chunks); ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& p : parts) merge(total, p);
  return total;
}

}  // namespace mindet
