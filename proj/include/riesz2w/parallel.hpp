#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace riesz2w {

namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> n{0};
  return n;
}
}  // namespace detail

/// Worker count for chunked loops. 0 means "ask RIESZ2W_THREADS, else 1".
inline void set_threads(int n) { detail::thread_setting().store(std::max(0, n)); }

inline int threads() {
  int n = detail::thread_setting().load();
  if (n > 0) return n;
  if (const char* env = std::getenv("RIESZ2W_THREADS")) {
    try {
      n = std::stoi(env);
    } catch (...) {
      n = 0;
    }
  }
  return n > 0 ? n : 1;
}

/// Runs body(chunk_begin, chunk_end, chunk_index) over [0, count) in chunks
/// of fixed size. Chunk boundaries depend only on `chunk`, never on the
/// worker count.
template <class Body>
void for_chunks(std::size_t count, std::size_t chunk, Body&& body) {
  if (count == 0) return;
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t nchunks = (count + chunk - 1) / chunk;
  const int workers = static_cast<int>(std::min<std::size_t>(threads(), nchunks));
  auto run = [&](std::size_t c) {
    const std::size_t b = c * chunk;
    body(b, std::min(count, b + chunk), c);
  };
  if (workers <= 1) {
    for (std::size_t c = 0; c < nchunks; ++c) run(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < nchunks; c = next++) run(c);
    });
  }
  for (auto& th : pool) th.join();
}

/// Pairwise reduction in a fixed tree order.
template <class T, class Combine>
T tree_reduce(std::vector<T> parts, Combine combine, T identity) {
  if (parts.empty()) return identity;
  while (parts.size() > 1) {
    std::vector<T> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2)
      next.push_back(combine(parts[i], parts[i + 1]));
    if (parts.size() % 2 == 1) next.push_back(parts.back());
    parts = std::move(next);
  }
  return parts.front();
}

/// Chunked map + deterministic tree reduction: bit-stable for a given chunk
/// size regardless of thread count.
template <class T, class Map, class Combine>
T map_reduce(std::size_t count, std::size_t chunk, T identity, Map map, Combine combine) {
  if (count == 0) return identity;
  chunk = std::max<std::size_t>(chunk, 1);
  std::vector<T> parts((count + chunk - 1) / chunk, identity);
  for_chunks(count, chunk, [&](std::size_t b, std::size_t e, std::size_t c) {
    T acc = identity;
    for (std::size_t i = b; i < e; ++i) acc = combine(acc, map(i));
    parts[c] = acc;
  });
  return tree_reduce(std::move(parts), combine, identity);
}

}  // namespace riesz2w
