#pragma once

// Chunked parallel map with a reduction order that depends only on the
// chunk size. Work items are split into fixed chunks; threads claim chunks
// dynamically, but every chunk writes into its own slot and the slots are
// combined by a fixed pairwise tree afterwards.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "polylab/error.hpp"

namespace polylab {

struct ExecPolicy {
  unsigned threads = 1;
  std::size_t chunk_size = 256;
};

inline std::size_t chunk_count(std::size_t n_items, std::size_t chunk_size) {
  return (n_items + chunk_size - 1) / chunk_size;
}

// Calls fn(begin, end, chunk_index) once for every chunk of [0, n_items).
template <class Fn>
void parallel_chunks(std::size_t n_items, const ExecPolicy& policy, Fn&& fn) {
  if (policy.chunk_size == 0) {
    throw InvalidArgument("chunk_size must be positive");
  }
  const std::size_t n_chunks = chunk_count(n_items, policy.chunk_size);
  if (n_chunks == 0) return;
  const auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * policy.chunk_size;
    const std::size_t end = std::min(n_items, begin + policy.chunk_size);
    fn(begin, end, c);
  };

  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, policy.threads), n_chunks));
  if (n_threads == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
      workers.emplace_back([&] {
        for (;;) {
          const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
          if (c >= n_chunks) return;
          try {
            run_chunk(c);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(n_chunks, std::memory_order_relaxed);
            return;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

// Parallel map over items; out[i] = fn(i).
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n_items, const ExecPolicy& policy, Fn&& fn) {
  std::vector<T> out(n_items);
  parallel_chunks(n_items, policy, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) out[i] = fn(i);
  });
  return out;
}

// Pairwise tree over the slots, left to right. Empty input returns identity.
template <class T, class Combine>
T tree_reduce(std::vector<T> slots, T identity, Combine&& combine) {
  if (slots.empty()) return identity;
  while (slots.size() > 1) {
    std::vector<T> next;
    next.reserve((slots.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < slots.size(); i += 2) {
      next.push_back(combine(slots[i], slots[i + 1]));
    }
    if (slots.size() % 2 == 1) next.push_back(slots.back());
    slots = std::move(next);
  }
  return slots.front();
}

// Reduce items [0, n): each chunk folds sequentially with `fold`, then the
// chunk partials are combined by tree_reduce. The result depends on the
// chunk size but not on the thread count.
template <class T, class Fold, class Combine>
T chunked_reduce(std::size_t n_items, const ExecPolicy& policy, T identity, Fold&& fold,
                 Combine&& combine) {
  std::vector<T> partials(chunk_count(n_items, std::max<std::size_t>(1, policy.chunk_size)),
                          identity);
  parallel_chunks(n_items, policy, [&](std::size_t begin, std::size_t end, std::size_t c) {
    T acc = identity;
    for (std::size_t i = begin; i < end; ++i) fold(acc, i);
    partials[c] = acc;
  });
  return tree_reduce(std::move(partials), identity, combine);
}

}  // namespace polylab

namespace polylab {

// Sum of term(i) over [0, n) in which items 2m and 2m+1 are added to each
// other before anything else, so antithetic twins with opposite values
// cancel exactly. Pair sums are folded per chunk and the chunks combined by
// tree_reduce; the result depends only on n and chunk_size.
template <class Term>
double twin_sum(std::size_t n, std::size_t chunk_size, Term&& term) {
  const std::size_t n_pairs = (n + 1) / 2;
  const ExecPolicy serial{1, std::max<std::size_t>(1, chunk_size / 2)};
  return chunked_reduce(
      n_pairs, serial, 0.0,
      [&](double& acc, std::size_t m) {
        const std::size_t i = 2 * m;
        acc += i + 1 < n ? term(i) + term(i + 1) : term(i);
      },
      [](double a, double b) { return a + b; });
}

}  // namespace polylab
