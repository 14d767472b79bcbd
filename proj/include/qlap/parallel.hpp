#pragma once

// Worker pool plumbing with a deterministic contract: work is split into
// units whose boundaries do not depend on the worker count, and every
// reduction happens serially in a fixed order afterwards. Results are
// therefore bit-identical for any number of workers.

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace qlap {

// Process-wide worker count (like Eigen::setNbThreads). Values < 1 reset to 1.
void set_worker_count(int workers);
int worker_count();

// Runs body(i) for i in [0, count). Units are handed out dynamically; body
// must only write to storage owned by unit i.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

// Pairwise (cascade) summation over a contiguous range.
template <class T>
T pairwise_sum(std::span<const T> v) {
  if (v.empty()) return T{};
  if (v.size() <= 8) {
    T acc = v[0];
    for (std::size_t i = 1; i < v.size(); ++i) acc += v[i];
    return acc;
  }
  const std::size_t half = v.size() / 2;
  T left = pairwise_sum(v.first(half));
  left += pairwise_sum(v.subspan(half));
  return left;
}

// Pairwise reduction of heavier objects (matrices) in place; returns v[0].
template <class T>
T pairwise_reduce(std::vector<T> v) {
  if (v.empty()) return T{};
  for (std::size_t stride = 1; stride < v.size(); stride *= 2)
    for (std::size_t i = 0; i + stride < v.size(); i += 2 * stride) v[i] += v[i + stride];
  return std::move(v[0]);
}

}  // namespace qlap
