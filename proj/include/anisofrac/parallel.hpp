#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace anisofrac {

// Worker count: explicit setting, else ANISOFRAC_THREADS, else hardware concurrency.
void set_thread_count(int count);
[[nodiscard]] int thread_count();

// Runs body(i) for i in [0, count). Indices are split into contiguous static
// chunks; body must only write to slots owned by i.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

// Fixed-tree pairwise summation; the result depends only on the input order.
[[nodiscard]] double pairwise_sum(std::span<const double> values);

}  // namespace anisofrac
