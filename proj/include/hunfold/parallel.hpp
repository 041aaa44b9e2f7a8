#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace hunfold {

/// Worker count used by parallel_for. Defaults to the THREADS environment
/// variable, else 1.
int thread_count();
void set_thread_count(int n);

/// Runs body(begin, end) over a fixed partition of [0, n). The partition
/// depends only on n, never on the thread count, so callers that write
/// per-block partials get identical results for any number of workers.
void parallel_blocks(std::size_t n, std::size_t block_count,
                     const std::function<void(std::size_t block, std::size_t begin, std::size_t end)>& body);

/// Pairwise summation in a fixed tree order.
double pairwise_sum(std::span<const double> values);

}  // namespace hunfold
