#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace slicegauss {

// Worker count resolution: explicit value > 0 wins, then the
// SLICE_GAUSS_THREADS environment variable, then hardware concurrency.
unsigned resolve_threads(unsigned requested = 0);

// Runs body(begin, end) over a static partition of [0, count). The partition
// only affects scheduling; callers write results by index.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t begin, std::size_t end)>& body);

// Pairwise summation with a fixed tree shape that depends only on size.
double pairwise_sum(std::span<const double> values);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Sample mean and standard error (sample std / sqrt(count)), two-pass,
// both passes pairwise.
MeanEstimate mean_and_std_error(std::span<const double> values);

}  // namespace slicegauss
