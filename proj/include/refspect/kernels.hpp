#pragma once

// Data-parallel inner loops. Every kernel has a serial reference version with
// the same accumulation order, so the OpenMP variant must agree bit-for-bit.

#include <cstdint>
#include <span>
#include <vector>

namespace refspect::kernels {

struct WindowStats {
  double median = 0.0;
  double window_sum = 0.0;
  bool operator==(const WindowStats&) const = default;
};

// For query i the window is positions [q-2, q+2] with q = first_query + i,
// clipped to [0, counts.size()). An empty window yields {0, 0}. Even-sized
// windows take the mean of the two middle values.
void WindowStatsSerial(std::span<const std::int64_t> counts, std::int64_t first_query,
                       std::span<WindowStats> out);
void WindowStatsParallel(std::span<const std::int64_t> counts, std::int64_t first_query,
                         std::span<WindowStats> out);

// sum_i (sum_j p_i p_j d(i, j)), rows accumulated left to right and row sums
// added in index order.
template <typename Distance>
double QuadraticEntropySerial(std::span<const double> p, Distance&& d) {
  const std::size_t n = p.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) row += p[i] * p[j] * d(i, j);
    }
    total += row;
  }
  return total;
}

template <typename Distance>
double QuadraticEntropyParallel(std::span<const double> p, Distance&& d) {
  const auto n = static_cast<std::ptrdiff_t>(p.size());
  std::vector<double> rows(p.size(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      if (i != j) row += p[i] * p[j] * d(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    rows[static_cast<std::size_t>(i)] = row;
  }
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

// Row-major upper triangle (i < j) of a symmetric score matrix; entry (i, j)
// lives at out[i * n + j].
template <typename Score>
std::vector<double> PairwiseScoresSerial(std::size_t n, Score&& score) {
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) out[i * n + j] = score(i, j);
  }
  return out;
}

template <typename Score>
std::vector<double> PairwiseScoresParallel(std::size_t n, Score&& score) {
  std::vector<double> out(n * n, 0.0);
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j) {
      out[static_cast<std::size_t>(i) * n + j] = score(static_cast<std::size_t>(i), j);
    }
  }
  return out;
}

}  // namespace refspect::kernels
