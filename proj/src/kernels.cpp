#include "refspect/kernels.hpp"

#include <algorithm>
#include <array>

namespace refspect::kernels {

namespace {

WindowStats Evaluate(std::span<const std::int64_t> counts, std::int64_t q) {
  const auto len = static_cast<std::int64_t>(counts.size());
  const std::int64_t lo = std::max<std::int64_t>(q - 2, 0);
  const std::int64_t hi = std::min<std::int64_t>(q + 2, len - 1);
  if (lo > hi) return {};

  std::array<std::int64_t, 5> window{};
  std::size_t k = 0;
  std::int64_t sum = 0;
  for (std::int64_t y = lo; y <= hi; ++y) {
    window[k++] = counts[static_cast<std::size_t>(y)];
    sum += counts[static_cast<std::size_t>(y)];
  }
  // Insertion sort; at most five elements.
  for (std::size_t i = 1; i < k; ++i) {
    for (std::size_t j = i; j > 0 && window[j - 1] > window[j]; --j) std::swap(window[j - 1], window[j]);
  }
  WindowStats s;
  s.window_sum = static_cast<double>(sum);
  if (k % 2 == 1) {
    s.median = static_cast<double>(window[k / 2]);
  } else {
    s.median = (static_cast<double>(window[k / 2 - 1]) + static_cast<double>(window[k / 2])) / 2.0;
  }
  return s;
}

}  // namespace

void WindowStatsSerial(std::span<const std::int64_t> counts, std::int64_t first_query,
                       std::span<WindowStats> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = Evaluate(counts, first_query + static_cast<std::int64_t>(i));
  }
}

void WindowStatsParallel(std::span<const std::int64_t> counts, std::int64_t first_query,
                         std::span<WindowStats> out) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = Evaluate(counts, first_query + i);
  }
}

}  // namespace refspect::kernels
