#pragma once

#include <cstddef>
#include <span>

namespace occfof {

// Pairwise (cascade) summation of term(i) for i in [begin, end). The
// association order depends only on the range, never on threading.
template <typename Term>
double pairwise_sum(std::size_t begin, std::size_t end, const Term& term) {
  constexpr std::size_t kBlock = 16;
  const std::size_t n = end - begin;
  if (n <= kBlock) {
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += term(i);
    return acc;
  }
  const std::size_t mid = begin + n / 2;
  return pairwise_sum(begin, mid, term) + pairwise_sum(mid, end, term);
}

inline double pairwise_sum(std::span<const double> values) {
  return pairwise_sum(0, values.size(), [&](std::size_t i) { return values[i]; });
}

}  // namespace occfof
