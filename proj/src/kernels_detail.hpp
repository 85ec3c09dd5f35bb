#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "synthcorr/kernels.hpp"

namespace synthcorr::kernels::detail {

// Neumaier variant of Kahan summation.
struct CompensatedSum {
  double total = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double t = total + v;
    if (std::abs(total) >= std::abs(v)) {
      carry += (total - t) + v;
    } else {
      carry += (v - t) + total;
    }
    total = t;
  }

  double value() const { return total + carry; }
};

inline std::size_t block_count(std::size_t n) { return (n + kBlockRows - 1) / kBlockRows; }

inline std::size_t block_begin(std::size_t b) { return b * kBlockRows; }

inline std::size_t block_end(std::size_t b, std::size_t n) {
  return std::min(n, (b + 1) * kBlockRows);
}

template <class Term>
double block_partial(std::size_t b, std::size_t n, Term term) {
  CompensatedSum acc;
  for (std::size_t i = block_begin(b), e = block_end(b, n); i < e; ++i) acc.add(term(i));
  return acc.value();
}

inline double combine(std::span<const double> partials) {
  CompensatedSum acc;
  for (double p : partials) acc.add(p);
  return acc.value();
}

}  // namespace synthcorr::kernels::detail
