#pragma once

#include <cmath>

namespace relqm::detail {

// Neumaier summation.
template <class T>
struct CompensatedSum {
  T sum = 0;
  T carry = 0;
  void add(T x) {
    const T t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  T value() const { return sum + carry; }
};

}  // namespace relqm::detail
