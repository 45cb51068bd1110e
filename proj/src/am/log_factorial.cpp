#include "relqm/am/log_factorial.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "relqm/errors.hpp"

namespace relqm {

namespace {

const std::vector<long double>& table() {
  static const std::vector<long double> t = [] {
    std::vector<long double> v(static_cast<std::size_t>(kLogFactorialCacheSize) + 1);
    int sign = 0;
    for (std::size_t n = 0; n < v.size(); ++n) {
      v[n] = ::lgammal_r(static_cast<long double>(n) + 1.0L, &sign);
    }
    return v;
  }();
  return t;
}

// Stirling series for ln Gamma(x); x > 6.5e4 here so four terms are far below
// long double resolution.
long double stirling(long double x) {
  const long double inv = 1.0L / x;
  const long double inv2 = inv * inv;
  const long double half_log_2pi = 0.918938533204672741780329736405617639861L;
  return (x - 0.5L) * std::log(x) - x + half_log_2pi +
         inv * (1.0L / 12 - inv2 * (1.0L / 360 - inv2 * (1.0L / 1260 - inv2 / 1680)));
}

}  // namespace

namespace detail {

long double log_factorial_ld(std::int64_t n) {
  if (n < 0) throw DomainError("log_factorial: negative argument " + std::to_string(n));
  if (n <= kLogFactorialCacheSize) return table()[static_cast<std::size_t>(n)];
  return stirling(static_cast<long double>(n) + 1.0L);
}

long double log_binomial_ld(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return -std::numeric_limits<long double>::infinity();
  return log_factorial_ld(n) - log_factorial_ld(k) - log_factorial_ld(n - k);
}

}  // namespace detail

double log_factorial(std::int64_t n) {
  return static_cast<double>(detail::log_factorial_ld(n));
}

double log_binomial(std::int64_t n, std::int64_t k) {
  return static_cast<double>(detail::log_binomial_ld(n, k));
}

}  // namespace relqm
