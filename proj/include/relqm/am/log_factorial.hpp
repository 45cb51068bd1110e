#pragma once

#include <cstdint>

namespace relqm {

/// ln(n!) for n >= 0. Table-backed up to kLogFactorialCacheSize, asymptotic
/// series beyond. Throws DomainError for negative n.
double log_factorial(std::int64_t n);

/// ln C(n, k); -inf when k is outside [0, n].
double log_binomial(std::int64_t n, std::int64_t k);

inline constexpr std::int64_t kLogFactorialCacheSize = 1 << 16;

namespace detail {
// Extended-precision variants used inside the Racah and binomial sums.
long double log_factorial_ld(std::int64_t n);
long double log_binomial_ld(std::int64_t n, std::int64_t k);
}  // namespace detail

}  // namespace relqm
