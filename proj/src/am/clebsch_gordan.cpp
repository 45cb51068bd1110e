#include "relqm/am/clebsch_gordan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "relqm/am/log_factorial.hpp"
#include "relqm/errors.hpp"
#include "detail/compensated_sum.hpp"

namespace relqm {

namespace {

using detail::log_factorial_ld;

// The Racah series alternates in sign.
using CompensatedSum = detail::CompensatedSum<long double>;

void require_in_range(HalfInt j, const char* what) {
  if (j.twice() > kMaxTwiceSpin) {
    throw AccuracyError(std::string(what) + ": spin " + j.str() +
                        " exceeds the supported maximum of 1000");
  }
}

}  // namespace

double clebsch_gordan(const CGQuery& q) {
  require_projection(q.m1, q.j1, "clebsch_gordan(j1,m1)");
  require_projection(q.m2, q.j2, "clebsch_gordan(j2,m2)");
  require_spin(q.J, "clebsch_gordan(J)");
  if ((q.J.twice() - q.M.twice()) % 2 != 0) {
    throw DomainError("clebsch_gordan: M=" + q.M.str() + " has the wrong parity for J=" + q.J.str());
  }
  require_in_range(q.j1, "clebsch_gordan");
  require_in_range(q.j2, "clebsch_gordan");
  require_in_range(q.J, "clebsch_gordan");

  if (q.m1 + q.m2 != q.M) return 0.0;
  if (!is_projection_of(q.M, q.J)) return 0.0;
  if (!satisfies_triangle(q.j1, q.j2, q.J)) return 0.0;

  // All factorial arguments below are integers because of the parity checks.
  const int j1 = q.j1.twice(), j2 = q.j2.twice(), J = q.J.twice();
  const int m1 = q.m1.twice(), m2 = q.m2.twice(), M = q.M.twice();
  const int a = (j1 + j2 - J) / 2;
  const int b = (j1 - j2 + J) / 2;
  const int c = (-j1 + j2 + J) / 2;
  const int j1mm1 = (j1 - m1) / 2;
  const int j2pm2 = (j2 + m2) / 2;
  const int s1 = (J - j2 + m1) / 2;  // may be negative
  const int s2 = (J - j1 - m2) / 2;  // may be negative

  const long double log_norm =
      0.5L * (std::log(static_cast<long double>(J + 1)) + log_factorial_ld(a) +
              log_factorial_ld(b) + log_factorial_ld(c) -
              log_factorial_ld((j1 + j2 + J) / 2 + 1) + log_factorial_ld((j1 + m1) / 2) +
              log_factorial_ld(j1mm1) + log_factorial_ld(j2pm2) +
              log_factorial_ld((j2 - m2) / 2) + log_factorial_ld((J + M) / 2) +
              log_factorial_ld((J - M) / 2));

  const int kmin = std::max({0, -s1, -s2});
  const int kmax = std::min({a, j1mm1, j2pm2});
  if (kmin > kmax) return 0.0;

  CompensatedSum sum;
  long double largest = 0.0L;
  for (int k = kmin; k <= kmax; ++k) {
    const long double log_den = log_factorial_ld(k) + log_factorial_ld(a - k) +
                                log_factorial_ld(j1mm1 - k) + log_factorial_ld(j2pm2 - k) +
                                log_factorial_ld(s1 + k) + log_factorial_ld(s2 + k);
    const long double term = std::exp(log_norm - log_den);
    largest = std::max(largest, term);
    sum.add(k % 2 == 0 ? term : -term);
  }

  // Each term carries a relative rounding error of a few long-double ulps;
  // cancellation turns that into an absolute error on the result.
  const long double error_bound = largest * (kmax - kmin + 1) * 8.0L *
                                  std::numeric_limits<long double>::epsilon();
  if (error_bound > 1e-12L) {
    throw AccuracyError("clebsch_gordan: Racah sum cancels beyond double accuracy for j1=" +
                        q.j1.str() + ", j2=" + q.j2.str() + ", J=" + q.J.str());
  }
  return static_cast<double>(sum.value());
}

double cg_limit_parallel(HalfInt S, HalfInt s, HalfInt G) {
  require_projection(s, S, "cg_limit_parallel(S,s)");
  require_spin(G, "cg_limit_parallel(G)");
  if (G < S) throw DomainError("cg_limit_parallel: requires G >= S");
  const double c = clebsch_gordan(S, s, G, G, G + s, G + s);
  return c * c;
}

double cg_limit_magnet(HalfInt S, HalfInt s, HalfInt Delta, HalfInt M) {
  require_projection(s + Delta, S, "cg_limit_magnet(S,s+Delta)");
  require_projection(M - Delta, M, "cg_limit_magnet(M,M-Delta)");
  const HalfInt total = M + s;
  require_spin(total, "cg_limit_magnet(M+s)");
  const double c = clebsch_gordan(S, s + Delta, M, M - Delta, total, total);
  return c * c;
}

}  // namespace relqm
