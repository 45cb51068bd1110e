#pragma once

#include "relqm/am/half_int.hpp"

namespace relqm {

/// Largest spin label any angular-momentum kernel will evaluate.
inline constexpr int kMaxTwiceSpin = 2000;

/// <j1 m1; j2 m2 | J M>
struct CGQuery {
  HalfInt j1, m1, j2, m2, J, M;
};

/// Clebsch-Gordan coefficient in the Condon-Shortley convention.
///
/// Returns exactly 0.0 when the triangle rule, M = m1 + m2 or |M| <= J fails;
/// throws DomainError when m1 or m2 is not a projection of its j (or M has the
/// wrong parity for J), and AccuracyError when
/// a spin exceeds 1000 or the Racah sum cancels below 1e-12 absolute accuracy.
double clebsch_gordan(const CGQuery& q);

inline double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J,
                             HalfInt M) {
  return clebsch_gordan(CGQuery{j1, m1, j2, m2, J, M});
}

/// |C(S,s; G,G; G+s, G+s)|^2, the weight of the aligned coupling of a spin-S
/// system against a gyroscope |G,G>. Requires G >= S.
double cg_limit_parallel(HalfInt S, HalfInt s, HalfInt G);

/// |C(S,s+Delta; M,M-Delta; M+s, M+s)|^2 for the magnet identity.
double cg_limit_magnet(HalfInt S, HalfInt s, HalfInt Delta, HalfInt M);

}  // namespace relqm
