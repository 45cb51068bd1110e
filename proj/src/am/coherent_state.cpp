#include "relqm/am/coherent_state.hpp"

#include <cmath>
#include <numbers>

#include "relqm/am/clebsch_gordan.hpp"
#include "relqm/am/log_factorial.hpp"
#include "relqm/errors.hpp"

namespace relqm {

Eigen::VectorXd coherent_state_amplitudes(HalfInt J, Axis axis) {
  require_spin(J, "coherent_state_amplitudes");
  if (J.twice() > kMaxTwiceSpin) {
    throw AccuracyError("coherent_state_amplitudes: spin exceeds 1000");
  }
  const int n = J.multiplicity();
  Eigen::VectorXd amp = Eigen::VectorXd::Zero(n);
  if (axis == Axis::z) {
    amp(0) = 1.0;
    return amp;
  }
  const long double log_norm = 0.5L * J.twice() * std::numbers::ln2_v<long double>;
  for (int i = 0; i < n; ++i) {
    // m = J - i, so J + m = 2J - i
    const long double lb = detail::log_binomial_ld(J.twice(), J.twice() - i);
    amp(i) = static_cast<double>(std::exp(0.5L * lb - log_norm));
  }
  return amp;
}

}  // namespace relqm
