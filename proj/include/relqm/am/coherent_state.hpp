#pragma once

#include <Eigen/Dense>

#include "relqm/am/half_int.hpp"

namespace relqm {

enum class Axis { x, z };

/// Amplitudes of the maximal-projection state |J,J> along `axis`, expanded in
/// the J_z basis ordered m = J..-J. Along x this is the binomial profile
/// 2^{-J} C(2J, J+m)^{1/2}, evaluated in the log domain.
Eigen::VectorXd coherent_state_amplitudes(HalfInt J, Axis axis);

}  // namespace relqm
