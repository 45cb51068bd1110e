#pragma once

#include <Eigen/Dense>

#include "relqm/am/half_int.hpp"

namespace relqm {

/// d^j_{m,m'}(beta) = <j m| exp(-i beta J_y) |j m'>
struct WignerDQuery {
  HalfInt j, m, mprime;
  double beta = 0.0;
};

/// Real Wigner small-d matrix for one spin, rows and columns ordered m = j..-j.
class WignerSmallD {
 public:
  WignerSmallD(HalfInt j, double beta, Eigen::MatrixXd values)
      : j_(j), beta_(beta), values_(std::move(values)) {}

  HalfInt spin() const { return j_; }
  double beta() const { return beta_; }
  const Eigen::MatrixXd& matrix() const { return values_; }

  double operator()(HalfInt m, HalfInt mprime) const {
    return values_((j_.twice() - m.twice()) / 2, (j_.twice() - mprime.twice()) / 2);
  }

 private:
  HalfInt j_;
  double beta_;
  Eigen::MatrixXd values_;
};

/// Single element. Costs O(j): one column of the three-term recursion.
double wigner_small_d(const WignerDQuery& q);

/// Column d^j_{., m'}(beta), ordered m = j..-j.
Eigen::VectorXd wigner_small_d_column(HalfInt j, HalfInt mprime, double beta);

/// Full (2j+1)x(2j+1) matrix.
WignerSmallD wigner_small_d_matrix(HalfInt j, double beta);

/// Full complex D^j_{m,m'}(alpha, beta, gamma) = e^{-i m alpha} d^j_{m,m'}(beta)
/// e^{-i m' gamma} (z-y-z Euler angles), same ordering.
Eigen::MatrixXcd wigner_big_d_matrix(HalfInt j, double alpha, double beta, double gamma);

}  // namespace relqm
