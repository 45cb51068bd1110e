#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <string_view>

#include "relqm/composite/basis.hpp"

namespace relqm {

/// Real orthogonal change of basis. Column t of matrix() is target basis
/// vector t written in the source basis, so psi_source = U psi_target.
class RecouplingMap {
 public:
  RecouplingMap(BasisDescriptor source, BasisDescriptor target, Eigen::SparseMatrix<double> u);

  const BasisDescriptor& source() const { return source_; }
  const BasisDescriptor& target() const { return target_; }
  const Eigen::SparseMatrix<double>& matrix() const { return u_; }

  Eigen::VectorXcd to_target(const Eigen::VectorXcd& psi_source) const;
  Eigen::VectorXcd to_source(const Eigen::VectorXcd& psi_target) const;
  Eigen::MatrixXcd to_target(const Eigen::MatrixXcd& rho_source) const;
  Eigen::MatrixXcd to_source(const Eigen::MatrixXcd& rho_target) const;

  /// max |U^T U - 1|
  double orthogonality_defect() const;

 private:
  BasisDescriptor source_, target_;
  Eigen::SparseMatrix<double> u_;
};

/// The identity map on a basis.
RecouplingMap identity_map(const BasisDescriptor& basis);

/// Couples the factors holding `label_a` and `label_b` into one factor
/// placed at the position of the first. DomainError on unknown labels or when
/// both labels already share a factor.
RecouplingMap couple_pair(const BasisDescriptor& basis, std::string_view label_a, std::string_view label_b);

/// `first` then `second`; requires second.source() == first.target().
RecouplingMap compose(const RecouplingMap& first, const RecouplingMap& second);

/// Applies couple_pair bottom-up along `tree`. Every leaf of the tree must be
/// an uncoupled factor of `basis`.
RecouplingMap couple_tree(const BasisDescriptor& basis, const CouplingTree& tree);

inline RecouplingMap couple_tree(const ParticleSystem& sys, const CouplingTree& tree) {
  return couple_tree(BasisDescriptor::product(sys), tree);
}

}  // namespace relqm
