#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "relqm/composite/basis.hpp"
#include "relqm/composite/recoupling.hpp"

namespace relqm {

/// Largest dimension handled with dense matrices.
inline constexpr int kMaxDenseDimension = 4096;

/// Hermitian, positive semidefinite, unit-trace matrix over a labelled basis.
/// Immutable; every operation returns a new value.
class DensityOperator {
 public:
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kTraceTol = 1e-10;
  static constexpr double kPositivityTol = 1e-10;
  static constexpr double kDriftTol = 1e-8;

  /// Full validation (Hermiticity, trace, spectrum). Throws StateError.
  DensityOperator(BasisDescriptor basis, Eigen::MatrixXcd matrix);

  /// For results of trace-preserving maps applied to a valid state: the matrix
  /// is re-symmetrized and renormalized, and drift beyond kDriftTol in either
  /// is reported as StateError. Positivity is not re-checked.
  static DensityOperator from_channel_output(BasisDescriptor basis, Eigen::MatrixXcd matrix);

  const BasisDescriptor& basis() const { return basis_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  int dimension() const { return static_cast<int>(matrix_.rows()); }

  /// Diagonal in the current basis.
  Eigen::VectorXd populations() const { return matrix_.diagonal().real(); }

 private:
  struct Trusted {};
  DensityOperator(Trusted, BasisDescriptor basis, Eigen::MatrixXcd matrix)
      : basis_(std::move(basis)), matrix_(std::move(matrix)) {}

  BasisDescriptor basis_;
  Eigen::MatrixXcd matrix_;
};

/// |psi><psi| in the product basis of `sys`.
DensityOperator pure_state(const ParticleSystem& sys, const Eigen::VectorXcd& amplitudes);
DensityOperator pure_state(const BasisDescriptor& basis, const Eigen::VectorXcd& amplitudes);

DensityOperator apply_unitary(const DensityOperator& rho, const Eigen::MatrixXcd& u);

/// Re Tr(rho O).
double expectation(const DensityOperator& rho, const Eigen::MatrixXcd& observable);

/// Change of basis along a recoupling map, in either direction.
DensityOperator to_target(const DensityOperator& rho, const RecouplingMap& map);
DensityOperator to_source(const DensityOperator& rho, const RecouplingMap& map);

/// Traces out the named particles. Each must form an uncoupled factor, or be
/// part of a coupled factor whose labels are all removed; DomainError
/// otherwise.
DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& labels);

/// 1/2 || a - b ||_1 over the same basis.
double trace_distance(const DensityOperator& a, const DensityOperator& b);

struct SpinOperators {
  Eigen::MatrixXcd x, y, z;
  Eigen::MatrixXcd squared() const { return x * x + y * y + z * z; }
};

/// Components of the spin of the particles `labels` (all when empty) in
/// `basis`. Each factor must lie entirely inside or outside the set.
SpinOperators spin_operators(const BasisDescriptor& basis, const std::vector<std::string>& labels = {});

/// Total J_z eigenvalues per basis index (the basis is always J_z diagonal).
Eigen::VectorXd total_jz(const BasisDescriptor& basis);

/// exp(-i beta J_y) for the total spin, a real matrix in `basis`.
Eigen::MatrixXd rotation_y(const BasisDescriptor& basis, double beta);

}  // namespace relqm
