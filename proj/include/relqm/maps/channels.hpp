#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "relqm/composite/density.hpp"
#include "relqm/composite/recoupling.hpp"

namespace relqm {

/// Internal-node spins identifying one copy of an irrep (one basis vector of
/// the multiplicity space K_J). Post-order over the coupling tree, root last.
using CouplingPath = std::vector<HalfInt>;

/// One isotypic component H_J (x) K_J.
struct IrrepSector {
  HalfInt J;
  int m_dim = 0;  ///< 2J+1
  int n_mult = 0;  ///< number of copies
  std::vector<CouplingPath> paths;
  /// First coupled-basis row of each copy; the copy spans 2J+1 rows, M descending.
  std::vector<int> offsets;
};

/// H = sum_J H_J (x) K_J under the collective SU(2) action, realized by a
/// recoupling map from a product basis to a fully coupled tree.
class IrrepDecomposition {
 public:
  IrrepDecomposition(RecouplingMap map, std::vector<IrrepSector> sectors);

  const BasisDescriptor& basis() const { return map_.source(); }
  const RecouplingMap& map() const { return map_; }
  const std::vector<IrrepSector>& sectors() const { return sectors_; }
  const CouplingTree& tree() const { return map_.target().factor(0).tree(); }

  /// Index of the sector with spin J, or -1.
  int find(HalfInt J) const;

  /// Orthonormal columns (copy-major, M descending) spanning sector k, in the
  /// product basis.
  Eigen::MatrixXd isometry(int k) const;

 private:
  RecouplingMap map_;
  std::vector<IrrepSector> sectors_;
};

/// (((p1,p2),p3),...,pn)
CouplingTree sequential_tree(const ParticleSystem& sys);

/// Builds the decomposition by coupling along `tree` (sequential by default).
/// DimensionError when the system exceeds the dense bound.
IrrepDecomposition decompose_su2(const ParticleSystem& sys);
IrrepDecomposition decompose_su2(const ParticleSystem& sys, const CouplingTree& tree);

struct PhysicalSector {
  HalfInt J;
  double probability = 0.0;
  std::vector<CouplingPath> paths;
  Eigen::MatrixXcd state;  ///< unit trace on K_J, indexed like `paths`
};

/// rho_physical = sum_J p_J rho_J, the content of a twirled state once the
/// maximally mixed H_J factors are dropped.
struct PhysicalState {
  std::vector<PhysicalSector> sectors;

  double total_probability() const;
  /// Sector with spin J, or nullptr.
  const PhysicalSector* find(HalfInt J) const;
  /// Throws StateError unless probabilities sum to 1 and every rho_J is a
  /// valid density matrix.
  void validate() const;
};

/// Sectors with p_J below this are dropped.
inline constexpr double kSectorPruneThreshold = 1e-14;

/// Schur-lemma form of the SO(3) twirl: p_J = Tr P_J rho P_J and
/// rho_J = Tr_{H_J}(P_J rho P_J) / p_J.
PhysicalState rotation_twirl(const DensityOperator& rho, const IrrepDecomposition& dec);

/// sum_J p_J (1/m_J) (x) rho_J, back in the decomposition's product basis.
DensityOperator embed(const PhysicalState& ps, const IrrepDecomposition& dec);

/// embed(rotation_twirl(rho, dec), dec)
DensityOperator twirl(const DensityOperator& rho, const IrrepDecomposition& dec);

/// Haar average over Euler angles by product quadrature: trapezoid rules in
/// alpha and gamma and Gauss-Legendre in cos(beta), `resolution` nodes each.
/// Exact up to rounding once resolution >= 2 J_max + 1. DomainError below 8.
DensityOperator rotation_twirl_oracle(const DensityOperator& rho, int resolution);

enum class TimeAverageMode {
  full_dephasing,  ///< drop coherences between distinct energies
  strict_period,   ///< average over one period T; requires commensurate gaps
};

struct TimeAverageOptions {
  TimeAverageMode mode = TimeAverageMode::full_dephasing;
  double period = 0.0;  ///< T, strict_period only
  /// Eigenvalues closer than this (relative to the spectral radius, floor 1)
  /// are one level.
  double degeneracy_tol = 1e-9;
};

/// True when every gap times T / 2 pi is an integer to `tol`.
bool gaps_commensurate(const Eigen::VectorXd& energies, double period, double tol = 1e-8);

/// T(rho) for a Hermitian H given in rho's basis. IncommensurateSpectrumError
/// in strict mode when some gap is not a multiple of 2 pi / T.
DensityOperator time_average(const DensityOperator& rho, const Eigen::MatrixXcd& H,
                             const TimeAverageOptions& opts = {});

/// Same, for an H that is diagonal in rho's basis with the given energies.
DensityOperator time_average_diagonal(const DensityOperator& rho, const Eigen::VectorXd& energies,
                                      const TimeAverageOptions& opts = {});

/// Validates and returns the state; the sector list already holds only the
/// noiseless factors K_J.
PhysicalState extract_noiseless(const PhysicalState& ps);

using SectorSelector = std::function<bool(HalfInt J, const CouplingPath& path)>;

struct ConditionalResult {
  double probability = 0.0;
  PhysicalState state;
};

/// Von Neumann update P rho P / Tr(P rho) for the projector onto the selected
/// (J, path) labels. NullEventError when the probability is below 1e-14.
ConditionalResult conditional_update(const PhysicalState& ps, const SectorSelector& select);

}  // namespace relqm
