#include "relqm/maps/channels.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>

#include "relqm/errors.hpp"

namespace relqm {

IrrepDecomposition::IrrepDecomposition(RecouplingMap map, std::vector<IrrepSector> sectors)
    : map_(std::move(map)), sectors_(std::move(sectors)) {
  int total = 0;
  for (const auto& s : sectors_) total += s.m_dim * s.n_mult;
  if (total != map_.source().dimension()) {
    throw DimensionError("IrrepDecomposition: sectors do not cover the space");
  }
}

int IrrepDecomposition::find(HalfInt J) const {
  for (std::size_t k = 0; k < sectors_.size(); ++k)
    if (sectors_[k].J == J) return static_cast<int>(k);
  return -1;
}

Eigen::MatrixXd IrrepDecomposition::isometry(int k) const {
  const IrrepSector& s = sectors_.at(static_cast<std::size_t>(k));
  const Eigen::MatrixXd u(map_.matrix());
  Eigen::MatrixXd out(u.rows(), s.m_dim * s.n_mult);
  for (int p = 0; p < s.n_mult; ++p) out.middleCols(p * s.m_dim, s.m_dim) = u.middleCols(s.offsets[p], s.m_dim);
  return out;
}

CouplingTree sequential_tree(const ParticleSystem& sys) {
  if (sys.size() == 0) throw DomainError("sequential_tree: empty system");
  CouplingTree t = CouplingTree::leaf(sys.particles().front().label);
  for (std::size_t k = 1; k < sys.size(); ++k) t = CouplingTree::join(t, CouplingTree::leaf(sys.particles()[k].label));
  return t;
}

IrrepDecomposition decompose_su2(const ParticleSystem& sys) { return decompose_su2(sys, sequential_tree(sys)); }

IrrepDecomposition decompose_su2(const ParticleSystem& sys, const CouplingTree& tree) {
  if (sys.dimension() > kMaxDenseDimension) {
    throw DimensionError("decompose_su2: dimension " + std::to_string(sys.dimension()) + " exceeds the dense bound");
  }
  auto leaves = tree.leaves();
  if (leaves.size() != sys.size()) throw DomainError("decompose_su2: tree must cover every particle");
  RecouplingMap map = couple_tree(sys, tree);
  const Factor& f = map.target().factor(0);
  std::map<int, IrrepSector, std::greater<>> by_j;
  for (int k = 0; k < f.irrep_count(); ++k) {
    const HalfInt J = f.irrep_spin(k);
    IrrepSector& s = by_j[J.twice()];
    s.J = J;
    s.m_dim = J.multiplicity();
    s.n_mult += 1;
    s.paths.push_back(f.irrep_path(k));
    s.offsets.push_back(f.irrep_offset(k));
  }
  std::vector<IrrepSector> sectors;
  for (auto& [twice, s] : by_j) sectors.push_back(std::move(s));
  return IrrepDecomposition(std::move(map), std::move(sectors));
}

double PhysicalState::total_probability() const {
  double t = 0.0;
  for (const auto& s : sectors) t += s.probability;
  return t;
}

const PhysicalSector* PhysicalState::find(HalfInt J) const {
  for (const auto& s : sectors)
    if (s.J == J) return &s;
  return nullptr;
}

void PhysicalState::validate() const {
  if (std::abs(total_probability() - 1.0) > 1e-10) {
    throw StateError("PhysicalState: probabilities sum to " + std::to_string(total_probability()));
  }
  for (const auto& s : sectors) {
    if (s.probability < 0.0) throw StateError("PhysicalState: negative sector probability");
    const auto n = static_cast<Eigen::Index>(s.paths.size());
    if (s.state.rows() != n || s.state.cols() != n) throw StateError("PhysicalState: sector state has wrong size");
    if ((s.state - s.state.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw StateError("PhysicalState: sector state not Hermitian");
    if (std::abs(s.state.trace().real() - 1.0) > 1e-10) throw StateError("PhysicalState: sector state trace != 1");
    const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(s.state, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    if (lo < -1e-10) throw StateError("PhysicalState: sector state not positive");
  }
}

PhysicalState rotation_twirl(const DensityOperator& rho, const IrrepDecomposition& dec) {
  if (!(rho.basis() == dec.basis())) throw DomainError("rotation_twirl: state and decomposition differ in basis");
  const Eigen::MatrixXcd rc = dec.map().to_target(rho.matrix());
  PhysicalState ps;
  for (const IrrepSector& s : dec.sectors()) {
    Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(s.n_mult, s.n_mult);
    for (int a = 0; a < s.n_mult; ++a)
      for (int b = 0; b < s.n_mult; ++b)
        block(a, b) = rc.block(s.offsets[a], s.offsets[b], s.m_dim, s.m_dim).trace();
    const double p = block.trace().real();
    if (p < kSectorPruneThreshold) continue;
    block /= p;
    block = 0.5 * (block + block.adjoint()).eval();
    ps.sectors.push_back(PhysicalSector{s.J, p, s.paths, std::move(block)});
  }
  return ps;
}

DensityOperator embed(const PhysicalState& ps, const IrrepDecomposition& dec) {
  const int dim = dec.basis().dimension();
  Eigen::MatrixXcd rc = Eigen::MatrixXcd::Zero(dim, dim);
  for (const PhysicalSector& phys : ps.sectors) {
    const int k = dec.find(phys.J);
    if (k < 0) throw DomainError("embed: sector J=" + phys.J.str() + " absent from the decomposition");
    const IrrepSector& s = dec.sectors()[static_cast<std::size_t>(k)];
    // A sector may carry a subset of the copies (after conditioning).
    std::vector<int> where;
    for (const CouplingPath& p : phys.paths) {
      const auto it = std::find(s.paths.begin(), s.paths.end(), p);
      if (it == s.paths.end()) throw DomainError("embed: multiplicity label absent from the decomposition");
      where.push_back(s.offsets[static_cast<std::size_t>(it - s.paths.begin())]);
    }
    const double w = phys.probability / s.m_dim;
    for (std::size_t a = 0; a < where.size(); ++a)
      for (std::size_t b = 0; b < where.size(); ++b)
        for (int q = 0; q < s.m_dim; ++q)
          rc(where[a] + q, where[b] + q) = w * phys.state(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  return DensityOperator::from_channel_output(dec.basis(), dec.map().to_source(rc));
}

DensityOperator twirl(const DensityOperator& rho, const IrrepDecomposition& dec) {
  return embed(rotation_twirl(rho, dec), dec);
}

DensityOperator rotation_twirl_oracle(const DensityOperator& rho, int resolution) {
  if (resolution < 8) throw DomainError("rotation_twirl_oracle: resolution must be at least 8");
  const BasisDescriptor& basis = rho.basis();
  const int dim = basis.dimension();
  const Eigen::VectorXd jz = total_jz(basis);
  const double two_pi = 2.0 * std::numbers::pi;

  // Average of exp(-i phi J_z) X exp(i phi J_z) over the trapezoid nodes.
  auto z_average = [&](const Eigen::MatrixXcd& x) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (int k = 0; k < resolution; ++k) {
      const double phi = two_pi * k / resolution;
      for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) out(i, j) += x(i, j) * std::polar(1.0, -phi * (jz(i) - jz(j)));
    }
    return Eigen::MatrixXcd(out / resolution);
  };

  // The product rule factorizes: gamma innermost, then beta, then alpha.
  const Eigen::MatrixXcd after_gamma = z_average(rho.matrix());
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
      gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(resolution)), &gsl_integration_glfixed_table_free);
  Eigen::MatrixXcd after_beta = Eigen::MatrixXcd::Zero(dim, dim);
  for (int k = 0; k < resolution; ++k) {
    double x = 0.0, w = 0.0;
    gsl_integration_glfixed_point(-1.0, 1.0, static_cast<std::size_t>(k), &x, &w, table.get());
    const Eigen::MatrixXcd r = rotation_y(basis, std::acos(x)).cast<std::complex<double>>();
    after_beta += (0.5 * w) * (r * after_gamma * r.adjoint());
  }
  return DensityOperator::from_channel_output(basis, z_average(after_beta));
}

bool gaps_commensurate(const Eigen::VectorXd& energies, double period, double tol) {
  for (Eigen::Index i = 0; i < energies.size(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double cycles = (energies(i) - energies(j)) * period / (2.0 * std::numbers::pi);
      if (std::abs(cycles - std::round(cycles)) > tol * std::max(1.0, std::abs(cycles))) return false;
    }
  }
  return true;
}

namespace {

// Level index per eigenvalue; eigenvalues need not be sorted.
std::vector<int> group_levels(const Eigen::VectorXd& e, double rel_tol) {
  const double scale = std::max(1.0, e.cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(e.size()));
  for (Eigen::Index i = 0; i < e.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return e(a) < e(b); });
  std::vector<int> level(static_cast<std::size_t>(e.size()));
  int cur = -1;
  double anchor = 0.0;
  for (Eigen::Index i : order) {
    if (cur < 0 || e(i) - anchor > rel_tol * scale) {
      ++cur;
      anchor = e(i);
    }
    level[static_cast<std::size_t>(i)] = cur;
  }
  return level;
}

void check_strict(const Eigen::VectorXd& e, const TimeAverageOptions& opts) {
  if (opts.mode != TimeAverageMode::strict_period) return;
  if (!(opts.period > 0.0)) throw DomainError("time_average: strict_period needs a positive period");
  if (!gaps_commensurate(e, opts.period)) {
    throw IncommensurateSpectrumError("time_average: spectrum gaps are not multiples of 2 pi / T");
  }
}

}  // namespace

DensityOperator time_average_diagonal(const DensityOperator& rho, const Eigen::VectorXd& energies,
                                      const TimeAverageOptions& opts) {
  if (energies.size() != rho.dimension()) throw DimensionError("time_average: energy vector has wrong length");
  check_strict(energies, opts);
  const std::vector<int> level = group_levels(energies, opts.degeneracy_tol);
  Eigen::MatrixXcd out = rho.matrix();
  for (int j = 0; j < rho.dimension(); ++j)
    for (int i = 0; i < rho.dimension(); ++i)
      if (level[static_cast<std::size_t>(i)] != level[static_cast<std::size_t>(j)]) out(i, j) = 0.0;
  return DensityOperator::from_channel_output(rho.basis(), std::move(out));
}

DensityOperator time_average(const DensityOperator& rho, const Eigen::MatrixXcd& H, const TimeAverageOptions& opts) {
  if (H.rows() != rho.dimension() || H.cols() != rho.dimension()) {
    throw DimensionError("time_average: Hamiltonian has wrong shape");
  }
  if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, H.cwiseAbs().maxCoeff())) {
    throw DomainError("time_average: Hamiltonian is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (H + H.adjoint()));
  const Eigen::MatrixXcd& v = es.eigenvectors();
  const Eigen::MatrixXcd in_eig = v.adjoint() * rho.matrix() * v;
  const DensityOperator diag = time_average_diagonal(
      DensityOperator::from_channel_output(rho.basis(), in_eig), es.eigenvalues(), opts);
  return DensityOperator::from_channel_output(rho.basis(), v * diag.matrix() * v.adjoint());
}

PhysicalState extract_noiseless(const PhysicalState& ps) {
  ps.validate();
  return ps;
}

ConditionalResult conditional_update(const PhysicalState& ps, const SectorSelector& select) {
  ConditionalResult res;
  for (const PhysicalSector& s : ps.sectors) {
    std::vector<int> keep;
    for (std::size_t a = 0; a < s.paths.size(); ++a)
      if (select(s.J, s.paths[a])) keep.push_back(static_cast<int>(a));
    if (keep.empty()) continue;
    const auto n = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXcd sub(n, n);
    std::vector<CouplingPath> paths;
    for (Eigen::Index a = 0; a < n; ++a) {
      paths.push_back(s.paths[static_cast<std::size_t>(keep[a])]);
      for (Eigen::Index b = 0; b < n; ++b) sub(a, b) = s.state(keep[a], keep[b]);
    }
    const double w = s.probability * sub.trace().real();
    if (w < kSectorPruneThreshold) continue;
    res.probability += w;
    res.state.sectors.push_back(PhysicalSector{s.J, w, std::move(paths), sub / sub.trace().real()});
  }
  if (res.probability < kSectorPruneThreshold) {
    throw NullEventError("conditional_update: selected event has probability " + std::to_string(res.probability));
  }
  for (auto& s : res.state.sectors) s.probability /= res.probability;
  return res;
}

}  // namespace relqm
