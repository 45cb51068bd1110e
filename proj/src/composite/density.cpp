#include "relqm/composite/density.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "relqm/am/wigner_d.hpp"
#include "relqm/errors.hpp"

namespace relqm {

namespace {

void require_dense(int dim, const char* what) {
  if (dim > kMaxDenseDimension) {
    throw DimensionError(std::string(what) + ": dimension " + std::to_string(dim) + " exceeds the dense bound " +
                         std::to_string(kMaxDenseDimension));
  }
}

void require_square(const BasisDescriptor& basis, const Eigen::MatrixXcd& m, const char* what) {
  if (m.rows() != basis.dimension() || m.cols() != basis.dimension()) {
    throw DimensionError(std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", basis has dimension " + std::to_string(basis.dimension()));
  }
}

// Spin matrices of one irrep, basis m = j..-j.
void spin_block(HalfInt j, Eigen::MatrixXcd& x, Eigen::MatrixXcd& y, Eigen::MatrixXcd& z) {
  const int n = j.multiplicity();
  Eigen::MatrixXd plus = Eigen::MatrixXd::Zero(n, n);
  z = Eigen::MatrixXcd::Zero(n, n);
  const double jj = j.casimir();
  for (int i = 0; i < n; ++i) {
    const double m = j.value() - i;
    z(i, i) = m;
    if (i > 0) plus(i - 1, i) = std::sqrt(jj - m * (m + 1));
  }
  x = (0.5 * (plus + plus.transpose())).cast<std::complex<double>>();
  y = (std::complex<double>(0, -0.5) * (plus - plus.transpose()).cast<std::complex<double>>());
}

}  // namespace

DensityOperator::DensityOperator(BasisDescriptor basis, Eigen::MatrixXcd matrix)
    : basis_(std::move(basis)), matrix_(std::move(matrix)) {
  require_square(basis_, matrix_, "DensityOperator");
  require_dense(dimension(), "DensityOperator");
  const double herm = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kHermitianTol) throw StateError("DensityOperator: not Hermitian (defect " + std::to_string(herm) + ")");
  const double tr = matrix_.trace().real();
  if (std::abs(tr - 1.0) > kTraceTol) throw StateError("DensityOperator: trace " + std::to_string(tr) + " != 1");
  const Eigen::MatrixXcd sym = 0.5 * (matrix_ + matrix_.adjoint());
  const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (lo < -kPositivityTol) throw StateError("DensityOperator: negative eigenvalue " + std::to_string(lo));
  matrix_ = sym;
}

DensityOperator DensityOperator::from_channel_output(BasisDescriptor basis, Eigen::MatrixXcd matrix) {
  require_square(basis, matrix, "DensityOperator");
  const double herm = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  const double tr = matrix.trace().real();
  if (herm > kDriftTol || std::abs(tr - 1.0) > kDriftTol) {
    throw StateError("DensityOperator: drift beyond tolerance (hermiticity " + std::to_string(herm) + ", trace " +
                     std::to_string(tr) + ")");
  }
  Eigen::MatrixXcd sym = (0.5 / tr) * (matrix + matrix.adjoint());
  return DensityOperator(Trusted{}, std::move(basis), std::move(sym));
}

DensityOperator pure_state(const BasisDescriptor& basis, const Eigen::VectorXcd& amplitudes) {
  if (amplitudes.size() != basis.dimension()) {
    throw DimensionError("pure_state: " + std::to_string(amplitudes.size()) + " amplitudes for dimension " +
                         std::to_string(basis.dimension()));
  }
  require_dense(basis.dimension(), "pure_state");
  const double n = amplitudes.norm();
  if (std::abs(n - 1.0) > 1e-10) throw DomainError("pure_state: amplitude norm " + std::to_string(n) + " != 1");
  return DensityOperator::from_channel_output(basis, amplitudes * amplitudes.adjoint());
}

DensityOperator pure_state(const ParticleSystem& sys, const Eigen::VectorXcd& amplitudes) {
  return pure_state(BasisDescriptor::product(sys), amplitudes);
}

DensityOperator apply_unitary(const DensityOperator& rho, const Eigen::MatrixXcd& u) {
  require_square(rho.basis(), u, "apply_unitary");
  return DensityOperator::from_channel_output(rho.basis(), u * rho.matrix() * u.adjoint());
}

double expectation(const DensityOperator& rho, const Eigen::MatrixXcd& observable) {
  require_square(rho.basis(), observable, "expectation");
  // Tr(rho O) = sum_ij rho_ij O_ji
  return (rho.matrix().transpose().cwiseProduct(observable)).sum().real();
}

DensityOperator to_target(const DensityOperator& rho, const RecouplingMap& map) {
  if (!(rho.basis() == map.source())) throw DomainError("to_target: state is not in the map's source basis");
  return DensityOperator::from_channel_output(map.target(), map.to_target(rho.matrix()));
}

DensityOperator to_source(const DensityOperator& rho, const RecouplingMap& map) {
  if (!(rho.basis() == map.target())) throw DomainError("to_source: state is not in the map's target basis");
  return DensityOperator::from_channel_output(map.source(), map.to_source(rho.matrix()));
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& labels) {
  const BasisDescriptor& basis = rho.basis();
  std::set<std::string> drop(labels.begin(), labels.end());
  std::vector<bool> removed(basis.factor_count(), false);
  for (const auto& l : drop) {
    const std::size_t f = basis.factor_of(l);
    for (const auto& other : basis.factor(f).labels()) {
      if (!drop.count(other)) {
        throw DomainError("partial_trace: '" + l + "' is coupled to '" + other +
                          "' in this basis; uncouple before tracing");
      }
    }
    removed[f] = true;
  }
  std::vector<Factor> kept;
  for (std::size_t k = 0; k < basis.factor_count(); ++k)
    if (!removed[k]) kept.push_back(basis.factor(k));
  BasisDescriptor reduced(std::move(kept));

  // Split every global index into (kept, removed) sub-indices.
  const int dim = basis.dimension();
  std::vector<int> keep_idx(dim), drop_idx(dim);
  for (int i = 0; i < dim; ++i) {
    int kidx = 0, didx = 0;
    for (std::size_t k = 0; k < basis.factor_count(); ++k) {
      const int local = basis.local_index(i, k);
      if (removed[k]) {
        didx = didx * basis.factor(k).dimension() + local;
      } else {
        kidx = kidx * basis.factor(k).dimension() + local;
      }
    }
    keep_idx[i] = kidx;
    drop_idx[i] = didx;
  }
  const int dkeep = reduced.dimension();
  const int ddrop = dim / dkeep;
  std::vector<std::vector<int>> by_drop(ddrop);
  for (int i = 0; i < dim; ++i) by_drop[drop_idx[i]].push_back(i);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dkeep, dkeep);
  for (const auto& group : by_drop)
    for (int a : group)
      for (int b : group) out(keep_idx[a], keep_idx[b]) += rho.matrix()(a, b);
  return DensityOperator::from_channel_output(std::move(reduced), std::move(out));
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  if (!(a.basis() == b.basis())) throw DomainError("trace_distance: states live in different bases");
  const Eigen::MatrixXcd d = a.matrix() - b.matrix();
  const Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly).eigenvalues();
  return 0.5 * ev.cwiseAbs().sum();
}

SpinOperators spin_operators(const BasisDescriptor& basis, const std::vector<std::string>& labels) {
  const int dim = basis.dimension();
  require_dense(dim, "spin_operators");
  std::set<std::string> want(labels.begin(), labels.end());
  for (const auto& l : want) basis.factor_of(l);
  SpinOperators out{Eigen::MatrixXcd::Zero(dim, dim), Eigen::MatrixXcd::Zero(dim, dim),
                    Eigen::MatrixXcd::Zero(dim, dim)};
  for (std::size_t k = 0; k < basis.factor_count(); ++k) {
    const Factor& f = basis.factor(k);
    const auto ls = f.labels();
    const auto inside = std::count_if(ls.begin(), ls.end(), [&](const std::string& l) { return want.count(l) > 0; });
    if (!want.empty() && inside == 0) continue;
    if (!want.empty() && inside != static_cast<long>(ls.size())) {
      throw DomainError("spin_operators: factor " + f.tree().str() + " is only partly selected");
    }
    // Local operators of the factor, block diagonal over its irreps.
    const int n = f.dimension();
    Eigen::MatrixXcd fx = Eigen::MatrixXcd::Zero(n, n), fy = fx, fz = fx;
    for (int ir = 0; ir < f.irrep_count(); ++ir) {
      Eigen::MatrixXcd bx, by, bz;
      spin_block(f.irrep_spin(ir), bx, by, bz);
      const int o = f.irrep_offset(ir), m = f.irrep_spin(ir).multiplicity();
      fx.block(o, o, m, m) = bx;
      fy.block(o, o, m, m) = by;
      fz.block(o, o, m, m) = bz;
    }
    // Embed: the factor index is (i / stride) % n, spectators share the rest.
    const int stride = basis.stride(k);
    for (int i = 0; i < dim; ++i) {
      const int li = (i / stride) % n;
      const int base = i - li * stride;
      for (int lj = 0; lj < n; ++lj) {
        const int j = base + lj * stride;
        out.x(i, j) += fx(li, lj);
        out.y(i, j) += fy(li, lj);
        out.z(i, j) += fz(li, lj);
      }
    }
  }
  return out;
}

Eigen::VectorXd total_jz(const BasisDescriptor& basis) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.dimension());
  for (int i = 0; i < basis.dimension(); ++i)
    for (std::size_t k = 0; k < basis.factor_count(); ++k)
      out(i) += basis.factor(k).m_of_state(basis.local_index(i, k)).value();
  return out;
}

Eigen::MatrixXd rotation_y(const BasisDescriptor& basis, double beta) {
  require_dense(basis.dimension(), "rotation_y");
  Eigen::MatrixXd acc = Eigen::MatrixXd::Ones(1, 1);
  for (const Factor& f : basis.factors()) {
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(f.dimension(), f.dimension());
    for (int ir = 0; ir < f.irrep_count(); ++ir) {
      const int o = f.irrep_offset(ir), m = f.irrep_spin(ir).multiplicity();
      local.block(o, o, m, m) = wigner_small_d_matrix(f.irrep_spin(ir), beta).matrix();
    }
    Eigen::MatrixXd next(acc.rows() * local.rows(), acc.cols() * local.cols());
    for (int i = 0; i < acc.rows(); ++i)
      for (int j = 0; j < acc.cols(); ++j)
        next.block(i * local.rows(), j * local.cols(), local.rows(), local.cols()) = acc(i, j) * local;
    acc = std::move(next);
  }
  return acc;
}

}  // namespace relqm
