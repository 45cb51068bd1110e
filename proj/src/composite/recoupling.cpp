#include "relqm/composite/recoupling.hpp"

#include <algorithm>
#include <vector>

#include "relqm/am/clebsch_gordan.hpp"
#include "relqm/errors.hpp"

namespace relqm {

RecouplingMap::RecouplingMap(BasisDescriptor source, BasisDescriptor target, Eigen::SparseMatrix<double> u)
    : source_(std::move(source)), target_(std::move(target)), u_(std::move(u)) {
  if (u_.rows() != source_.dimension() || u_.cols() != target_.dimension()) {
    throw DimensionError("RecouplingMap: matrix shape does not match the bases");
  }
  u_.makeCompressed();
}

Eigen::VectorXcd RecouplingMap::to_target(const Eigen::VectorXcd& psi) const {
  if (psi.size() != u_.rows()) throw DimensionError("RecouplingMap::to_target: dimension mismatch");
  return u_.transpose().cast<std::complex<double>>() * psi;
}

Eigen::VectorXcd RecouplingMap::to_source(const Eigen::VectorXcd& psi) const {
  if (psi.size() != u_.cols()) throw DimensionError("RecouplingMap::to_source: dimension mismatch");
  return u_.cast<std::complex<double>>() * psi;
}

Eigen::MatrixXcd RecouplingMap::to_target(const Eigen::MatrixXcd& rho) const {
  if (rho.rows() != u_.rows() || rho.cols() != u_.rows()) {
    throw DimensionError("RecouplingMap::to_target: dimension mismatch");
  }
  const Eigen::SparseMatrix<std::complex<double>> uc = u_.cast<std::complex<double>>();
  const Eigen::MatrixXcd tmp = uc.transpose() * rho;
  return (uc.transpose() * tmp.adjoint()).adjoint();
}

Eigen::MatrixXcd RecouplingMap::to_source(const Eigen::MatrixXcd& rho) const {
  if (rho.rows() != u_.cols() || rho.cols() != u_.cols()) {
    throw DimensionError("RecouplingMap::to_source: dimension mismatch");
  }
  const Eigen::SparseMatrix<std::complex<double>> uc = u_.cast<std::complex<double>>();
  const Eigen::MatrixXcd tmp = uc * rho;
  return (uc * tmp.adjoint()).adjoint();
}

double RecouplingMap::orthogonality_defect() const {
  Eigen::SparseMatrix<double> id(u_.cols(), u_.cols());
  id.setIdentity();
  const Eigen::SparseMatrix<double> d = Eigen::SparseMatrix<double>(u_.transpose() * u_) - id;
  double worst = 0.0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

RecouplingMap identity_map(const BasisDescriptor& basis) {
  Eigen::SparseMatrix<double> id(basis.dimension(), basis.dimension());
  id.setIdentity();
  return RecouplingMap(basis, basis, std::move(id));
}

RecouplingMap couple_pair(const BasisDescriptor& basis, std::string_view label_a, std::string_view label_b) {
  const std::size_t fa = basis.factor_of(label_a);
  const std::size_t fb = basis.factor_of(label_b);
  if (fa == fb) {
    throw DomainError("couple_pair: '" + std::string(label_a) + "' and '" + std::string(label_b) +
                      "' are already coupled");
  }
  const Factor& A = basis.factor(fa);
  const Factor& B = basis.factor(fb);
  Factor AB = Factor::coupled(A, B);

  std::vector<Factor> out;
  std::vector<std::size_t> origin;  // source factor for each target factor (fa for AB)
  for (std::size_t k = 0; k < basis.factor_count(); ++k) {
    if (k == fb) continue;
    out.push_back(k == fa ? AB : basis.factor(k));
    origin.push_back(k);
  }
  BasisDescriptor target(std::move(out));
  const std::size_t pos_ab = static_cast<std::size_t>(std::find(origin.begin(), origin.end(), fa) - origin.begin());

  // The map is the identity on spectator factors, so build the AB block once
  // and replicate it over the spectator indices.
  struct Entry {
    int a_state, b_state, ab_state;
    double value;
  };
  std::vector<Entry> block;
  for (int k = 0; k < AB.irrep_count(); ++k) {
    const auto [ka, kb] = AB.irrep_parents(k);
    const HalfInt ja = A.irrep_spin(ka), jb = B.irrep_spin(kb), J = AB.irrep_spin(k);
    for (int q = 0; q < J.multiplicity(); ++q) {
      const HalfInt M = HalfInt::from_twice(J.twice() - 2 * q);
      for (int qa = 0; qa < ja.multiplicity(); ++qa) {
        const HalfInt ma = HalfInt::from_twice(ja.twice() - 2 * qa);
        const HalfInt mb = M - ma;
        if (!is_projection_of(mb, jb)) continue;
        const double c = clebsch_gordan(ja, ma, jb, mb, J, M);
        if (c == 0.0) continue;
        const int qb = (jb.twice() - mb.twice()) / 2;
        block.push_back({A.irrep_offset(ka) + qa, B.irrep_offset(kb) + qb, AB.irrep_offset(k) + q, c});
      }
    }
  }

  const int dim = basis.dimension();
  const int spectators = dim / (A.dimension() * B.dimension());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(block.size() * static_cast<std::size_t>(spectators));
  // Enumerate spectator configurations through the target basis with the AB
  // local index pinned to zero.
  for (int t0 = 0; t0 < target.dimension(); ++t0) {
    if (target.local_index(t0, pos_ab) != 0) continue;
    int s0 = 0;
    for (std::size_t k = 0; k < target.factor_count(); ++k) {
      if (k == pos_ab) continue;
      s0 += target.local_index(t0, k) * basis.stride(origin[k]);
    }
    for (const Entry& e : block) {
      const int s = s0 + e.a_state * basis.stride(fa) + e.b_state * basis.stride(fb);
      const int t = t0 + e.ab_state * target.stride(pos_ab);
      triplets.emplace_back(s, t, e.value);
    }
  }
  Eigen::SparseMatrix<double> u(dim, target.dimension());
  u.setFromTriplets(triplets.begin(), triplets.end());
  return RecouplingMap(basis, std::move(target), std::move(u));
}

RecouplingMap compose(const RecouplingMap& first, const RecouplingMap& second) {
  if (!(second.source() == first.target())) {
    throw DomainError("compose: second map does not start where the first ends");
  }
  Eigen::SparseMatrix<double> u = first.matrix() * second.matrix();
  u.prune(0.0);
  return RecouplingMap(first.source(), second.target(), std::move(u));
}

namespace {

RecouplingMap couple_rec(const RecouplingMap& so_far, const CouplingTree& node) {
  if (node.is_leaf()) {
    const std::size_t f = so_far.target().factor_of(node.label());
    if (!so_far.target().factor(f).is_leaf()) {
      throw DomainError("couple_tree: particle '" + node.label() + "' is already coupled");
    }
    return so_far;
  }
  RecouplingMap m = couple_rec(so_far, node.left());
  m = couple_rec(m, node.right());
  const std::string a = node.left().leaves().front();
  const std::string b = node.right().leaves().front();
  return compose(m, couple_pair(m.target(), a, b));
}

}  // namespace

RecouplingMap couple_tree(const BasisDescriptor& basis, const CouplingTree& tree) {
  return couple_rec(identity_map(basis), tree);
}

}  // namespace relqm
