#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "relqm/am/half_int.hpp"

namespace relqm {

struct Particle {
  std::string label;
  HalfInt spin;
};

/// Ordered list of labelled spins; the first particle is the slowest index of
/// the product basis.
class ParticleSystem {
 public:
  static constexpr std::int64_t kDefaultDimensionLimit = std::int64_t{1} << 22;

  ParticleSystem() = default;
  explicit ParticleSystem(std::vector<Particle> particles,
                          std::int64_t dimension_limit = kDefaultDimensionLimit);

  const std::vector<Particle>& particles() const { return particles_; }
  std::size_t size() const { return particles_.size(); }
  std::int64_t dimension() const { return dimension_; }

  /// Position of `label`, DomainError if absent.
  std::size_t index_of(std::string_view label) const;
  const Particle& at(std::string_view label) const { return particles_[index_of(label)]; }

 private:
  std::vector<Particle> particles_;
  std::int64_t dimension_ = 1;
};

/// Binary coupling tree over particle labels, e.g. "((S,M),((C,N),G))".
class CouplingTree {
 public:
  static CouplingTree leaf(std::string label);
  static CouplingTree join(CouplingTree left, CouplingTree right);

  /// Accepts a label or "(tree,tree)"; blanks are ignored. Throws DomainError.
  static CouplingTree parse(std::string_view text);

  bool is_leaf() const { return left_ == nullptr; }
  const std::string& label() const { return label_; }
  const CouplingTree& left() const { return *left_; }
  const CouplingTree& right() const { return *right_; }

  /// Leaf labels, left to right.
  std::vector<std::string> leaves() const;
  /// Number of internal (coupling) nodes.
  int internal_nodes() const;
  std::string str() const;

  friend bool operator==(const CouplingTree& a, const CouplingTree& b) { return a.str() == b.str(); }

 private:
  std::string label_;
  std::shared_ptr<const CouplingTree> left_, right_;
};

/// One tensor factor of a basis: either a bare particle (states |j m>,
/// m descending) or a set of particles coupled along a tree. A coupled factor
/// is a direct sum of irreps, each identified by the spins of the internal
/// nodes (post-order, root last) and spanning 2J+1 states with M descending.
class Factor {
 public:
  static Factor particle(const Particle& p);
  static Factor coupled(const Factor& a, const Factor& b);

  const CouplingTree& tree() const { return tree_; }
  bool is_leaf() const { return tree_.is_leaf(); }
  std::vector<std::string> labels() const { return tree_.leaves(); }
  const std::vector<HalfInt>& leaf_spins() const { return leaf_spins_; }

  int dimension() const { return dimension_; }
  int irrep_count() const { return static_cast<int>(irreps_.size()); }

  /// Internal-node spins of irrep k (empty for a bare particle).
  const std::vector<HalfInt>& irrep_path(int k) const { return irreps_[k].path; }
  HalfInt irrep_spin(int k) const { return irreps_[k].spin; }
  int irrep_offset(int k) const { return irreps_[k].offset; }
  /// For a coupled factor, the irreps of the two children it came from.
  std::pair<int, int> irrep_parents(int k) const { return {irreps_[k].left, irreps_[k].right}; }

  /// Irrep index and projection of a state.
  int irrep_of_state(int state) const { return state_irrep_[state]; }
  HalfInt m_of_state(int state) const;

  friend bool operator==(const Factor& a, const Factor& b) {
    return a.tree_ == b.tree_ && a.leaf_spins_ == b.leaf_spins_;
  }

 private:
  struct Irrep {
    std::vector<HalfInt> path;
    HalfInt spin;
    int offset = 0;
    int left = -1, right = -1;
  };
  CouplingTree tree_;
  std::vector<HalfInt> leaf_spins_;
  std::vector<Irrep> irreps_;
  std::vector<int> state_irrep_;
  int dimension_ = 0;

  void finalize();
};

/// Ordered list of factors; global index is mixed-radix with factor 0
/// slowest.
class BasisDescriptor {
 public:
  BasisDescriptor() = default;
  explicit BasisDescriptor(std::vector<Factor> factors);
  static BasisDescriptor product(const ParticleSystem& sys);

  const std::vector<Factor>& factors() const { return factors_; }
  const Factor& factor(std::size_t k) const { return factors_[k]; }
  std::size_t factor_count() const { return factors_.size(); }
  int dimension() const { return dimension_; }
  bool is_product() const;

  /// Factor containing `label`, DomainError if none.
  std::size_t factor_of(std::string_view label) const;

  int stride(std::size_t k) const { return strides_[k]; }
  int local_index(int global, std::size_t k) const {
    return (global / strides_[k]) % factors_[k].dimension();
  }

  /// Human-readable ket label, e.g. "|S:1/2 G:-3/2>" or "|(S,G) J=2 M=1>".
  std::string describe(int index) const;

  friend bool operator==(const BasisDescriptor& a, const BasisDescriptor& b) {
    return a.factors_ == b.factors_;
  }

 private:
  std::vector<Factor> factors_;
  std::vector<int> strides_;
  int dimension_ = 1;
};

}  // namespace relqm
