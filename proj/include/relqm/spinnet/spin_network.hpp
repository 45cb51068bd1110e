#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relqm/composite/basis.hpp"
#include "relqm/maps/channels.hpp"

namespace relqm {

enum class EdgeKind {
  fixed,          ///< particle spin, set once
  quantum,        ///< interior label, may be superposed
  superselected,  ///< total spin, mixtures only
};

/// Edge of a trivalent graph. `from` is the vertex the edge leaves and `to`
/// the vertex it enters; -1 marks a free end.
struct SpinEdge {
  std::string name;
  EdgeKind kind = EdgeKind::quantum;
  int from = -1;
  int to = -1;
  std::optional<HalfInt> j;  ///< set on fixed edges and on a resolved total edge
};

/// Intertwiner with two incoming edges coupled into one outgoing edge; its
/// map is the Clebsch-Gordan coefficient <a m_a; b m_b | c m_c>.
struct SpinVertex {
  int in_a = -1, in_b = -1, out = -1;
};

/// Labels of the interior edges (post-order, total last) and, for states that
/// still carry a frame, the total projection.
struct Assignment {
  std::vector<HalfInt> labels;
  std::optional<HalfInt> M;
  friend auto operator<=>(const Assignment&, const Assignment&) = default;
};

class SpinNetwork {
 public:
  /// One fixed free edge per particle, a quantum edge per intermediate
  /// coupling and a superselected total edge. DomainError unless the tree's
  /// leaves are exactly the particles of `sys`.
  static SpinNetwork from_coupling_tree(const ParticleSystem& sys, const CouplingTree& tree);

  /// Graph plus the amplitude of every admissible assignment (with M) of the
  /// product-basis state `psi`, by intertwiner contraction.
  static SpinNetwork from_state(const ParticleSystem& sys, const CouplingTree& tree, const Eigen::VectorXcd& psi);

  const ParticleSystem& system() const { return sys_; }
  const CouplingTree& tree() const { return tree_; }
  const std::vector<SpinEdge>& edges() const { return edges_; }
  const std::vector<SpinVertex>& vertices() const { return vertices_; }
  const std::map<Assignment, std::complex<double>>& amplitudes() const { return amplitudes_; }

  /// Index of the edge named `name`, or -1.
  int edge_index(std::string_view name) const;
  /// Interior edge indices in assignment order.
  const std::vector<int>& interior_edges() const { return interior_; }
  /// Interior edge whose subtree holds exactly `labels`, or -1.
  int interior_edge_for(const std::vector<std::string>& labels) const;

  /// Throws DomainError when the assignment has the wrong length, a negative
  /// label, or an M that is not a projection of the total.
  void check(const Assignment& a) const;
  /// Triangle rule at every vertex (parity included).
  bool admissible(const std::vector<HalfInt>& labels) const;
  /// All interior labelings that pass every vertex, in lexicographic order.
  std::vector<std::vector<HalfInt>> admissible_labels() const;

  /// Copy with the total edge resolved to J; only labelings ending in J remain
  /// admissible.
  SpinNetwork with_total(HalfInt J) const;

  /// Replaces the amplitude table. Entries must pass check() and admissible().
  SpinNetwork with_amplitudes(std::map<Assignment, std::complex<double>> amps) const;

 private:
  ParticleSystem sys_;
  CouplingTree tree_;
  std::vector<SpinEdge> edges_;
  std::vector<SpinVertex> vertices_;
  std::vector<int> interior_;
  std::map<Assignment, std::complex<double>> amplitudes_;

  friend std::complex<double> contract(const SpinNetwork&, const Eigen::VectorXcd&, const Assignment&);
};

/// Coefficient of the basis graph `a` in the product-basis state `psi`:
/// sum over leaf projections of psi times the product of vertex CG maps.
/// Zero for assignments violating a triangle rule.
std::complex<double> contract(const SpinNetwork& sn, const Eigen::VectorXcd& psi, const Assignment& a);

/// Stored amplitude; zero when absent or inadmissible. DomainError on an
/// inconsistent assignment.
std::complex<double> amplitude(const SpinNetwork& sn, const Assignment& a);

/// Energy per assignment for the toy-model graph,
/// lambda [j1(j1+1) + j2(j2+1) - S(S+1) - M(M+1) - C(C+1) - N(N+1)], with j1
/// the (S,M) edge and j2 the (C,N) edge. This is the spectrum of
/// 2 lambda (J^S . J^M + J^C . J^N). DomainError if the graph has no such edges.
std::function<double(const Assignment&)> hamiltonian_in_j(const SpinNetwork& sn, double lambda);

/// Integer key 4 [j1(j1+1) + j2(j2+1)] of the energy superselection.
std::function<long(const Assignment&)> superselection_key(const SpinNetwork& sn);

/// Rotation average of a graph state carrying M: p_J and rho_J over the
/// interior labelings, M summed out.
PhysicalState rotation_average(const SpinNetwork& sn);

/// Drops coherences between labelings with different keys.
PhysicalState energy_superselect(const PhysicalState& ps, const std::function<long(const Assignment&)>& key);

/// sum_a p_a |Gamma_a><Gamma_a|, each Gamma_a a graph with a definite total
/// edge and amplitudes over interior labelings only.
struct SpinNetworkMixture {
  std::vector<std::pair<double, SpinNetwork>> terms;
  double total_weight() const;
};

/// Spectral decomposition of every rho_J into graph states; terms below
/// `cutoff` are dropped.
SpinNetworkMixture to_mixture(const PhysicalState& ps, const SpinNetwork& graph, double cutoff = 1e-14);

/// One JSON object per line: a network record (particles and tree), then
/// edges, vertices and amplitudes.
std::string to_jsonl(const SpinNetwork& sn);
SpinNetwork from_jsonl(std::string_view text);

}  // namespace relqm
