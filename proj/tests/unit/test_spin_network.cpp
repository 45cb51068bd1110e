#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "relqm/am/coherent_state.hpp"
#include "relqm/composite/density.hpp"
#include "relqm/composite/recoupling.hpp"
#include "relqm/errors.hpp"
#include "relqm/spinnet/spin_network.hpp"

using namespace relqm;
using cplx = std::complex<double>;

namespace {

HalfInt h(int twice) { return HalfInt::from_twice(twice); }

const char* const kToyTree = "((S,M),((C,N),G))";

ParticleSystem toy_system(int tS = 1, int tM = 2, int tC = 2, int tN = 1, int tG = 2) {
  return ParticleSystem({{"S", h(tS)}, {"M", h(tM)}, {"C", h(tC)}, {"N", h(tN)}, {"G", h(tG)}});
}

Eigen::VectorXcd kron(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  Eigen::VectorXcd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

// Toy-model initial state: system spinor, magnets along x, clock and gyroscope along z.
Eigen::VectorXcd toy_initial_state(const ParticleSystem& sys, cplx a, cplx b) {
  Eigen::VectorXcd psi(2);
  psi << a, b;
  psi = kron(psi, coherent_state_amplitudes(sys.at("M").spin, Axis::x).cast<cplx>());
  psi = kron(psi, coherent_state_amplitudes(sys.at("C").spin, Axis::z).cast<cplx>());
  psi = kron(psi, coherent_state_amplitudes(sys.at("N").spin, Axis::x).cast<cplx>());
  psi = kron(psi, coherent_state_amplitudes(sys.at("G").spin, Axis::z).cast<cplx>());
  return psi;
}

// Coupled-basis index of (path, M) in the single factor of a full coupling.
int coupled_index(const Factor& f, const std::vector<HalfInt>& path, HalfInt M) {
  for (int k = 0; k < f.irrep_count(); ++k)
    if (f.irrep_path(k) == path) return f.irrep_offset(k) + (f.irrep_spin(k).twice() - M.twice()) / 2;
  return -1;
}

void check_against_recoupling(const ParticleSystem& sys, const CouplingTree& tree, const Eigen::VectorXcd& psi) {
  const SpinNetwork sn = SpinNetwork::from_state(sys, tree, psi);
  const RecouplingMap map = couple_tree(sys, tree);
  const Eigen::VectorXcd target = map.to_target(psi);
  const Factor& f = map.target().factor(0);
  int checked = 0;
  for (int k = 0; k < f.irrep_count(); ++k) {
    for (HalfInt M : projections(f.irrep_spin(k))) {
      const cplx want = target(coupled_index(f, f.irrep_path(k), M));
      CHECK(std::abs(amplitude(sn, Assignment{f.irrep_path(k), M}) - want) < 1e-10);
      ++checked;
    }
  }
  CHECK(checked == sys.dimension());
}

Eigen::MatrixXcd embed(const ParticleSystem& sys, const std::string& label, const Eigen::MatrixXcd& op) {
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(1, 1);
  for (const auto& p : sys.particles()) {
    const int n = p.spin.multiplicity();
    acc = oracle::kron(acc, p.label == label ? op : Eigen::MatrixXcd::Identity(n, n));
  }
  return acc;
}

// 2 lambda (J^a . J^b) on the product basis.
Eigen::MatrixXcd heisenberg(const ParticleSystem& sys, const std::string& a, const std::string& b, double lambda) {
  const auto sa = oracle::spin_matrices(sys.at(a).spin.twice());
  const auto sb = oracle::spin_matrices(sys.at(b).spin.twice());
  return 2 * lambda *
         (embed(sys, a, sa.x) * embed(sys, b, sb.x) + embed(sys, a, sa.y) * embed(sys, b, sb.y) +
          embed(sys, a, sa.z) * embed(sys, b, sb.z));
}

}  // namespace

TEST_CASE("single pair: one vertex, three edges") {
  const ParticleSystem sys({{"A", h(1)}, {"B", h(2)}});
  const SpinNetwork sn = SpinNetwork::from_coupling_tree(sys, CouplingTree::parse("(A,B)"));
  REQUIRE(sn.vertices().size() == 1u);
  REQUIRE(sn.edges().size() == 3u);
  const SpinVertex& v = sn.vertices()[0];
  CHECK(sn.edges()[v.in_a].name == "A");
  CHECK(sn.edges()[v.in_b].name == "B");
  CHECK(sn.edges()[v.out].name == "total");
  CHECK(sn.edges()[v.out].kind == EdgeKind::superselected);
  CHECK(sn.edges()[v.in_a].kind == EdgeKind::fixed);
  CHECK(sn.edges()[v.in_a].from == -1);
  CHECK(sn.edges()[v.out].to == -1);
  const auto labels = sn.admissible_labels();
  REQUIRE(labels.size() == 2u);
  CHECK(labels[0][0] == h(1));
  CHECK(labels[1][0] == h(3));
}

TEST_CASE("toy-model graph has edges j1, j2, j3 and total") {
  const SpinNetwork sn = SpinNetwork::from_coupling_tree(toy_system(), CouplingTree::parse(kToyTree));
  CHECK(sn.vertices().size() == 4u);
  CHECK(sn.edges().size() == 9u);
  for (const char* name : {"S", "M", "C", "N", "G", "j1", "j2", "j3", "total"}) CHECK(sn.edge_index(name) >= 0);
  CHECK(sn.interior_edge_for({"S", "M"}) == sn.edge_index("j1"));
  CHECK(sn.interior_edge_for({"C", "N"}) == sn.edge_index("j2"));
  CHECK(sn.interior_edge_for({"C", "N", "G"}) == sn.edge_index("j3"));
  CHECK(sn.interior_edge_for({"S", "G"}) == -1);
  // Every vertex has two incoming edges and one outgoing edge.
  for (std::size_t v = 0; v < sn.vertices().size(); ++v) {
    const SpinVertex& x = sn.vertices()[v];
    CHECK(sn.edges()[x.in_a].to == static_cast<int>(v));
    CHECK(sn.edges()[x.in_b].to == static_cast<int>(v));
    CHECK(sn.edges()[x.out].from == static_cast<int>(v));
  }
  const SpinVertex& top = sn.vertices()[sn.edges()[sn.edge_index("total")].from];
  CHECK(sn.edges()[top.in_a].name == "j1");
  CHECK(sn.edges()[top.in_b].name == "j3");
}

TEST_CASE("malformed trees are rejected") {
  const ParticleSystem sys = toy_system();
  CHECK_THROWS_AS(SpinNetwork::from_coupling_tree(sys, CouplingTree::parse("((S,M),(C,N))")), DomainError);
  CHECK_THROWS_AS(SpinNetwork::from_coupling_tree(sys, CouplingTree::parse("((S,M),((C,N),X))")), DomainError);
}

TEST_CASE("stretched product state has unit stretched amplitude") {
  const ParticleSystem sys = toy_system(1, 2, 3, 1, 2);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(sys.dimension());
  psi(0) = 1.0;
  const SpinNetwork sn = SpinNetwork::from_state(sys, CouplingTree::parse(kToyTree), psi);
  // j1 = 3/2, j2 = 2, j3 = 3, total = 9/2
  const Assignment stretched{{h(3), h(4), h(6), h(9)}, h(9)};
  CHECK(std::abs(amplitude(sn, stretched) - 1.0) < 1e-14);
  CHECK(sn.amplitudes().size() == 1u);
}

TEST_CASE("triangle violations give zero, inconsistent assignments throw") {
  const ParticleSystem sys = toy_system();
  const Eigen::VectorXcd psi = toy_initial_state(sys, 0.6, 0.8);
  const SpinNetwork sn = SpinNetwork::from_state(sys, CouplingTree::parse(kToyTree), psi);
  CHECK(amplitude(sn, Assignment{{h(7), h(2), h(2), h(5)}, h(1)}) == cplx(0.0));
  CHECK(contract(sn, psi, Assignment{{h(1), h(6), h(2), h(1)}, h(1)}) == cplx(0.0));
  CHECK_FALSE(sn.admissible({h(7), h(2), h(2), h(5)}));
  CHECK_THROWS_AS(amplitude(sn, Assignment{{h(1), h(2)}, h(1)}), DomainError);
  CHECK_THROWS_AS(amplitude(sn, Assignment{{h(1), h(2), h(2), h(1)}, h(3)}), DomainError);
  CHECK_THROWS_AS(amplitude(sn, Assignment{{h(-1), h(2), h(2), h(1)}, h(1)}), DomainError);
  CHECK_THROWS_AS(contract(sn, psi, Assignment{{h(1), h(2), h(2), h(1)}, std::nullopt}), DomainError);
  CHECK_THROWS_AS(sn.with_amplitudes({{Assignment{{h(7), h(2), h(2), h(5)}, h(1)}, 1.0}}), DomainError);
}

TEST_CASE("toy-model amplitudes equal the recoupling coefficients") {
  const ParticleSystem sys = toy_system(1, 4, 2, 2, 4);
  check_against_recoupling(sys, CouplingTree::parse(kToyTree), toy_initial_state(sys, cplx(0.6, 0.1), cplx(0.0, 0.0)));
  const double r = std::sqrt(0.5);
  check_against_recoupling(sys, CouplingTree::parse(kToyTree), toy_initial_state(sys, r, cplx(0, r)));
}

TEST_CASE("random states on random trees agree with the recoupling map") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> spin(1, 3), count(3, 5);
  const std::vector<std::string> trees3 = {"((A,B),C)", "(A,(B,C))", "((C,A),B)"};
  const std::vector<std::string> trees4 = {"(((A,B),C),D)", "((A,B),(C,D))", "(A,((D,B),C))"};
  const std::vector<std::string> trees5 = {"((((A,B),C),D),E)", "((A,B),((C,D),E))", "((E,(A,C)),(D,B))"};
  for (int trial = 0; trial < 12; ++trial) {
    const int n = count(rng);
    std::vector<Particle> ps;
    for (int k = 0; k < n; ++k) ps.push_back({std::string(1, static_cast<char>('A' + k)), h(spin(rng))});
    const ParticleSystem sys(ps);
    const auto& pool = n == 3 ? trees3 : n == 4 ? trees4 : trees5;
    const CouplingTree tree = CouplingTree::parse(pool[trial % pool.size()]);
    check_against_recoupling(sys, tree, oracle::random_state(rng, static_cast<int>(sys.dimension())));
  }
}

TEST_CASE("energies in j agree with the Heisenberg spectrum") {
  const ParticleSystem sys = toy_system(1, 2, 2, 1, 2);
  const CouplingTree tree = CouplingTree::parse(kToyTree);
  const SpinNetwork sn = SpinNetwork::from_coupling_tree(sys, tree);
  const double lambda = 0.7;
  const auto H_j = hamiltonian_in_j(sn, lambda);
  const Eigen::MatrixXcd H = heisenberg(sys, "S", "M", lambda) + heisenberg(sys, "C", "N", lambda);
  const RecouplingMap map = couple_tree(sys, tree);
  const Factor& f = map.target().factor(0);
  const Eigen::MatrixXd U = Eigen::MatrixXd(map.matrix());
  for (int k = 0; k < f.irrep_count(); ++k) {
    const Assignment a{f.irrep_path(k), f.irrep_spin(k)};
    const Eigen::VectorXcd v = U.col(f.irrep_offset(k)).cast<cplx>();
    CHECK((H * v - H_j(a) * v).norm() < 1e-10);
  }
  // stretched: j1 = S+M, j2 = C+N
  const double S = 0.5, M = 1, C = 1, N = 0.5;
  const double want = lambda * ((S + M) * (S + M + 1) + (C + N) * (C + N + 1) - S * (S + 1) - M * (M + 1) -
                                C * (C + 1) - N * (N + 1));
  CHECK(H_j(Assignment{{h(3), h(3), h(5), h(8)}, std::nullopt}) == doctest::Approx(want));
  // j3 and total do not enter
  CHECK(H_j(Assignment{{h(3), h(3), h(1), h(2)}, std::nullopt}) == H_j(Assignment{{h(3), h(3), h(5), h(8)}, std::nullopt}));
  // equal j1(j1+1) + j2(j2+1) is one level
  const auto key = superselection_key(sn);
  const Assignment x{{h(1), h(3), h(1), h(0)}, std::nullopt}, y{{h(3), h(1), h(1), h(2)}, std::nullopt};
  CHECK(key(x) == key(y));
  CHECK(H_j(x) == doctest::Approx(H_j(y)));
  CHECK_THROWS_AS(hamiltonian_in_j(SpinNetwork::from_coupling_tree(sys, CouplingTree::parse("((S,C),((M,N),G))")), 1.0),
                  DomainError);
}

TEST_CASE("graph superselection matches twirl and time average in the composite picture") {
  std::mt19937_64 rng(4);
  const ParticleSystem sys = toy_system(1, 2, 2, 1, 2);
  const CouplingTree tree = CouplingTree::parse(kToyTree);
  const double lambda = 0.9;
  const Eigen::MatrixXcd H = heisenberg(sys, "S", "M", lambda) + heisenberg(sys, "C", "N", lambda);
  const IrrepDecomposition dec = decompose_su2(sys, tree);
  for (int trial = 0; trial < 4; ++trial) {
    const Eigen::VectorXcd psi = trial == 0 ? toy_initial_state(sys, 0.6, cplx(0, 0.8))
                                            : oracle::random_state(rng, static_cast<int>(sys.dimension()));
    const PhysicalState composite = rotation_twirl(time_average(pure_state(sys, psi), H), dec);

    const SpinNetwork sn = SpinNetwork::from_state(sys, tree, psi);
    const PhysicalState graph = energy_superselect(rotation_average(sn), superselection_key(sn));
    REQUIRE(graph.sectors.size() == composite.sectors.size());
    for (const auto& s : composite.sectors) {
      const PhysicalSector* g = graph.find(s.J);
      REQUIRE(g != nullptr);
      CHECK(std::abs(g->probability - s.probability) < 1e-10);
      for (std::size_t a = 0; a < s.paths.size(); ++a) {
        const auto ia = std::find(g->paths.begin(), g->paths.end(), s.paths[a]) - g->paths.begin();
        REQUIRE(ia < static_cast<long>(g->paths.size()));
        for (std::size_t b = 0; b < s.paths.size(); ++b) {
          const auto ib = std::find(g->paths.begin(), g->paths.end(), s.paths[b]) - g->paths.begin();
          CHECK(std::abs(g->state(ia, ib) * g->probability - s.state(a, b) * s.probability) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("statistical mixtures of graphs") {
  const ParticleSystem sys = toy_system();
  const CouplingTree tree = CouplingTree::parse(kToyTree);
  const SpinNetwork sn = SpinNetwork::from_state(sys, tree, toy_initial_state(sys, 0.6, 0.8));
  const PhysicalState ps = energy_superselect(rotation_average(sn), superselection_key(sn));
  const SpinNetworkMixture mix = to_mixture(ps, SpinNetwork::from_coupling_tree(sys, tree));
  CHECK(mix.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& [w, g] : mix.terms) {
    CHECK(w > 0.0);
    const auto& total = g.edges()[g.interior_edges().back()];
    REQUIRE(total.j.has_value());
    double norm = 0.0;
    for (const auto& [a, v] : g.amplitudes()) {
      CHECK_FALSE(a.M.has_value());
      CHECK(a.labels.back() == *total.j);
      norm += std::norm(v);
    }
    CHECK(norm == doctest::Approx(1.0));
  }
  // Reassembling the mixture gives back the sector weights.
  for (const auto& s : ps.sectors) {
    double p = 0.0;
    for (const auto& [w, g] : mix.terms)
      if (*g.edges()[g.interior_edges().back()].j == s.J) p += w;
    CHECK(p == doctest::Approx(s.probability).epsilon(1e-12));
  }
}

TEST_CASE("JSON-lines round trip") {
  const ParticleSystem sys = toy_system();
  const CouplingTree tree = CouplingTree::parse(kToyTree);
  const SpinNetwork sn = SpinNetwork::from_state(sys, tree, toy_initial_state(sys, 0.6, cplx(0, 0.8)));
  const std::string text = to_jsonl(sn);
  const SpinNetwork back = from_jsonl(text);
  CHECK(back.amplitudes() == sn.amplitudes());
  CHECK(to_jsonl(back) == text);

  const SpinNetworkMixture mix =
      to_mixture(rotation_average(sn), SpinNetwork::from_coupling_tree(sys, tree));
  const SpinNetwork& term = mix.terms.front().second;
  const SpinNetwork term_back = from_jsonl(to_jsonl(term));
  CHECK(term_back.edges()[term_back.interior_edges().back()].j == term.edges()[term.interior_edges().back()].j);
  CHECK(term_back.amplitudes() == term.amplitudes());

  CHECK_THROWS_AS(from_jsonl("{\"type\":\"edge\"}"), DomainError);
  CHECK_THROWS_AS(from_jsonl("not json"), DomainError);
  CHECK_THROWS_AS(from_jsonl(""), DomainError);
}
