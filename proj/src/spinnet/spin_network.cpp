#include "relqm/spinnet/spin_network.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "relqm/am/clebsch_gordan.hpp"
#include "relqm/errors.hpp"

namespace relqm {

namespace {

using cplx = std::complex<double>;
using json = nlohmann::json;

// Post-order walk of the tree. Leaves carry the particle index, internal
// nodes their position in the assignment.
struct Node {
  int left = -1, right = -1;
  int particle = -1;
  int interior = -1;
  int edge = -1;
};

int flatten(const CouplingTree& t, const ParticleSystem& sys, std::vector<Node>& out, int& next_interior) {
  Node n;
  if (t.is_leaf()) {
    n.particle = static_cast<int>(sys.index_of(t.label()));
  } else {
    n.left = flatten(t.left(), sys, out, next_interior);
    n.right = flatten(t.right(), sys, out, next_interior);
    n.interior = next_interior++;
  }
  out.push_back(n);
  return static_cast<int>(out.size()) - 1;
}

std::vector<Node> flatten(const CouplingTree& t, const ParticleSystem& sys) {
  std::vector<Node> out;
  int k = 0;
  flatten(t, sys, out, k);
  return out;
}

const char* kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::fixed:
      return "fixed";
    case EdgeKind::quantum:
      return "quantum";
    case EdgeKind::superselected:
      return "superselected";
  }
  return "?";
}

EdgeKind parse_kind(const std::string& s) {
  if (s == "fixed") return EdgeKind::fixed;
  if (s == "quantum") return EdgeKind::quantum;
  if (s == "superselected") return EdgeKind::superselected;
  throw DomainError("spin network: unknown edge kind '" + s + "'");
}

// Spin on the edge above node k.
HalfInt node_spin(const Node& n, const ParticleSystem& sys, const std::vector<HalfInt>& labels) {
  return n.particle >= 0 ? sys.particles()[n.particle].spin : labels[n.interior];
}

// CG blocks <a ma; b mb | c mc> indexed [a - ma][b - mb], cached per triple.
class CGCache {
 public:
  const Eigen::MatrixXd& get(HalfInt a, HalfInt b, HalfInt c, HalfInt mc) {
    const auto key = std::make_tuple(a.twice(), b.twice(), c.twice(), mc.twice());
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.multiplicity(), b.multiplicity());
    for (int ia = 0; ia < a.multiplicity(); ++ia) {
      const HalfInt ma = a - HalfInt::from_int(ia);
      const HalfInt mb = mc - ma;
      if (!is_projection_of(mb, b)) continue;
      m(ia, (b.twice() - mb.twice()) / 2) = clebsch_gordan(a, ma, b, mb, c, mc);
    }
    return cache_.emplace(key, std::move(m)).first->second;
  }

 private:
  std::map<std::tuple<int, int, int, int>, Eigen::MatrixXd> cache_;
};

}  // namespace

SpinNetwork SpinNetwork::from_coupling_tree(const ParticleSystem& sys, const CouplingTree& tree) {
  const auto leaves = tree.leaves();
  std::set<std::string> seen(leaves.begin(), leaves.end());
  if (seen.size() != leaves.size() || leaves.size() != sys.size()) {
    throw DomainError("SpinNetwork: tree " + tree.str() + " must name every particle exactly once");
  }
  for (const auto& l : leaves) sys.index_of(l);

  SpinNetwork sn;
  sn.sys_ = sys;
  sn.tree_ = tree;
  std::vector<Node> nodes = flatten(tree, sys);
  const int internal = tree.internal_nodes();
  sn.interior_.assign(internal, -1);
  for (Node& n : nodes) {
    SpinEdge e;
    if (n.particle >= 0) {
      const Particle& p = sys.particles()[n.particle];
      e.name = p.label;
      e.kind = EdgeKind::fixed;
      e.j = p.spin;
    } else {
      const bool root = n.interior == internal - 1;
      e.name = root ? "total" : "j" + std::to_string(n.interior + 1);
      e.kind = root ? EdgeKind::superselected : EdgeKind::quantum;
      const int v = static_cast<int>(sn.vertices_.size());
      sn.vertices_.push_back({nodes[n.left].edge, nodes[n.right].edge, static_cast<int>(sn.edges_.size())});
      sn.edges_[nodes[n.left].edge].to = v;
      sn.edges_[nodes[n.right].edge].to = v;
      e.from = v;
      sn.interior_[n.interior] = static_cast<int>(sn.edges_.size());
    }
    n.edge = static_cast<int>(sn.edges_.size());
    sn.edges_.push_back(e);
  }
  return sn;
}

SpinNetwork SpinNetwork::from_state(const ParticleSystem& sys, const CouplingTree& tree, const Eigen::VectorXcd& psi) {
  if (psi.size() != sys.dimension()) throw DimensionError("SpinNetwork::from_state: state does not match the system");
  SpinNetwork sn = from_coupling_tree(sys, tree);
  for (const auto& labels : sn.admissible_labels()) {
    const HalfInt J = labels.empty() ? sys.particles().front().spin : labels.back();
    for (HalfInt M : projections(J)) {
      Assignment a{labels, M};
      const cplx v = contract(sn, psi, a);
      if (v != cplx(0.0)) sn.amplitudes_.emplace(std::move(a), v);
    }
  }
  return sn;
}

int SpinNetwork::edge_index(std::string_view name) const {
  for (std::size_t k = 0; k < edges_.size(); ++k)
    if (edges_[k].name == name) return static_cast<int>(k);
  return -1;
}

int SpinNetwork::interior_edge_for(const std::vector<std::string>& labels) const {
  const std::set<std::string> want(labels.begin(), labels.end());
  // Interior node k of the post-order walk; subtrees are recovered by walking
  // the tree in the same order.
  std::vector<std::set<std::string>> subsets;
  std::function<std::set<std::string>(const CouplingTree&)> walk = [&](const CouplingTree& t) {
    if (t.is_leaf()) return std::set<std::string>{t.label()};
    auto l = walk(t.left());
    auto r = walk(t.right());
    l.insert(r.begin(), r.end());
    subsets.push_back(l);
    return l;
  };
  walk(tree_);
  for (std::size_t k = 0; k < subsets.size(); ++k)
    if (subsets[k] == want) return interior_[k];
  return -1;
}

void SpinNetwork::check(const Assignment& a) const {
  if (a.labels.size() != interior_.size()) {
    throw DomainError("SpinNetwork: assignment has " + std::to_string(a.labels.size()) + " labels, graph has " +
                      std::to_string(interior_.size()) + " interior edges");
  }
  for (HalfInt j : a.labels) {
    if (j.twice() < 0) throw DomainError("SpinNetwork: negative edge label " + j.str());
  }
  const HalfInt J = a.labels.empty() ? sys_.particles().front().spin : a.labels.back();
  const auto& total = edges_[interior_.empty() ? 0 : interior_.back()];
  if (total.j && *total.j != J) {
    throw DomainError("SpinNetwork: total edge is fixed to " + total.j->str() + ", assignment has " + J.str());
  }
  if (a.M && !is_projection_of(*a.M, J)) {
    throw DomainError("SpinNetwork: M = " + a.M->str() + " is not a projection of the total " + J.str());
  }
}

bool SpinNetwork::admissible(const std::vector<HalfInt>& labels) const {
  if (labels.size() != interior_.size()) return false;
  const std::vector<Node> nodes = flatten(tree_, sys_);
  for (const Node& n : nodes) {
    if (n.particle >= 0) continue;
    if (!satisfies_triangle(node_spin(nodes[n.left], sys_, labels), node_spin(nodes[n.right], sys_, labels),
                            labels[n.interior])) {
      return false;
    }
  }
  return true;
}

std::vector<std::vector<HalfInt>> SpinNetwork::admissible_labels() const {
  const std::vector<Node> nodes = flatten(tree_, sys_);
  std::vector<std::vector<HalfInt>> out;
  std::vector<HalfInt> labels(interior_.size());
  // Internal nodes appear in post-order, so children are labelled first.
  std::vector<int> order;
  for (std::size_t k = 0; k < nodes.size(); ++k)
    if (nodes[k].particle < 0) order.push_back(static_cast<int>(k));
  std::function<void(std::size_t)> rec = [&](std::size_t depth) {
    if (depth == order.size()) {
      out.push_back(labels);
      return;
    }
    const Node& n = nodes[order[depth]];
    for (HalfInt j : coupled_spins(node_spin(nodes[n.left], sys_, labels), node_spin(nodes[n.right], sys_, labels))) {
      labels[n.interior] = j;
      rec(depth + 1);
    }
  };
  rec(0);
  const auto& total = edges_[interior_.empty() ? 0 : interior_.back()];
  if (total.j && !interior_.empty()) {
    std::erase_if(out, [&](const std::vector<HalfInt>& l) { return l.back() != *total.j; });
  }
  std::sort(out.begin(), out.end());
  return out;
}

SpinNetwork SpinNetwork::with_total(HalfInt J) const {
  if (interior_.empty()) throw DomainError("SpinNetwork: a single particle has no total edge to resolve");
  require_spin(J, "SpinNetwork::with_total");
  SpinNetwork sn = *this;
  sn.edges_[interior_.back()].j = J;
  std::erase_if(sn.amplitudes_, [&](const auto& kv) { return kv.first.labels.back() != J; });
  return sn;
}

SpinNetwork SpinNetwork::with_amplitudes(std::map<Assignment, cplx> amps) const {
  for (const auto& [a, v] : amps) {
    check(a);
    if (!admissible(a.labels)) throw DomainError("SpinNetwork: amplitude on a triangle-violating assignment");
  }
  SpinNetwork sn = *this;
  sn.amplitudes_ = std::move(amps);
  return sn;
}

cplx contract(const SpinNetwork& sn, const Eigen::VectorXcd& psi, const Assignment& a) {
  sn.check(a);
  if (!a.M) throw DomainError("contract: the assignment needs a total projection M");
  if (psi.size() != sn.sys_.dimension()) throw DimensionError("contract: state does not match the graph's particles");
  if (!sn.admissible(a.labels)) return 0.0;
  const ParticleSystem& sys = sn.sys_;
  if (sys.size() == 1) return psi((sys.particles()[0].spin.twice() - a.M->twice()) / 2);

  const std::vector<Node> nodes = flatten(sn.tree_, sys);
  thread_local CGCache cache;

  // Flat tensor over the open slots; slot k holds node slot_node[k], m descending.
  std::vector<int> slot_node(sys.size()), dims(sys.size());
  for (std::size_t p = 0; p < sys.size(); ++p) dims[p] = sys.particles()[p].spin.multiplicity();
  for (std::size_t k = 0; k < nodes.size(); ++k)
    if (nodes[k].particle >= 0) slot_node[nodes[k].particle] = static_cast<int>(k);
  Eigen::VectorXcd t = psi;

  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Node& n = nodes[k];
    if (n.particle >= 0) continue;
    const int pa = static_cast<int>(std::find(slot_node.begin(), slot_node.end(), n.left) - slot_node.begin());
    const int pb = static_cast<int>(std::find(slot_node.begin(), slot_node.end(), n.right) - slot_node.begin());
    const HalfInt ja = node_spin(nodes[n.left], sys, a.labels), jb = node_spin(nodes[n.right], sys, a.labels);
    const HalfInt jc = a.labels[n.interior];
    const bool root = n.interior == static_cast<int>(a.labels.size()) - 1;
    const std::vector<HalfInt> mcs = root ? std::vector<HalfInt>{*a.M} : projections(jc);

    std::vector<int> new_dims = dims;
    new_dims[pa] = root ? 1 : jc.multiplicity();
    new_dims.erase(new_dims.begin() + pb);
    std::vector<int> new_nodes = slot_node;
    new_nodes[pa] = static_cast<int>(k);
    new_nodes.erase(new_nodes.begin() + pb);
    int new_size = 1;
    for (int d : new_dims) new_size *= d;

    // Strides of the old and new layouts (last slot fastest).
    std::vector<int> old_stride(dims.size()), new_stride(new_dims.size());
    for (int s = static_cast<int>(dims.size()) - 1, acc = 1; s >= 0; --s) {
      old_stride[s] = acc;
      acc *= dims[s];
    }
    for (int s = static_cast<int>(new_dims.size()) - 1, acc = 1; s >= 0; --s) {
      new_stride[s] = acc;
      acc *= new_dims[s];
    }
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(new_size);
    for (int ic = 0; ic < static_cast<int>(mcs.size()); ++ic) {
      const Eigen::MatrixXd& cg = cache.get(ja, jb, jc, mcs[ic]);
      for (int old = 0; old < t.size(); ++old) {
        if (t(old) == cplx(0.0)) continue;
        const int ia = (old / old_stride[pa]) % dims[pa];
        const int ib = (old / old_stride[pb]) % dims[pb];
        const double w = cg(ia, ib);
        if (w == 0.0) continue;
        int idx = 0;
        for (int s = 0, q = 0; s < static_cast<int>(dims.size()); ++s) {
          if (s == pb) continue;
          const int digit = s == pa ? ic : (old / old_stride[s]) % dims[s];
          idx += digit * new_stride[q++];
        }
        next(idx) += w * t(old);
      }
    }
    t = std::move(next);
    dims = std::move(new_dims);
    slot_node = std::move(new_nodes);
  }
  return t(0);
}

cplx amplitude(const SpinNetwork& sn, const Assignment& a) {
  sn.check(a);
  if (!sn.admissible(a.labels)) return 0.0;
  const auto it = sn.amplitudes().find(a);
  return it == sn.amplitudes().end() ? cplx(0.0) : it->second;
}

namespace {

struct ToyEdges {
  int j1 = -1, j2 = -1;  // positions in the assignment
  double offset = 0.0;   // S(S+1) + M(M+1) + C(C+1) + N(N+1)
};

ToyEdges toy_edges(const SpinNetwork& sn) {
  const int e1 = sn.interior_edge_for({"S", "M"});
  const int e2 = sn.interior_edge_for({"C", "N"});
  if (e1 < 0 || e2 < 0) {
    throw DomainError("hamiltonian_in_j: the graph needs interior edges coupling (S,M) and (C,N)");
  }
  const auto& in = sn.interior_edges();
  ToyEdges t;
  t.j1 = static_cast<int>(std::find(in.begin(), in.end(), e1) - in.begin());
  t.j2 = static_cast<int>(std::find(in.begin(), in.end(), e2) - in.begin());
  for (const char* l : {"S", "M", "C", "N"}) t.offset += sn.system().at(l).spin.casimir();
  return t;
}

}  // namespace

std::function<double(const Assignment&)> hamiltonian_in_j(const SpinNetwork& sn, double lambda) {
  const ToyEdges t = toy_edges(sn);
  return [t, lambda](const Assignment& a) {
    return lambda * (a.labels.at(t.j1).casimir() + a.labels.at(t.j2).casimir() - t.offset);
  };
}

std::function<long(const Assignment&)> superselection_key(const SpinNetwork& sn) {
  const ToyEdges t = toy_edges(sn);
  return [t](const Assignment& a) {
    const long x = a.labels.at(t.j1).twice(), y = a.labels.at(t.j2).twice();
    return x * (x + 2) + y * (y + 2);
  };
}

PhysicalState rotation_average(const SpinNetwork& sn) {
  // Group the amplitudes by total J, then by labeling.
  std::map<HalfInt, std::vector<CouplingPath>> paths;
  for (const auto& labels : sn.admissible_labels()) {
    const HalfInt J = labels.empty() ? sn.system().particles().front().spin : labels.back();
    paths[J].push_back(labels);
  }
  PhysicalState ps;
  for (auto it = paths.rbegin(); it != paths.rend(); ++it) {
    const auto& [J, ps_paths] = *it;
    const int n = static_cast<int>(ps_paths.size());
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
    for (HalfInt M : projections(J)) {
      Eigen::VectorXcd v(n);
      for (int p = 0; p < n; ++p) v(p) = amplitude(sn, Assignment{ps_paths[p], M});
      rho += v * v.adjoint();
    }
    const double p = rho.trace().real();
    if (p < kSectorPruneThreshold) continue;
    ps.sectors.push_back({J, p, ps_paths, rho / p});
  }
  const double total = ps.total_probability();
  if (std::abs(total - 1.0) > 1e-8) {
    throw StateError("rotation_average: amplitudes carry weight " + std::to_string(total) + ", expected 1");
  }
  return ps;
}

PhysicalState energy_superselect(const PhysicalState& ps, const std::function<long(const Assignment&)>& key) {
  PhysicalState out = ps;
  for (auto& s : out.sectors) {
    std::vector<long> k;
    for (const auto& p : s.paths) k.push_back(key(Assignment{p, std::nullopt}));
    for (int a = 0; a < s.state.rows(); ++a)
      for (int b = 0; b < s.state.cols(); ++b)
        if (k[a] != k[b]) s.state(a, b) = 0.0;
  }
  return out;
}

double SpinNetworkMixture::total_weight() const {
  double w = 0.0;
  for (const auto& t : terms) w += t.first;
  return w;
}

SpinNetworkMixture to_mixture(const PhysicalState& ps, const SpinNetwork& graph, double cutoff) {
  SpinNetworkMixture mix;
  for (const auto& s : ps.sectors) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.state);
    for (int k = static_cast<int>(es.eigenvalues().size()) - 1; k >= 0; --k) {
      const double w = s.probability * es.eigenvalues()(k);
      if (w < cutoff) continue;
      std::map<Assignment, cplx> amps;
      for (std::size_t p = 0; p < s.paths.size(); ++p) {
        const cplx v = es.eigenvectors()(static_cast<int>(p), k);
        if (std::abs(v) > 1e-15) amps.emplace(Assignment{s.paths[p], std::nullopt}, v);
      }
      mix.terms.emplace_back(w, graph.with_total(s.J).with_amplitudes(std::move(amps)));
    }
  }
  return mix;
}

std::string to_jsonl(const SpinNetwork& sn) {
  std::ostringstream os;
  json head = {{"type", "network"}, {"tree", sn.tree().str()}};
  json parts = json::array();
  for (const auto& p : sn.system().particles()) parts.push_back({{"label", p.label}, {"spin", p.spin.str()}});
  head["particles"] = parts;
  os << head.dump() << '\n';
  for (std::size_t k = 0; k < sn.edges().size(); ++k) {
    const SpinEdge& e = sn.edges()[k];
    json j = {{"type", "edge"}, {"id", k}, {"name", e.name}, {"kind", kind_name(e.kind)}, {"from", e.from}, {"to", e.to}};
    j["j"] = e.j ? json(e.j->str()) : json(nullptr);
    os << j.dump() << '\n';
  }
  for (std::size_t k = 0; k < sn.vertices().size(); ++k) {
    const SpinVertex& v = sn.vertices()[k];
    os << json{{"type", "vertex"}, {"id", k}, {"in", {v.in_a, v.in_b}}, {"out", v.out}}.dump() << '\n';
  }
  for (const auto& [a, amp] : sn.amplitudes()) {
    json labels = json::array();
    for (HalfInt j : a.labels) labels.push_back(j.str());
    json j = {{"type", "amplitude"}, {"labels", labels}, {"re", amp.real()}, {"im", amp.imag()}};
    if (a.M) j["M"] = a.M->str();
    os << j.dump() << '\n';
  }
  return os.str();
}

SpinNetwork from_jsonl(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  std::optional<SpinNetwork> sn;
  std::map<Assignment, cplx> amps;
  std::optional<HalfInt> total_j;
  try {
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      const std::string type = j.at("type");
      if (type == "network") {
        std::vector<Particle> ps;
        for (const auto& p : j.at("particles")) ps.push_back({p.at("label"), HalfInt::parse(p.at("spin").get<std::string>())});
        sn = SpinNetwork::from_coupling_tree(ParticleSystem(ps), CouplingTree::parse(j.at("tree").get<std::string>()));
      } else if (!sn) {
        throw DomainError("from_jsonl: the network record must come first");
      } else if (type == "edge") {
        const std::size_t id = j.at("id");
        if (id >= sn->edges().size() || sn->edges()[id].name != j.at("name") ||
            parse_kind(j.at("kind")) != sn->edges()[id].kind) {
          throw DomainError("from_jsonl: edge record " + std::to_string(id) + " does not match the tree");
        }
        if (sn->edges()[id].kind == EdgeKind::superselected && !j.at("j").is_null()) {
          total_j = HalfInt::parse(j.at("j").get<std::string>());
        }
      } else if (type == "vertex") {
        const std::size_t id = j.at("id");
        if (id >= sn->vertices().size() || j.at("out") != sn->vertices()[id].out) {
          throw DomainError("from_jsonl: vertex record " + std::to_string(id) + " does not match the tree");
        }
      } else if (type == "amplitude") {
        Assignment a;
        for (const auto& l : j.at("labels")) a.labels.push_back(HalfInt::parse(l.get<std::string>()));
        if (j.contains("M")) a.M = HalfInt::parse(j.at("M").get<std::string>());
        amps[a] = cplx(j.at("re").get<double>(), j.at("im").get<double>());
      } else {
        throw DomainError("from_jsonl: unknown record type '" + type + "'");
      }
    }
  } catch (const json::exception& e) {
    throw DomainError(std::string("from_jsonl: ") + e.what());
  }
  if (!sn) throw DomainError("from_jsonl: no network record");
  if (total_j) sn = sn->with_total(*total_j);
  return sn->with_amplitudes(std::move(amps));
}

}  // namespace relqm
