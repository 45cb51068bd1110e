#include "relqm/composite/basis.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "relqm/errors.hpp"

namespace relqm {

ParticleSystem::ParticleSystem(std::vector<Particle> particles, std::int64_t dimension_limit)
    : particles_(std::move(particles)) {
  std::set<std::string> seen;
  for (const auto& p : particles_) {
    if (p.label.empty()) throw DomainError("ParticleSystem: empty particle label");
    if (!seen.insert(p.label).second) throw DomainError("ParticleSystem: duplicate label '" + p.label + "'");
    require_spin(p.spin, "ParticleSystem");
    dimension_ *= p.spin.multiplicity();
    if (dimension_ > dimension_limit) {
      throw DimensionError("ParticleSystem: dimension exceeds limit " + std::to_string(dimension_limit));
    }
  }
}

std::size_t ParticleSystem::index_of(std::string_view label) const {
  for (std::size_t k = 0; k < particles_.size(); ++k)
    if (particles_[k].label == label) return k;
  throw DomainError("unknown particle label '" + std::string(label) + "'");
}

CouplingTree CouplingTree::leaf(std::string label) {
  CouplingTree t;
  t.label_ = std::move(label);
  return t;
}

CouplingTree CouplingTree::join(CouplingTree left, CouplingTree right) {
  CouplingTree t;
  t.left_ = std::make_shared<const CouplingTree>(std::move(left));
  t.right_ = std::make_shared<const CouplingTree>(std::move(right));
  return t;
}

namespace {

class TreeParser {
 public:
  explicit TreeParser(std::string_view text) : text_(text) {}

  CouplingTree run() {
    CouplingTree t = node();
    skip();
    if (pos_ != text_.size()) fail("trailing characters");
    return t;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& why) const {
    throw DomainError("malformed coupling tree '" + std::string(text_) + "': " + why + " at column " +
                      std::to_string(pos_));
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  CouplingTree node() {
    skip();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      CouplingTree l = node();
      expect(',');
      CouplingTree r = node();
      expect(')');
      return CouplingTree::join(std::move(l), std::move(r));
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    if (pos_ == start) fail("expected a label");
    return CouplingTree::leaf(std::string(text_.substr(start, pos_ - start)));
  }
};

}  // namespace

CouplingTree CouplingTree::parse(std::string_view text) {
  CouplingTree t = TreeParser(text).run();
  const auto names = t.leaves();
  std::set<std::string> uniq(names.begin(), names.end());
  if (uniq.size() != names.size()) throw DomainError("coupling tree '" + std::string(text) + "' repeats a label");
  return t;
}

std::vector<std::string> CouplingTree::leaves() const {
  if (is_leaf()) return {label_};
  auto out = left_->leaves();
  auto r = right_->leaves();
  out.insert(out.end(), r.begin(), r.end());
  return out;
}

int CouplingTree::internal_nodes() const {
  return is_leaf() ? 0 : 1 + left_->internal_nodes() + right_->internal_nodes();
}

std::string CouplingTree::str() const {
  if (is_leaf()) return label_;
  return "(" + left_->str() + "," + right_->str() + ")";
}

Factor Factor::particle(const Particle& p) {
  require_spin(p.spin, "Factor::particle");
  Factor f;
  f.tree_ = CouplingTree::leaf(p.label);
  f.leaf_spins_ = {p.spin};
  f.irreps_.push_back(Irrep{{}, p.spin, 0, -1, -1});
  f.finalize();
  return f;
}

Factor Factor::coupled(const Factor& a, const Factor& b) {
  Factor f;
  f.tree_ = CouplingTree::join(a.tree_, b.tree_);
  f.leaf_spins_ = a.leaf_spins_;
  f.leaf_spins_.insert(f.leaf_spins_.end(), b.leaf_spins_.begin(), b.leaf_spins_.end());
  for (int ka = 0; ka < a.irrep_count(); ++ka) {
    for (int kb = 0; kb < b.irrep_count(); ++kb) {
      for (HalfInt J : coupled_spins(a.irrep_spin(ka), b.irrep_spin(kb))) {
        Irrep ir;
        ir.path = a.irrep_path(ka);
        ir.path.insert(ir.path.end(), b.irrep_path(kb).begin(), b.irrep_path(kb).end());
        ir.path.push_back(J);
        ir.spin = J;
        ir.left = ka;
        ir.right = kb;
        f.irreps_.push_back(std::move(ir));
      }
    }
  }
  f.finalize();
  return f;
}

void Factor::finalize() {
  dimension_ = 0;
  state_irrep_.clear();
  for (int k = 0; k < irrep_count(); ++k) {
    irreps_[k].offset = dimension_;
    dimension_ += irreps_[k].spin.multiplicity();
    state_irrep_.insert(state_irrep_.end(), irreps_[k].spin.multiplicity(), k);
  }
}

HalfInt Factor::m_of_state(int state) const {
  const Irrep& ir = irreps_[state_irrep_[state]];
  return HalfInt::from_twice(ir.spin.twice() - 2 * (state - ir.offset));
}

BasisDescriptor::BasisDescriptor(std::vector<Factor> factors) : factors_(std::move(factors)) {
  std::set<std::string> seen;
  for (const auto& f : factors_)
    for (const auto& l : f.labels())
      if (!seen.insert(l).second) throw DomainError("BasisDescriptor: label '" + l + "' appears twice");
  strides_.assign(factors_.size(), 1);
  dimension_ = 1;
  for (std::size_t k = factors_.size(); k-- > 0;) {
    strides_[k] = dimension_;
    dimension_ *= factors_[k].dimension();
  }
}

BasisDescriptor BasisDescriptor::product(const ParticleSystem& sys) {
  std::vector<Factor> fs;
  fs.reserve(sys.size());
  for (const auto& p : sys.particles()) fs.push_back(Factor::particle(p));
  return BasisDescriptor(std::move(fs));
}

bool BasisDescriptor::is_product() const {
  return std::all_of(factors_.begin(), factors_.end(), [](const Factor& f) { return f.is_leaf(); });
}

std::size_t BasisDescriptor::factor_of(std::string_view label) const {
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    const auto ls = factors_[k].labels();
    if (std::find(ls.begin(), ls.end(), label) != ls.end()) return k;
  }
  throw DomainError("unknown particle label '" + std::string(label) + "'");
}

std::string BasisDescriptor::describe(int index) const {
  std::string out = "|";
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    const Factor& f = factors_[k];
    const int s = local_index(index, k);
    if (k > 0) out += ' ';
    if (f.is_leaf()) {
      out += f.tree().label() + ":" + f.m_of_state(s).str();
    } else {
      const int ir = f.irrep_of_state(s);
      out += f.tree().str() + " J=";
      const auto& path = f.irrep_path(ir);
      for (std::size_t q = 0; q < path.size(); ++q) out += (q ? "," : "") + path[q].str();
      out += " M=" + f.m_of_state(s).str();
    }
  }
  return out + ">";
}

}  // namespace relqm
