// relqm: tables for the relational spin-precession model.
//
// Every subcommand writes CSV: a '#' manifest line, a header row, then data
// rows with 17 significant digits.

#include <CLI11.hpp>
#include <boost/crc.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "relqm/am/clebsch_gordan.hpp"
#include "relqm/errors.hpp"
#include "relqm/maps/channels.hpp"
#include "relqm/spinnet/spin_network.hpp"
#include "relqm/toy/toy_model.hpp"

#ifndef RELQM_VERSION
#define RELQM_VERSION "dev"
#endif

namespace {

using relqm::HalfInt;
using json = nlohmann::ordered_json;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string num(HalfInt h) {
  std::ostringstream os;
  os << h;
  return os.str();
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) { row(header); }

  template <class... T>
  void add(const T&... cells) {
    row({cell(cells)...});
  }
  void comment(const std::string& text) { body_ += "# " + text + "\n"; }
  const std::string& body() const { return body_; }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double x) { return num(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(HalfInt h) { return num(h); }
  static std::string cell(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) body_ += (i ? "," : "") + cells[i];
    body_ += '\n';
  }
  std::string body_;
};

struct Output {
  std::string out;
  bool reproducible = false;
};

std::string manifest(const std::string& command, const json& params, const std::string& body, bool reproducible) {
  boost::crc_32_type crc;
  crc.process_bytes(body.data(), body.size());
  char hex[9];
  std::snprintf(hex, sizeof hex, "%08x", crc.checksum());
  json m;
  m["command"] = command;
  m["params"] = params;
  m["version"] = RELQM_VERSION;
  m["crc32"] = hex;
  if (!reproducible) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char ts[32];
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m["timestamp"] = ts;
  }
  return "# " + m.dump() + "\n";
}

void emit(const Output& o, const std::string& command, const json& params, const Table& t) {
  const std::string text = manifest(command, params, t.body(), o.reproducible) + t.body();
  if (o.out.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!(f << text)) throw std::runtime_error("cannot write " + o.out);
}

HalfInt parse_half(const std::string& s) { return HalfInt::parse(s); }

std::vector<HalfInt> parse_halves(const std::vector<std::string>& v) {
  std::vector<HalfInt> out;
  for (const auto& s : v) out.push_back(parse_half(s));
  return out;
}

std::vector<std::string> to_strings(const std::vector<HalfInt>& v) {
  std::vector<std::string> out;
  for (HalfInt h : v) out.push_back(num(h));
  return out;
}

// "x", "x,y" or "(x,y)"
relqm::cplx parse_complex(std::string s) {
  if (!s.empty() && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
  const auto comma = s.find(',');
  try {
    std::size_t used = 0;
    const std::string re = s.substr(0, comma);
    const double x = std::stod(re, &used);
    if (used != re.size()) throw std::invalid_argument(s);
    double y = 0.0;
    if (comma != std::string::npos) {
      const std::string im = s.substr(comma + 1);
      y = std::stod(im, &used);
      if (used != im.size()) throw std::invalid_argument(s);
    }
    return {x, y};
  } catch (const std::logic_error&) {
    throw relqm::DomainError("malformed complex number '" + s + "'");
  }
}

json cplx_json(relqm::cplx z) { return json::array({z.real(), z.imag()}); }

struct AmplitudeArgs {
  std::string alpha = "1";
  std::string beta = "0";
  void attach(CLI::App* app) {
    app->add_option("--alpha", alpha, "amplitude of |up>: x or x,y")->capture_default_str();
    app->add_option("--beta", beta, "amplitude of |down>: x or x,y")->capture_default_str();
  }
};

// --- subcommands --------------------------------------------------------------

struct CgArgs {
  std::string j1, m1, j2, m2, J, M;
};

void run_cg(const CgArgs& a, const Output& o) {
  const relqm::CGQuery q{parse_half(a.j1), parse_half(a.m1), parse_half(a.j2),
                         parse_half(a.m2), parse_half(a.J),  parse_half(a.M)};
  Table t({"j1", "m1", "j2", "m2", "J", "M", "coefficient"});
  t.add(q.j1, q.m1, q.j2, q.m2, q.J, q.M, relqm::clebsch_gordan(q));
  emit(o, "cg", {{"j1", num(q.j1)}, {"m1", num(q.m1)}, {"j2", num(q.j2)}, {"m2", num(q.m2)}, {"J", num(q.J)}, {"M", num(q.M)}},
       t);
}

struct LimitsArgs {
  std::vector<std::string> G{"10", "30", "100", "300"};
  std::string S = "1/2";
  std::string s = "-1/2";
};

void run_limits(const LimitsArgs& a, const Output& o) {
  const HalfInt S = parse_half(a.S), s = parse_half(a.s);
  const auto Gs = parse_halves(a.G);
  Table t({"G", "squared_coefficient"});
  for (HalfInt G : Gs) t.add(G, relqm::cg_limit_parallel(S, s, G));
  emit(o, "limits", {{"G", to_strings(Gs)}, {"S", num(S)}, {"s", num(s)}}, t);
}

struct Fig1aArgs {
  std::string C = "20";
  int Lambda = 10;
  AmplitudeArgs amp;
};

void run_fig1a(const Fig1aArgs& a, const Output& o) {
  relqm::ToyModelConfig cfg;
  cfg.C = parse_half(a.C);
  cfg.Lambda = a.Lambda;
  cfg.alpha = parse_complex(a.amp.alpha);
  cfg.beta = parse_complex(a.amp.beta);
  Table t({"u", "P_u", "arcsine_reference"});
  for (const auto& r : relqm::fig1a_distribution(cfg)) t.add(r.u, r.p_u, r.arcsine);
  emit(o, "fig1a",
       {{"C", num(cfg.C)}, {"Lambda", cfg.Lambda}, {"alpha", cplx_json(cfg.alpha)}, {"beta", cplx_json(cfg.beta)}}, t);
}

struct Fig1bArgs {
  std::vector<std::string> C{"20", "40", "100"};
  int Lambda = 10;
  AmplitudeArgs amp;
  std::vector<double> theta;
  int points = 181;
  double clock_ratio = 0.0;
};

void run_fig1b(const Fig1bArgs& a, const Output& o) {
  relqm::ToyModelConfig cfg;
  cfg.Lambda = a.Lambda;
  cfg.alpha = parse_complex(a.amp.alpha);
  cfg.beta = parse_complex(a.amp.beta);
  cfg.clock_ratio = a.clock_ratio;
  cfg.theta_grid = a.theta;
  if (cfg.theta_grid.empty()) {
    if (a.points < 2) throw relqm::DomainError("--points must be at least 2");
    for (int k = 0; k < a.points; ++k) cfg.theta_grid.push_back(std::numbers::pi * k / (a.points - 1));
  }
  const auto Cs = parse_halves(a.C);
  Table t({"theta", "C", "u", "P_antiparallel", "orthodox_reference"});
  for (HalfInt C : Cs) {
    cfg.C = C;
    for (const auto& p : relqm::fig1b_curve(cfg)) t.add(p.theta, C, p.u, p.p_antiparallel, p.orthodox);
  }
  emit(o, "fig1b",
       {{"C", to_strings(Cs)},
        {"Lambda", cfg.Lambda},
        {"alpha", cplx_json(cfg.alpha)},
        {"beta", cplx_json(cfg.beta)},
        {"clock_ratio", cfg.field_ratio()},
        {"theta", cfg.theta_grid}},
       t);
}

struct NssArgs {
  std::vector<std::string> spins;
  std::vector<std::string> labels;
  std::string tree;
  std::string graph;
};

void run_nss(const NssArgs& a, const Output& o) {
  const auto spins = parse_halves(a.spins);
  if (!a.labels.empty() && a.labels.size() != spins.size())
    throw relqm::DomainError("--labels needs one label per spin");
  std::vector<relqm::Particle> ps;
  for (std::size_t k = 0; k < spins.size(); ++k)
    ps.push_back({a.labels.empty() ? "p" + std::to_string(k + 1) : a.labels[k], spins[k]});
  const relqm::ParticleSystem sys(ps);
  const relqm::CouplingTree tree =
      a.tree.empty() ? relqm::sequential_tree(sys) : relqm::CouplingTree::parse(a.tree);
  const relqm::IrrepDecomposition dec = relqm::decompose_su2(sys, tree);

  Table t({"J", "m_J", "n_J"});
  for (const auto& s : dec.sectors()) t.add(s.J, s.m_dim, s.n_mult);

  if (!a.graph.empty()) {
    std::ofstream f(a.graph, std::ios::binary);
    if (!(f << relqm::to_jsonl(relqm::SpinNetwork::from_coupling_tree(sys, tree))))
      throw std::runtime_error("cannot write " + a.graph);
  }
  std::vector<std::string> labels;
  for (const auto& p : ps) labels.push_back(p.label);
  emit(o, "nss", {{"spins", to_strings(spins)}, {"labels", labels}, {"tree", tree.str()}}, t);
}

struct ExactArgs {
  AmplitudeArgs amp;
  std::string M = "2", N = "1", C = "2", G = "4";
  double lambda = 1.0;
};

void run_exact(const ExactArgs& a, const Output& o) {
  relqm::ExactPipelineConfig cfg;
  cfg.alpha = parse_complex(a.amp.alpha);
  cfg.beta = parse_complex(a.amp.beta);
  cfg.M = parse_half(a.M);
  cfg.N = parse_half(a.N);
  cfg.C = parse_half(a.C);
  cfg.G = parse_half(a.G);
  cfg.lambda = a.lambda;
  const relqm::ExactPipelineResult r = relqm::exact_pipeline(cfg);
  Table t({"u", "P_u_exact", "P_u_closed", "P_antiparallel_exact", "P_antiparallel_closed"});
  for (const auto& row : r.rows)
    t.add(row.u, row.p_u_exact, row.p_u_closed, row.p_antiparallel_exact, row.p_antiparallel_closed);
  t.comment("dimension=" + std::to_string(r.dimension) + " tv_distance=" + num(r.tv_distance));
  emit(o, "exact-demo",
       {{"alpha", cplx_json(cfg.alpha)},
        {"beta", cplx_json(cfg.beta)},
        {"M", num(cfg.M)},
        {"N", num(cfg.N)},
        {"C", num(cfg.C)},
        {"G", num(cfg.G)},
        {"lambda", cfg.lambda}},
       t);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relational quantum mechanics: angular-momentum tables and the clock-gyroscope model"};
  app.require_subcommand(1);
  app.fallthrough();
  Output out;
  app.add_option("--out", out.out, "write to this file instead of standard output");
  app.add_flag("--reproducible", out.reproducible, "omit the timestamp from the manifest");

  CgArgs cg;
  auto* c_cg = app.add_subcommand("cg", "Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>");
  c_cg->add_option("--j1", cg.j1)->required();
  c_cg->add_option("--m1", cg.m1)->required();
  c_cg->add_option("--j2", cg.j2)->required();
  c_cg->add_option("--m2", cg.m2)->required();
  c_cg->add_option("--J", cg.J)->required();
  c_cg->add_option("--M", cg.M)->required();

  LimitsArgs lim;
  auto* c_lim = app.add_subcommand("limits", "aligned-coupling weight against a spin-G gyroscope");
  c_lim->add_option("--G", lim.G, "gyroscope spins")->delimiter(',')->capture_default_str();
  c_lim->add_option("--S", lim.S)->capture_default_str();
  c_lim->add_option("--s", lim.s)->capture_default_str();

  Fig1aArgs f1a;
  auto* c_f1a = app.add_subcommand("fig1a", "clock-reading distribution P(u)");
  c_f1a->add_option("--C", f1a.C, "clock spin")->capture_default_str();
  c_f1a->add_option("--Lambda", f1a.Lambda, "magnet ratio M/N, even")->capture_default_str();
  f1a.amp.attach(c_f1a);

  Fig1bArgs f1b;
  auto* c_f1b = app.add_subcommand("fig1b", "P(antiparallel | clock reading theta)");
  c_f1b->add_option("--C", f1b.C, "clock spins")->delimiter(',')->capture_default_str();
  c_f1b->add_option("--Lambda", f1b.Lambda, "magnet ratio M/N, even")->capture_default_str();
  f1b.amp.attach(c_f1b);
  c_f1b->add_option("--theta", f1b.theta, "readings in [0, pi]")->delimiter(',');
  c_f1b->add_option("--points", f1b.points, "uniform grid over [0, pi] when --theta is absent")->capture_default_str();
  c_f1b->add_option("--clock-ratio", f1b.clock_ratio, "B/B', 0 for Lambda")->capture_default_str();

  NssArgs nss;
  auto* c_nss = app.add_subcommand("nss", "irrep content J, 2J+1, multiplicity");
  c_nss->add_option("--spins", nss.spins, "particle spins")->delimiter(',')->required();
  c_nss->add_option("--labels", nss.labels, "particle labels")->delimiter(',');
  c_nss->add_option("--tree", nss.tree, "coupling tree, e.g. ((a,b),c)");
  c_nss->add_option("--graph", nss.graph, "also write the spin network as JSON lines");

  ExactArgs ex;
  auto* c_ex = app.add_subcommand("exact-demo", "exact engine vs closed form for small spins");
  ex.amp.attach(c_ex);
  c_ex->add_option("--M", ex.M)->capture_default_str();
  c_ex->add_option("--N", ex.N)->capture_default_str();
  c_ex->add_option("--C", ex.C)->capture_default_str();
  c_ex->add_option("--G", ex.G)->capture_default_str();
  c_ex->add_option("--lambda", ex.lambda)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "relqm: " << e.what() << '\n';
    return 2;
  }

  try {
    if (c_cg->parsed()) run_cg(cg, out);
    if (c_lim->parsed()) run_limits(lim, out);
    if (c_f1a->parsed()) run_fig1a(f1a, out);
    if (c_f1b->parsed()) run_fig1b(f1b, out);
    if (c_nss->parsed()) run_nss(nss, out);
    if (c_ex->parsed()) run_exact(ex, out);
  } catch (const relqm::DomainError& e) {
    std::cerr << "relqm: " << e.what() << '\n';
    return 2;
  } catch (const relqm::AccuracyError& e) {
    std::cerr << "relqm: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "relqm: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
