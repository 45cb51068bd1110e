#include "relqm/toy/toy_model.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "detail/compensated_sum.hpp"
#include "relqm/am/coherent_state.hpp"
#include "relqm/am/log_factorial.hpp"
#include "relqm/am/wigner_d.hpp"
#include "relqm/composite/recoupling.hpp"
#include "relqm/errors.hpp"
#include "relqm/maps/channels.hpp"

namespace relqm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxTwiceClock = 800;

void require_normalized(cplx alpha, cplx beta, const char* what) {
  const double n = std::norm(alpha) + std::norm(beta);
  if (std::abs(n - 1.0) > 1e-12) {
    throw DomainError(std::string(what) + ": |alpha|^2 + |beta|^2 = " + std::to_string(n) + ", expected 1");
  }
}

Eigen::VectorXcd kron(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  Eigen::VectorXcd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

Eigen::VectorXcd spinor(cplx alpha, cplx beta) {
  Eigen::VectorXcd v(2);
  v << alpha, beta;
  return v;
}

Eigen::VectorXcd basis_vector(int n, int k) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
  v(k) = 1.0;
  return v;
}

// Energy of the Heisenberg coupling -2 lambda J^a . J^b on a coupled irrep J.
double heisenberg_energy(double lambda, HalfInt J, HalfInt a, HalfInt b) {
  return -lambda * (J.casimir() - a.casimir() - b.casimir());
}

}  // namespace

void ToyModelConfig::validate() const {
  require_normalized(alpha, beta, "ToyModelConfig");
  if (Lambda <= 0 || Lambda % 2 != 0) {
    throw DomainError("ToyModelConfig: Lambda must be a positive even integer, got " + std::to_string(Lambda));
  }
  require_spin(C, "ToyModelConfig(C)");
  for (double th : theta_grid) {
    if (!(th >= 0.0 && th <= kPi)) throw DomainError("ToyModelConfig: theta " + std::to_string(th) + " outside [0, pi]");
  }
  if (clock_ratio < 0.0) throw DomainError("ToyModelConfig: negative clock ratio");
  if (g_mode == GyroscopeMode::finite && G.twice() < 1) {
    throw DomainError("ToyModelConfig: finite gyroscope needs G >= 1/2");
  }
}

SpinAmplitudes orthodox_amplitudes(cplx alpha, cplx beta, double B, double t) {
  const double c = std::cos(B * t / 2), s = std::sin(B * t / 2);
  const cplx i(0.0, 1.0);
  return {alpha * c + i * beta * s, i * alpha * s + beta * c};
}

DensityOperator orthodox_measurement_joint(cplx alpha, cplx beta) {
  require_normalized(alpha, beta, "orthodox_measurement_joint");
  ParticleSystem sys({{"S", kHalf}, {"A", kHalf}});
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(4, 4);
  rho(0, 0) = std::norm(alpha);
  rho(3, 3) = std::norm(beta);
  return DensityOperator(BasisDescriptor::product(sys), rho);
}

MeasurementProbabilities measurement_probabilities(cplx alpha, cplx beta, HalfInt G) {
  require_normalized(alpha, beta, "measurement_probabilities");
  if (G.twice() < 1) throw DomainError("measurement_probabilities: gyroscope spin must be at least 1/2");
  ParticleSystem sys({{"S", kHalf}, {"G", G}});
  const Eigen::VectorXcd psi = kron(spinor(alpha, beta), basis_vector(G.multiplicity(), 0));
  const IrrepDecomposition dec = decompose_su2(sys);
  const PhysicalState ps = rotation_twirl(pure_state(sys, psi), dec);
  MeasurementProbabilities out;
  if (const auto* s = ps.find(G + kHalf)) out.parallel = s->probability;
  if (const auto* s = ps.find(G - kHalf)) out.antiparallel = s->probability;
  return out;
}

MeasurementProbabilities measurement_probabilities(const ToyModelConfig& cfg) {
  cfg.validate();
  if (cfg.g_mode != GyroscopeMode::finite) {
    return {std::norm(cfg.alpha), std::norm(cfg.beta)};
  }
  return measurement_probabilities(cfg.alpha, cfg.beta, cfg.G);
}

ParticleSystem magnet_system(HalfInt M) { return ParticleSystem({{"S", kHalf}, {"M", M}}); }

Eigen::VectorXcd magnet_state_exact(cplx alpha, cplx beta, HalfInt M, double lambda, double t) {
  require_normalized(alpha, beta, "magnet_state_exact");
  require_spin(M, "magnet_state_exact(M)");
  const ParticleSystem sys = magnet_system(M);
  if (sys.dimension() > kMaxDenseDimension) {
    throw DimensionError("magnet_state_exact: dimension " + std::to_string(sys.dimension()) + " exceeds " +
                         std::to_string(kMaxDenseDimension));
  }
  const Eigen::VectorXcd psi0 =
      kron(spinor(alpha, beta), coherent_state_amplitudes(M, Axis::x).cast<cplx>());
  const RecouplingMap map = couple_pair(BasisDescriptor::product(sys), "S", "M");
  Eigen::VectorXcd coupled = map.to_target(psi0);
  const Factor& f = map.target().factor(0);
  for (int i = 0; i < f.dimension(); ++i) {
    const double e = heisenberg_energy(lambda, f.irrep_spin(f.irrep_of_state(i)), kHalf, M);
    coupled(i) *= std::polar(1.0, -e * t);
  }
  return map.to_source(coupled);
}

DensityOperator magnet_dynamics_exact(cplx alpha, cplx beta, HalfInt M, double lambda, double t) {
  return pure_state(magnet_system(M), magnet_state_exact(alpha, beta, M, lambda, t));
}

cplx magnet_correction_formula(cplx alpha, cplx beta, HalfInt M, double lambda, double t) {
  const double twoM1 = M.twice() + 1.0;
  const double B = lambda * twoM1;
  return cplx(0.0, 1.0) * std::sqrt(M.value()) * 2.0 * (alpha - beta) * std::sin(B * t / 2) / twoM1;
}

Eigen::VectorXcd magnet_state_closed_form(cplx alpha, cplx beta, HalfInt M, double lambda, double t) {
  require_spin(M, "magnet_state_closed_form(M)");
  if (M.twice() < 1) throw DomainError("magnet_state_closed_form: M must be at least 1/2");
  const SpinAmplitudes a = orthodox_amplitudes(alpha, beta, lambda * (M.twice() + 1), t);
  const Eigen::VectorXcd x0 = wigner_small_d_column(M, M, kPi / 2).cast<cplx>();
  const Eigen::VectorXcd x1 = wigner_small_d_column(M, M - 1_hi, kPi / 2).cast<cplx>();
  const cplx c = magnet_correction_formula(alpha, beta, M, lambda, t);
  return kron(spinor(a.alpha, a.beta), x0) +
         c * (kron(spinor(0.0, 1.0), x0) / std::sqrt(M.twice()) + kron(spinor(1.0, 0.0), x1));
}

cplx magnet_correction_exact(const Eigen::VectorXcd& psi, HalfInt M) {
  const int n = M.multiplicity();
  if (psi.size() != 2 * n) throw DimensionError("magnet_correction_exact: state does not match the magnet spin");
  if (M.twice() < 1) throw DomainError("magnet_correction_exact: M must be at least 1/2");
  const Eigen::VectorXd x1 = wigner_small_d_column(M, M - 1_hi, kPi / 2);
  return (x1.cast<cplx>().array() * psi.head(n).array()).sum();
}

RelationalState RelationalState::build(const ToyModelConfig& cfg) {
  cfg.validate();
  if (cfg.g_mode != GyroscopeMode::asymptotic) {
    throw DomainError("RelationalState: the closed form needs an asymptotic gyroscope; use exact_pipeline");
  }
  if (cfg.C.twice() > kMaxTwiceClock) {
    throw AccuracyError("RelationalState: clock spin " + cfg.C.str() + " exceeds the supported maximum of 400");
  }
  RelationalState st;
  st.C_ = cfg.C;
  st.Lambda_ = cfg.Lambda;
  const int c2 = cfg.C.twice(), n = cfg.C.multiplicity();
  const Eigen::MatrixXd d = wigner_small_d_matrix(cfg.C, kPi / 2).matrix();

  // 2^{-C} C(2C, C+k)^{1/2}, index i <-> k = C - i
  Eigen::VectorXd root_w(n);
  for (int i = 0; i < n; ++i) {
    root_w(i) = std::exp(0.5 * log_binomial(c2, c2 - i) - 0.5 * c2 * std::numbers::ln2);
  }
  const double r2 = std::sqrt(0.5);
  const cplx a[2] = {(cfg.alpha + cfg.beta) * r2, (cfg.alpha - cfg.beta) * r2};  // s = +1/2, -1/2
  // <r|s>_x for r, s in (+1/2, -1/2)
  const double overlap[2][2] = {{r2, r2}, {r2, -r2}};

  st.blocks_.resize(n);
  for (int iu = 0; iu < n; ++iu) {
    detail::CompensatedSum<double> acc[2][2][2];
    for (int c = -c2 - cfg.Lambda; c <= c2 + cfg.Lambda; c += 2) {
      cplx v[2] = {0.0, 0.0};
      for (int s = 0; s < 2; ++s) {
        const int k2 = c + (s == 0 ? cfg.Lambda : -cfg.Lambda);
        if (k2 > c2 || k2 < -c2) continue;
        const int ik = (c2 - k2) / 2;
        const cplx amp = a[s] * root_w(ik) * d(iu, ik);
        for (int r = 0; r < 2; ++r) v[r] += overlap[r][s] * amp;
      }
      for (int r = 0; r < 2; ++r)
        for (int rp = 0; rp < 2; ++rp) {
          const cplx e = v[r] * std::conj(v[rp]);
          acc[r][rp][0].add(e.real());
          acc[r][rp][1].add(e.imag());
        }
    }
    Eigen::Matrix2cd b;
    for (int r = 0; r < 2; ++r)
      for (int rp = 0; rp < 2; ++rp) b(r, rp) = cplx(acc[r][rp][0].value(), acc[r][rp][1].value());
    st.blocks_[iu] = b;
  }
  return st;
}

int RelationalState::index_of(HalfInt u) const {
  if (!is_projection_of(u, C_)) return -1;
  return (C_.twice() - u.twice()) / 2;
}

double RelationalState::joint(int i, HalfInt r) const {
  if (r == kHalf) return blocks_[i](0, 0).real();
  if (r == -kHalf) return blocks_[i](1, 1).real();
  throw DomainError("RelationalState::joint: r must be +1/2 or -1/2");
}

std::optional<double> RelationalState::antiparallel_given(int i) const {
  const double p = p_u(i);
  if (p < kNullReadingThreshold) return std::nullopt;
  return blocks_[i](1, 1).real() / p;
}

double RelationalSpectrumTable::total_probability() const {
  detail::CompensatedSum<double> s;
  for (const auto& r : rows) s.add(r.p_u);
  return s.value();
}

RelationalSpectrumTable spectrum_table(const RelationalState& state) {
  RelationalSpectrumTable t;
  for (int i = 0; i < state.size(); ++i) t.rows.push_back({state.u(i), state.p_u(i), state.antiparallel_given(i)});
  return t;
}

std::vector<Fig1aRow> fig1a_distribution(const ToyModelConfig& cfg) {
  const RelationalState st = RelationalState::build(cfg);
  const double C = cfg.C.value();
  std::vector<Fig1aRow> out;
  for (int i = 0; i < st.size(); ++i) {
    const double u = st.u(i).value();
    const double gap = C * C - u * u;
    out.push_back({st.u(i), st.p_u(i), gap > 0 ? 1.0 / (kPi * std::sqrt(gap)) : HUGE_VAL});
  }
  return out;
}

HalfInt nearest_reading(HalfInt C, double theta) {
  const long steps = static_cast<long>(std::ceil(C.value() - C.value() * std::cos(theta) - 0.5));
  const long i = std::clamp<long>(steps, 0, C.twice());
  return C - HalfInt::from_int(static_cast<int>(i));
}

std::vector<Fig1bPoint> fig1b_curve(const ToyModelConfig& cfg) {
  return fig1b_curve(cfg, RelationalState::build(cfg));
}

std::vector<Fig1bPoint> fig1b_curve(const ToyModelConfig& cfg, const RelationalState& state) {
  std::vector<double> grid = cfg.theta_grid;
  if (grid.empty()) {
    for (int i = 0; i < state.size(); ++i) {
      const double c = state.C().value();
      grid.push_back(c > 0 ? std::acos(std::clamp(state.u(i).value() / c, -1.0, 1.0)) : 0.0);
    }
  }
  const double B = cfg.field_ratio();
  std::vector<Fig1bPoint> out;
  for (double th : grid) {
    const HalfInt u = nearest_reading(state.C(), th);
    const int i = state.index_of(u);
    const auto ap = state.antiparallel_given(i);
    if (!ap) {
      throw NullEventError("fig1b_curve: clock reading u = " + u.str() + " has probability " +
                           std::to_string(state.p_u(i)));
    }
    out.push_back({th, u, state.p_u(i), *ap, std::norm(orthodox_amplitudes(cfg.alpha, cfg.beta, B, th).beta)});
  }
  return out;
}

GaussianKernel::GaussianKernel(double sigma, int order) : sigma_(sigma) {
  if (!(sigma >= 0.0)) throw DomainError("GaussianKernel: sigma must be non-negative");
  if (order < 1) throw DomainError("GaussianKernel: order must be positive");
  if (sigma == 0.0) {
    unit_ = {{0.0, 1.0}};
    return;
  }
  std::unique_ptr<gsl_integration_fixed_workspace, decltype(&gsl_integration_fixed_free)> ws(
      gsl_integration_fixed_alloc(gsl_integration_fixed_hermite, static_cast<std::size_t>(order), 0.0, 0.5, 0.0, 0.0),
      &gsl_integration_fixed_free);
  if (!ws) throw Error("GaussianKernel: quadrature allocation failed");
  const double* x = gsl_integration_fixed_nodes(ws.get());
  const double* w = gsl_integration_fixed_weights(ws.get());
  double total = 0.0;
  for (int i = 0; i < order; ++i) total += w[i];
  for (int i = 0; i < order; ++i) unit_.emplace_back(x[i], w[i] / total);
}

std::vector<std::pair<double, double>> GaussianKernel::nodes(double t0) const {
  std::vector<std::pair<double, double>> out;
  out.reserve(unit_.size());
  for (const auto& [x, w] : unit_) out.emplace_back(t0 + sigma_ * x, w);
  return out;
}

TabulatedKernel::TabulatedKernel(std::vector<double> offsets, std::vector<double> weights) {
  if (offsets.size() != weights.size() || offsets.empty()) {
    throw DomainError("TabulatedKernel: need matching, non-empty offsets and weights");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("TabulatedKernel: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw DomainError("TabulatedKernel: weights sum to zero");
  for (std::size_t i = 0; i < offsets.size(); ++i) rule_.emplace_back(offsets[i], weights[i] / total);
}

std::vector<std::pair<double, double>> TabulatedKernel::nodes(double t0) const {
  auto out = rule_;
  for (auto& p : out) p.first += t0;
  return out;
}

Eigen::Matrix2cd smeared_state(cplx alpha, cplx beta, double B, const TimeKernel& kernel, double t0) {
  require_normalized(alpha, beta, "smeared_state");
  Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
  for (const auto& [t, w] : kernel.nodes(t0)) {
    const SpinAmplitudes a = orthodox_amplitudes(alpha, beta, B, t);
    Eigen::Vector2cd v(a.alpha, a.beta);
    rho += w * v * v.adjoint();
  }
  return rho;
}

std::vector<EnvelopePoint> decoherence_envelope(const ToyModelConfig& cfg, const TimeKernel& kernel) {
  cfg.validate();
  std::vector<double> grid = cfg.theta_grid;
  if (grid.empty()) {
    for (int i = 0; i <= 180; ++i) grid.push_back(kPi * i / 180.0);
  }
  const double B = cfg.field_ratio();
  std::vector<EnvelopePoint> out;
  for (double th : grid) {
    const Eigen::Matrix2cd rho = smeared_state(cfg.alpha, cfg.beta, B, kernel, th);
    out.push_back({th, rho(1, 1).real(), std::norm(orthodox_amplitudes(cfg.alpha, cfg.beta, B, th).beta)});
  }
  return out;
}

ExactPipelineResult exact_pipeline(const ExactPipelineConfig& cfg) {
  require_normalized(cfg.alpha, cfg.beta, "exact_pipeline");
  for (HalfInt j : {cfg.M, cfg.N, cfg.C, cfg.G}) require_spin(j, "exact_pipeline");
  if (cfg.N.twice() < 1 || cfg.M.twice() % cfg.N.twice() != 0 || (cfg.M.twice() / cfg.N.twice()) % 2 != 0) {
    throw DomainError("exact_pipeline: M/N must be an even integer");
  }
  if (cfg.G < cfg.C) throw DomainError("exact_pipeline: the gyroscope must be at least as large as the clock");
  const int Lambda = cfg.M.twice() / cfg.N.twice();

  const ParticleSystem sys({{"S", kHalf}, {"M", cfg.M}, {"N", cfg.N}, {"C", cfg.C}, {"G", cfg.G}});
  if (sys.dimension() > kMaxDenseDimension) {
    throw DimensionError("exact_pipeline: dimension " + std::to_string(sys.dimension()) + " exceeds " +
                         std::to_string(kMaxDenseDimension));
  }
  Eigen::VectorXcd psi = spinor(cfg.alpha, cfg.beta);
  psi = kron(psi, coherent_state_amplitudes(cfg.M, Axis::x).cast<cplx>());
  psi = kron(psi, coherent_state_amplitudes(cfg.N, Axis::x).cast<cplx>());
  psi = kron(psi, coherent_state_amplitudes(cfg.C, Axis::z).cast<cplx>());
  psi = kron(psi, coherent_state_amplitudes(cfg.G, Axis::z).cast<cplx>());
  const DensityOperator rho0 = pure_state(sys, psi);

  // Time average where H = -2 lambda (J^M . sigma^S + J^N . J^C) is diagonal.
  const RecouplingMap sm = couple_pair(rho0.basis(), "S", "M");
  const RecouplingMap energy_map = compose(sm, couple_pair(sm.target(), "C", "N"));
  const BasisDescriptor& eb = energy_map.target();
  const std::size_t fsm = eb.factor_of("S"), fcn = eb.factor_of("C");
  Eigen::VectorXd energies(eb.dimension());
  for (int i = 0; i < eb.dimension(); ++i) {
    const Factor& a = eb.factor(fsm);
    const Factor& b = eb.factor(fcn);
    energies(i) = heisenberg_energy(cfg.lambda, a.irrep_spin(a.irrep_of_state(eb.local_index(i, fsm))), kHalf, cfg.M) +
                  heisenberg_energy(cfg.lambda, b.irrep_spin(b.irrep_of_state(eb.local_index(i, fcn))), cfg.C, cfg.N);
  }
  const DensityOperator averaged = to_source(time_average_diagonal(to_target(rho0, energy_map), energies), energy_map);

  const IrrepDecomposition dec = decompose_su2(sys, CouplingTree::parse("((((C,G),S),M),N)"));
  const PhysicalState ps = rotation_twirl(averaged, dec);

  ToyModelConfig closed_cfg;
  closed_cfg.alpha = cfg.alpha;
  closed_cfg.beta = cfg.beta;
  closed_cfg.C = cfg.C;
  closed_cfg.Lambda = Lambda;
  const RelationalState closed = RelationalState::build(closed_cfg);

  ExactPipelineResult out;
  out.dimension = static_cast<int>(sys.dimension());
  double tv = 0.0;
  for (int i = 0; i < closed.size(); ++i) {
    ExactPipelineRow row;
    row.u = closed.u(i);
    const HalfInt jcg = cfg.G + row.u;
    double ap_exact = 0.0;
    try {
      const ConditionalResult reading =
          conditional_update(ps, [&](HalfInt, const CouplingPath& p) { return p[0] == jcg; });
      row.p_u_exact = reading.probability;
      try {
        ap_exact = conditional_update(reading.state, [&](HalfInt, const CouplingPath& p) {
                     return p[1] == jcg - kHalf;
                   }).probability;
      } catch (const NullEventError&) {
        ap_exact = 0.0;
      }
      row.p_antiparallel_exact = ap_exact;
    } catch (const NullEventError&) {
      row.p_u_exact = 0.0;
    }
    row.p_u_closed = closed.p_u(i);
    row.p_antiparallel_closed = closed.antiparallel_given(i);
    const double e_ap = row.p_u_exact * ap_exact;
    tv += std::abs(e_ap - closed.joint(i, -kHalf)) + std::abs(row.p_u_exact - e_ap - closed.joint(i, kHalf));
    out.rows.push_back(row);
  }
  out.tv_distance = 0.5 * tv;
  return out;
}

}  // namespace relqm
