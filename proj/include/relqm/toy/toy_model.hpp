#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "relqm/am/half_int.hpp"
#include "relqm/composite/density.hpp"

namespace relqm {

using cplx = std::complex<double>;

enum class GyroscopeMode { asymptotic, finite };

/// Parameters of the relational spin-precession model: system amplitudes,
/// clock spin C, magnet ratio Lambda = M/N and the clock-reading grid.
struct ToyModelConfig {
  cplx alpha{1.0, 0.0};
  cplx beta{0.0, 0.0};
  HalfInt C = HalfInt::from_int(20);
  int Lambda = 10;
  GyroscopeMode g_mode = GyroscopeMode::asymptotic;
  HalfInt G = HalfInt::from_int(0);  ///< finite mode only
  /// Clock readings in [0, pi]. Empty selects every realized u.
  std::vector<double> theta_grid;
  /// B/B', the ratio of the system's precession rate to the clock's. Zero
  /// selects Lambda.
  double clock_ratio = 0.0;

  /// DomainError unless |alpha|^2 + |beta|^2 = 1 to 1e-12, Lambda is positive
  /// and even, C >= 0, the grid lies in [0, pi] and, in finite mode, G >= 1/2.
  void validate() const;
  double field_ratio() const { return clock_ratio > 0.0 ? clock_ratio : static_cast<double>(Lambda); }
};

struct SpinAmplitudes {
  cplx alpha, beta;
};

/// Precession of alpha|up> + beta|down> under H = -B sigma_x.
SpinAmplitudes orthodox_amplitudes(cplx alpha, cplx beta, double B, double t);

/// |alpha|^2 |up,up><up,up| + |beta|^2 |down,down><down,down| on system "S" and
/// apparatus "A": the outcome record of an ideal measurement.
DensityOperator orthodox_measurement_joint(cplx alpha, cplx beta);

struct MeasurementProbabilities {
  double parallel = 0.0;
  double antiparallel = 0.0;
};

/// Relational measurement against a spin-G gyroscope |G,G>: the system and
/// gyroscope are twirled exactly and the J = G +- 1/2 sector weights read off.
MeasurementProbabilities measurement_probabilities(cplx alpha, cplx beta, HalfInt G);
MeasurementProbabilities measurement_probabilities(const ToyModelConfig& cfg);

/// System "S" (spin 1/2) and magnet "M" in the product basis, S slowest.
ParticleSystem magnet_system(HalfInt M);

/// exp(-iHt) (alpha|up> + beta|down>) |M,M>_x with H = -2 lambda J^M . sigma^S,
/// evaluated in the coupled (S,M) basis. sigma is the spin-1/2 operator, so
/// the precession rate is B = lambda (2M+1).
Eigen::VectorXcd magnet_state_exact(cplx alpha, cplx beta, HalfInt M, double lambda, double t);
DensityOperator magnet_dynamics_exact(cplx alpha, cplx beta, HalfInt M, double lambda, double t);

/// The large-M form |M,M>_x |psi(t)> + C(t) [ |M,M>_x |down> / sqrt(2M) +
/// |M,M-1>_x |up> ], unnormalized, same basis as magnet_state_exact.
Eigen::VectorXcd magnet_state_closed_form(cplx alpha, cplx beta, HalfInt M, double lambda, double t);

/// C(t) = i sqrt(M) 2 (alpha - beta) sin(Bt/2) / (2M+1).
cplx magnet_correction_formula(cplx alpha, cplx beta, HalfInt M, double lambda, double t);

/// <up| <M,M-1|_x psi>, the exact counterpart of C(t).
cplx magnet_correction_exact(const Eigen::VectorXcd& psi, HalfInt M);

/// Relational state of system, clock and gyroscope after both group averages,
/// in the limit of macroscopic gyroscope and magnets. Stored as one 2x2 block
/// over the system label r = +1/2, -1/2 per clock value u = C..-C; the joint
/// spins are J^{CG} = G + u and J^{SCG} = G + u + r.
class RelationalState {
 public:
  /// Accepts C <= 400; AccuracyError beyond. Asymptotic mode only.
  static RelationalState build(const ToyModelConfig& cfg);

  HalfInt C() const { return C_; }
  int Lambda() const { return Lambda_; }
  int size() const { return static_cast<int>(blocks_.size()); }
  HalfInt u(int i) const { return C_ - HalfInt::from_int(i); }
  /// Row index of u, or -1 when u is not a projection of C.
  int index_of(HalfInt u) const;
  const Eigen::Matrix2cd& block(int i) const { return blocks_[i]; }
  double p_u(int i) const { return blocks_[i].trace().real(); }
  /// P(r, u) for r = +1/2 (parallel) or -1/2 (antiparallel).
  double joint(int i, HalfInt r) const;
  /// P(r = -1/2 | u); empty when P(u) < 1e-14.
  std::optional<double> antiparallel_given(int i) const;

 private:
  HalfInt C_;
  int Lambda_ = 0;
  std::vector<Eigen::Matrix2cd> blocks_;
};

inline constexpr double kNullReadingThreshold = 1e-14;

struct SpectrumRow {
  HalfInt u;
  double p_u = 0.0;
  std::optional<double> p_antiparallel;
};

struct RelationalSpectrumTable {
  std::vector<SpectrumRow> rows;
  double total_probability() const;
};

RelationalSpectrumTable spectrum_table(const RelationalState& state);

struct Fig1aRow {
  HalfInt u;
  double p_u = 0.0;
  double arcsine = 0.0;  ///< 1/(pi sqrt(C^2 - u^2)), +inf at the endpoints
};

std::vector<Fig1aRow> fig1a_distribution(const ToyModelConfig& cfg);

struct Fig1bPoint {
  double theta = 0.0;  ///< requested reading
  HalfInt u;           ///< nearest realized clock value
  double p_u = 0.0;
  double p_antiparallel = 0.0;
  double orthodox = 0.0;  ///< |beta(t)|^2 at t = theta / B'
};

/// Nearest u in C, C-1, ..., -C to C cos(theta); ties go to the larger u.
HalfInt nearest_reading(HalfInt C, double theta);

/// P(antiparallel | theta) over cfg.theta_grid. NullEventError when a reading
/// has P(u) < 1e-14.
std::vector<Fig1bPoint> fig1b_curve(const ToyModelConfig& cfg);
std::vector<Fig1bPoint> fig1b_curve(const ToyModelConfig& cfg, const RelationalState& state);

/// Distribution of the external time t given the calibrated time t0 of a clock
/// reading, as a quadrature rule.
class TimeKernel {
 public:
  virtual ~TimeKernel() = default;
  /// Pairs (t_i, w_i) with weights summing to 1.
  virtual std::vector<std::pair<double, double>> nodes(double t0) const = 0;
};

class DeltaKernel final : public TimeKernel {
 public:
  std::vector<std::pair<double, double>> nodes(double t0) const override { return {{t0, 1.0}}; }
};

/// Normal distribution of width sigma, Gauss-Hermite rule of `order` nodes.
class GaussianKernel final : public TimeKernel {
 public:
  explicit GaussianKernel(double sigma, int order = 96);
  double sigma() const { return sigma_; }
  std::vector<std::pair<double, double>> nodes(double t0) const override;

 private:
  double sigma_;
  std::vector<std::pair<double, double>> unit_;  // standard normal rule
};

/// Arbitrary offsets from t0 with normalized weights.
class TabulatedKernel final : public TimeKernel {
 public:
  TabulatedKernel(std::vector<double> offsets, std::vector<double> weights);
  std::vector<std::pair<double, double>> nodes(double t0) const override;

 private:
  std::vector<std::pair<double, double>> rule_;
};

/// Smeared system state sum_i w_i |psi(t_i)><psi(t_i)| under H = -B sigma_x.
Eigen::Matrix2cd smeared_state(cplx alpha, cplx beta, double B, const TimeKernel& kernel, double t0);

struct EnvelopePoint {
  double theta = 0.0;
  double p_antiparallel = 0.0;  ///< smeared |beta|^2
  double orthodox = 0.0;
};

/// The clock's B' is the time unit, so t0 = theta and B = cfg.field_ratio().
/// Uses cfg.theta_grid, or 0..pi in 181 steps when it is empty.
std::vector<EnvelopePoint> decoherence_envelope(const ToyModelConfig& cfg, const TimeKernel& kernel);

/// Full-size check of the asymptotic formula: system, magnets M and N, clock C
/// and gyroscope G evolved, averaged over time and rotations, then conditioned
/// on the clock reading, all in the exact engine.
struct ExactPipelineConfig {
  cplx alpha{1.0, 0.0};
  cplx beta{0.0, 0.0};
  HalfInt M = HalfInt::from_int(2);
  HalfInt N = HalfInt::from_int(1);
  HalfInt C = HalfInt::from_int(2);
  HalfInt G = HalfInt::from_int(4);
  double lambda = 1.0;
};

struct ExactPipelineRow {
  HalfInt u;
  double p_u_exact = 0.0;
  double p_u_closed = 0.0;
  std::optional<double> p_antiparallel_exact;
  std::optional<double> p_antiparallel_closed;
};

struct ExactPipelineResult {
  std::vector<ExactPipelineRow> rows;
  int dimension = 0;
  /// Total-variation distance between the exact and closed-form joint
  /// distributions of (u, r).
  double tv_distance = 0.0;
};

/// Requires M/N to be an even integer and G >= C + 1/2; DimensionError past
/// the dense bound.
ExactPipelineResult exact_pipeline(const ExactPipelineConfig& cfg);

}  // namespace relqm
