#include "relqm/am/wigner_d.hpp"

#include <cmath>
#include <complex>
#include <algorithm>
#include <numbers>

#include "relqm/am/clebsch_gordan.hpp"
#include "relqm/am/log_factorial.hpp"
#include "relqm/errors.hpp"

namespace relqm {

namespace {

void require_supported(HalfInt j) {
  require_spin(j, "wigner_small_d");
  if (j.twice() > kMaxTwiceSpin) {
    throw AccuracyError("wigner_small_d: spin " + j.str() +
                        " exceeds the supported maximum of 1000");
  }
}

// Value carried as mantissa * exp(log_scale) so the recursion can pass through
// entries far below the double range (cos^{2j}(beta/2) at large j).
struct Scaled {
  double mantissa = 0.0;
  double log_scale = 0.0;

  double value() const {
    if (mantissa == 0.0) return 0.0;
    return std::copysign(std::exp(std::log(std::fabs(mantissa)) + log_scale), mantissa);
  }
};

// Edge entries in closed form:
//   d_{j,m'}  = (-1)^{j-m'} sqrt(C(2j, j+m')) cos^{j+m'} sin^{j-m'}
//   d_{-j,m'} =             sqrt(C(2j, j+m')) cos^{j-m'} sin^{j+m'}
// with half-angle cos/sin. Returned as sign and log magnitude.
Scaled edge(int tj, int tmp, double beta, bool top) {
  const int jpm = (tj + tmp) / 2;
  const int jmm = (tj - tmp) / 2;
  const double c = std::cos(0.5 * beta);
  const double s = std::sin(0.5 * beta);
  const int cos_pow = top ? jpm : jmm;
  const int sin_pow = top ? jmm : jpm;
  if ((cos_pow > 0 && c == 0.0) || (sin_pow > 0 && s == 0.0)) return {};
  double sign = 1.0;
  if (top && (jmm % 2 != 0)) sign = -sign;
  if (c < 0 && cos_pow % 2 != 0) sign = -sign;
  if (s < 0 && sin_pow % 2 != 0) sign = -sign;
  double log_mag = 0.5 * log_binomial(tj, jpm);
  if (cos_pow > 0) log_mag += cos_pow * std::log(std::fabs(c));
  if (sin_pow > 0) log_mag += sin_pow * std::log(std::fabs(s));
  return {sign, log_mag};
}

// beta at a multiple of pi: d(0) = 1, d(pi)_{m,m'} = (-1)^{j-m'} delta_{m,-m'}.
bool degenerate_angle(double beta, int tj, int tmp, Eigen::VectorXd& col) {
  const double s = std::sin(beta);
  if (std::fabs(s) > 1e-14) return false;
  const int n = tj + 1;
  col.setZero(n);
  const int col_idx = (tj - tmp) / 2;
  if (std::cos(beta) > 0) {
    col(col_idx) = 1.0;
  } else {
    const int row = n - 1 - col_idx;  // m = -m'
    col(row) = ((tj - tmp) / 2) % 2 == 0 ? 1.0 : -1.0;
  }
  return true;
}

}  // namespace

// Three-term recursion in the row index at fixed column m':
//   sqrt((j+m)(j-m+1)) d_{m-1} + sqrt((j-m)(j+m+1)) d_{m+1}
//       = 2 (m' - m cos beta) / sin beta * d_m
// run inward from both edges and stopped at the classical turning centre
// m ~ m' cos beta, so each half only ever moves towards the dominant solution.
Eigen::VectorXd wigner_small_d_column(HalfInt j, HalfInt mprime, double beta) {
  require_supported(j);
  require_projection(mprime, j, "wigner_small_d(j,m')");
  const int tj = j.twice();
  const int tmp = mprime.twice();
  const int n = tj + 1;

  Eigen::VectorXd col(n);
  if (degenerate_angle(beta, tj, tmp, col)) return col;
  if (n == 1) {
    col(0) = 1.0;
    return col;
  }

  const double cb = std::cos(beta);
  const double inv_sb = 1.0 / std::sin(beta);
  const double jd = 0.5 * tj;
  const double mpd = 0.5 * tmp;

  // row index i <-> m = j - i
  const double centre = jd - mpd * cb;
  int split = static_cast<int>(std::lround(centre));
  split = std::clamp(split, 0, n - 1);

  auto rescale = [](double& a, double& b, double& log_scale) {
    const double big = std::fabs(a) > std::fabs(b) ? std::fabs(a) : std::fabs(b);
    if (big > 1e100 || (big < 1e-100 && big > 0.0)) {
      const double shift = std::log(big);
      a /= big;
      b /= big;
      log_scale += shift;
    }
  };

  // top half: i = 0 .. split
  {
    Scaled seed = edge(tj, tmp, beta, true);
    double prev = 0.0, cur = seed.mantissa, log_scale = seed.log_scale;
    col(0) = Scaled{cur, log_scale}.value();
    for (int i = 0; i < split; ++i) {
      const double m = jd - i;
      const double a_up = std::sqrt((jd - m) * (jd + m + 1.0));
      const double a_dn = std::sqrt((jd + m) * (jd - m + 1.0));
      const double next = (2.0 * (mpd - m * cb) * inv_sb * cur - a_up * prev) / a_dn;
      prev = cur;
      cur = next;
      rescale(prev, cur, log_scale);
      col(i + 1) = Scaled{cur, log_scale}.value();
    }
  }
  // bottom half: i = n-1 down to split+1
  if (split < n - 1) {
    Scaled seed = edge(tj, tmp, beta, false);
    double prev = 0.0, cur = seed.mantissa, log_scale = seed.log_scale;
    col(n - 1) = Scaled{cur, log_scale}.value();
    for (int i = n - 1; i > split + 1; --i) {
      const double m = jd - i;
      const double a_up = std::sqrt((jd - m) * (jd + m + 1.0));
      const double a_dn = std::sqrt((jd + m) * (jd - m + 1.0));
      const double next = (2.0 * (mpd - m * cb) * inv_sb * cur - a_dn * prev) / a_up;
      prev = cur;
      cur = next;
      rescale(prev, cur, log_scale);
      col(i - 1) = Scaled{cur, log_scale}.value();
    }
  }
  return col;
}

double wigner_small_d(const WignerDQuery& q) {
  require_projection(q.m, q.j, "wigner_small_d(j,m)");
  const Eigen::VectorXd col = wigner_small_d_column(q.j, q.mprime, q.beta);
  return col((q.j.twice() - q.m.twice()) / 2);
}

WignerSmallD wigner_small_d_matrix(HalfInt j, double beta) {
  require_supported(j);
  const int n = j.multiplicity();
  Eigen::MatrixXd d(n, n);
  for (int c = 0; c < n; ++c) {
    d.col(c) = wigner_small_d_column(j, HalfInt::from_twice(j.twice() - 2 * c), beta);
  }
  return WignerSmallD(j, beta, std::move(d));
}

Eigen::MatrixXcd wigner_big_d_matrix(HalfInt j, double alpha, double beta, double gamma) {
  const WignerSmallD small = wigner_small_d_matrix(j, beta);
  const int n = j.multiplicity();
  Eigen::MatrixXcd out(n, n);
  for (int r = 0; r < n; ++r) {
    const double m = 0.5 * (j.twice() - 2 * r);
    for (int c = 0; c < n; ++c) {
      const double mp = 0.5 * (j.twice() - 2 * c);
      out(r, c) = std::polar(small.matrix()(r, c), -(m * alpha + mp * gamma));
    }
  }
  return out;
}

}  // namespace relqm
