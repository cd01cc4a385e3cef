#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "kss/quadrature.hpp"
#include "kss/random.hpp"
#include "kss/sampler.hpp"
#include "kss/spectrum.hpp"
#include "kss/stats.hpp"

namespace kss {

/// Covariance of (f(x), f(y), grad f(x), grad f(y)) for one equation at
/// overlap r, in the frame where only the N-th tangent direction sees the
/// other point. Index layout: 0 = f(x), 1 = f(y), 2..N+1 = E_1..E_N f(x),
/// N+2..2N+1 = E_1..E_N f(y).
struct JointValueGradientCovariance {
  int sphere_dim = 1;
  Eigen::MatrixXd matrix;

  static int value_x() { return 0; }
  static int value_y() { return 1; }
  int grad_x(int i) const { return 2 + i; }               // i in [0, N)
  int grad_y(int i) const { return 2 + sphere_dim + i; }  // i in [0, N)
};

JointValueGradientCovariance joint_covariance(const MixedSpectrum& spectrum,
                                              double r, int sphere_dim);
JointValueGradientCovariance joint_covariance(const MixedSpectrum& spectrum,
                                              const Overlap& overlap,
                                              int sphere_dim);

/// Points x, y with x.y = r and tangent frames realizing the index layout of
/// JointValueGradientCovariance: x = e_N, y = sqrt(1-r^2) e_{N-1} + r e_N.
struct SpecialFramePair {
  TangentFrame at_x;
  TangentFrame at_y;
};
SpecialFramePair special_frame_pair(int sphere_dim, double r);

/// Gradient covariances conditional on f(x) = f(y) = 0. Entries with
/// different tangent indices are uncorrelated; the table is the same for
/// every tangent index i < N.
struct ConditionalGradientCovariance {
  double tangent_variance = 0.0;  // i < N
  double normal_variance = 0.0;   // i = N
  double tangent_cross = 0.0;     // i < N, between x and y
  double normal_cross = 0.0;      // i = N, between x and y
};

ConditionalGradientCovariance conditional_gradient_covariance(
    const MixedSpectrum& spectrum, double r, int sphere_dim);
ConditionalGradientCovariance conditional_gradient_covariance(
    const MixedSpectrum& spectrum, const Overlap& overlap, int sphere_dim);

/// Joint law of the two normalized conditional gradient matrices M1, M2
/// (each K x N): entries with different (k, j) are independent; entry (k, j)
/// of M1 and M2 has the 2x2 covariance returned by block(k, j).
class ConditionalPairModel {
 public:
  struct Row {
    double lambda = 1.0;         // variance of the last column
    double tangent_corr = 0.0;   // xi'(r) / xi'(1)
    double normal_cov = 0.0;     // last-column covariance
  };

  /// Throws ModelError if a block is not PSD beyond rounding slack.
  ConditionalPairModel(const SystemSpec& spec, const Overlap& overlap);
  ConditionalPairModel(const SystemSpec& spec, double r);

  int sphere_dim() const { return sphere_dim_; }
  int equation_count() const { return static_cast<int>(rows_.size()); }
  const Overlap& overlap() const { return overlap_; }
  const std::vector<Row>& rows() const { return rows_; }
  Eigen::Matrix2d block(int k, int j) const;

 private:
  int sphere_dim_ = 1;
  Overlap overlap_;
  std::vector<Row> rows_;
};

enum class PairLaw {
  kConditional,  // M1, M2 as conditioned
  kToppedUp,     // last column topped up to unit variance by independent noise
};

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_conditional_pair(
    const ConditionalPairModel& model, Engine& rng,
    PairLaw law = PairLaw::kConditional);
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_conditional_pair(
    const ConditionalPairModel& model, std::uint64_t seed,
    PairLaw law = PairLaw::kConditional);

/// J(A) = sqrt(det(A A^T)) for K <= N, as the product of the norms of the
/// successive row residuals (modified Gram-Schmidt, two passes).
double jdet(const Eigen::MatrixXd& a);

/// Monte Carlo estimate of D(r) = E[J(M1) J(M2)] under the conditional pair
/// law. Requires n_samples >= 100.
McEstimate d_of_r_mc(const SystemSpec& spec, double r, std::uint64_t n_samples,
                     std::uint64_t seed, int threads = 1);
McEstimate d_of_r_mc(const SystemSpec& spec, const Overlap& overlap,
                     std::uint64_t n_samples, std::uint64_t seed,
                     int threads = 1);

/// Same for the topped-up pair, an upper bound on D(r).
McEstimate eta_mc(const SystemSpec& spec, double r, std::uint64_t n_samples,
                  std::uint64_t seed, int threads = 1);

struct KacRiceNode {
  double r = 0.0;
  double d_hat = 0.0;
  double d_se = 0.0;
  double integrand = 0.0;   // r-space integrand of E Z^(2)
  double weight = 0.0;      // quadrature weight incl. substitution Jacobian
  double cumulative = 0.0;  // running integral up to this node
};

struct KacRiceReport {
  double first_moment = 0.0;
  double continuous_part = 0.0;  // integral over the open overlap interval
  double continuous_part_se = 0.0;
  // Pairs at r = 1 (x = y) and r = -1 (y = -x); nonzero only for K = N over
  // the full interval. The antipodal atom needs f(-x) = +-f(x) per equation.
  double diagonal_atom = 0.0;
  double antipodal_atom = 0.0;
  double second_moment = 0.0;
  double second_moment_se = 0.0;
  double variance_ratio = 0.0;  // (E Z^2 - (E Z)^2) / (E Z)^2
  double variance_ratio_se = 0.0;
  double interval_lo = -1.0;
  double interval_hi = 1.0;
  int quadrature_nodes = 0;
  std::uint64_t samples_per_node = 0;
  std::uint64_t seed = 0;
  std::vector<KacRiceNode> nodes;
};

/// Second moment from the two-point Kac-Rice integral with D(r) estimated by
/// Monte Carlo at every quadrature node (node i uses sub-stream i of `seed`).
/// The node count is fixed at rule.nodes: Monte Carlo noise makes the
/// adaptive doubling criterion meaningless here. Over the full interval
/// [-1, 1] the diagonal and antipodal atoms are added, so second_moment is
/// E Z^2; over a sub-interval it is E Z^(2)([lo, hi]).
KacRiceReport second_moment_mc(const SystemSpec& spec,
                               const QuadratureRule& rule,
                               std::uint64_t samples_per_node,
                               std::uint64_t seed, int threads = 1,
                               double lo = -1.0, double hi = 1.0);

}  // namespace kss
