#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "kss/sampler.hpp"
#include "kss/spectrum.hpp"

namespace kss {

/// A system of K real equations on S^N, evaluated through its homogeneous
/// extension to R^{N+1}.
class SphereSystem {
 public:
  virtual ~SphereSystem() = default;
  virtual int sphere_dim() const = 0;
  virtual int equation_count() const = 0;
  virtual int max_degree() const = 0;
  virtual Eigen::VectorXd values(const Eigen::VectorXd& x) const = 0;
  // K x (N+1) ambient Jacobian.
  virtual Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const = 0;
};

class PolynomialField final : public SphereSystem {
 public:
  explicit PolynomialField(const PolynomialSystem& system) : system_(system) {}
  int sphere_dim() const override { return system_.sphere_dim(); }
  int equation_count() const override { return system_.equation_count(); }
  int max_degree() const override { return system_.max_degree(); }
  Eigen::VectorXd values(const Eigen::VectorXd& x) const override {
    return system_.evaluate_ambient(x);
  }
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const override {
    return system_.jacobian_ambient(x);
  }

 private:
  const PolynomialSystem& system_;
};

/// f(x) = A x: K linear forms on S^N.
class LinearField final : public SphereSystem {
 public:
  explicit LinearField(Eigen::MatrixXd forms);
  int sphere_dim() const override { return static_cast<int>(forms_.cols()) - 1; }
  int equation_count() const override { return static_cast<int>(forms_.rows()); }
  int max_degree() const override { return 1; }
  Eigen::VectorXd values(const Eigen::VectorXd& x) const override {
    return forms_ * x;
  }
  Eigen::MatrixXd jacobian(const Eigen::VectorXd&) const override {
    return forms_;
  }

 private:
  Eigen::MatrixXd forms_;
};

/// g(y) = f(B y) on S^m, for B an (N+1) x (m+1) matrix with orthonormal
/// columns: f restricted to the great m-sphere spanned by B.
class RestrictedField final : public SphereSystem {
 public:
  RestrictedField(const SphereSystem& base, Eigen::MatrixXd basis);
  int sphere_dim() const override { return static_cast<int>(basis_.cols()) - 1; }
  int equation_count() const override { return base_.equation_count(); }
  int max_degree() const override { return base_.max_degree(); }
  Eigen::VectorXd values(const Eigen::VectorXd& y) const override {
    return base_.values(basis_ * y);
  }
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& y) const override {
    return base_.jacobian(basis_ * y) * basis_;
  }

 private:
  const SphereSystem& base_;
  Eigen::MatrixXd basis_;
};

struct ZeroCountResult {
  int count = 0;          // K = N
  double measure = 0.0;   // K < N (Crofton); equals count for K = N
  double measure_se = 0.0;
  double max_residual = 0.0;
  double dedupe_radius = 0.0;
  bool saturated = false;   // a new root appeared in the final tranche
  bool degenerate = false;  // some root has an ill-conditioned Jacobian
  int n_starts = 0;
  int n_converged = 0;
  std::vector<Eigen::VectorXd> roots;
};

/// Exact-tier counter for N = K = 1: sign changes of f(cos t, sin t) on a
/// uniform grid of max(1024, 64 d) points, each bracket bisected to 1e-12.
/// When two brackets are closer than 2 cells the grid is doubled (up to 8
/// times); DiagnosticsError if they stay that close.
ZeroCountResult count_zeros_circle(const SphereSystem& system);
ZeroCountResult count_zeros_circle(const PolynomialSystem& system);

struct SphereCountOptions {
  int n_starts = 0;  // 0: 50 * ceil(E Z), from `expected` below
  double expected = 1.0;
  double dedupe_radius = 1e-6;
  double residual_tol = 1e-9;
  int max_iterations = 60;
  double saturation_tranche = 0.1;
  double degeneracy_condition = 1e10;
  std::uint64_t seed = 0;
};

/// High-confidence counter for K = N >= 2: multi-start Newton on the sphere
/// (the map (f, |x|^2 - 1), solved in the tangent space and renormalized),
/// followed by deduplication. Each converged root also seeds a Newton run
/// from its antipode. DiagnosticsError if more than 99% of starts fail.
ZeroCountResult count_zeros_sphere(const SphereSystem& system,
                                   const SphereCountOptions& options);
ZeroCountResult count_zeros_sphere(const PolynomialSystem& system,
                                   const SphereCountOptions& options);

/// Crofton estimate of the (N-K)-measure of the zero set for K < N: each
/// slice adds N - K independent Gaussian linear forms, which restricts f to
/// a uniformly random great K-sphere; the estimate averages
/// Vol(S^{N-K}) / 2 * #roots over slices. Slice s uses sub-stream s of seed.
ZeroCountResult estimate_hausdorff_crofton(const SphereSystem& system,
                                           int n_slices, std::uint64_t seed,
                                           const SphereCountOptions& options = {});
ZeroCountResult estimate_hausdorff_crofton(const PolynomialSystem& system,
                                           int n_slices, std::uint64_t seed,
                                           const SphereCountOptions& options = {});

struct EmpiricalOptions {
  int n_starts = 0;  // 0: default of count_zeros_sphere
  double residual_tol = 1e-9;
  int crofton_slices = 8;
  int threads = 1;
};

struct EmpiricalMoments {
  int n_trials = 0;
  int n_used = 0;  // trials not flagged degenerate
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  double second_moment = 0.0;  // mean of Z^2
  double second_moment_se = 0.0;
  double normalized_variance = 0.0;  // variance / mean^2
  double expected = 0.0;             // closed-form E Z
  int saturated = 0;
  int degenerate = 0;
  std::vector<double> values;  // per trial, count or measure
  std::vector<bool> saturated_flags;
  std::vector<bool> degenerate_flags;
};

/// Z (K = N) or the Crofton measure estimate (K < N) over n_trials fresh
/// systems; trial t samples with sub-stream t of seed. Degenerate trials are
/// reported but excluded from the statistics.
EmpiricalMoments empirical_moments(const SystemSpec& spec, int n_trials,
                                   std::uint64_t seed,
                                   const EmpiricalOptions& options = {});

}  // namespace kss
